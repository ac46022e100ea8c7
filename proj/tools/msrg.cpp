// msrg: command-line front end for spectral GGM hyperparameter estimation,
// restoration and window sweeps.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msrg/app/commands.hpp"

namespace {

using msrg::io::Json;

// Flag values that were given on the command line, keyed like the config.
struct FlagSet {
  std::optional<std::string> input, output, config, svg;
  std::optional<std::uint64_t> seed;
  std::optional<int> n, size, estimate_n, max_iterations;
  std::optional<double> shrink, sigma, alpha, beta, gamma, offset, phi, psi, tolerance;
  std::vector<double> fractions;
  bool timing = false;

  Json to_json(const CLI::App& sub) const {
    Json j = Json::object();
    auto put = [&](const char* flag, const char* key, const auto& v) {
      if (v && sub.get_option_no_throw(flag) && sub.get_option(flag)->count() > 0) j[key] = *v;
    };
    put("--input", "input", input);
    put("--output", "output", output);
    put("--svg", "svg", svg);
    put("--seed", "seed", seed);
    put("--n", "n", n);
    put("--size", "size", size);
    put("--estimate-n", "estimate_n", estimate_n);
    put("--max-iterations", "max_iterations", max_iterations);
    put("--shrink", "shrink", shrink);
    put("--sigma", "sigma", sigma);
    put("--alpha", "alpha", alpha);
    put("--beta", "beta", beta);
    put("--gamma", "gamma", gamma);
    put("--offset", "offset", offset);
    put("--phi", "phi", phi);
    put("--psi", "psi", psi);
    put("--tolerance", "relative_tolerance", tolerance);
    if (sub.get_option_no_throw("--fractions") && sub.get_option("--fractions")->count() > 0) j["fractions"] = fractions;
    if (sub.get_option_no_throw("--timing") && sub.get_option("--timing")->count() > 0) j["timing"] = timing;
    return j;
  }
};

std::string default_text(const std::string& command, const char* key) {
  const Json d = msrg::app::command_defaults(command);
  const auto it = d.find(key);
  if (it == d.end() || it->is_null()) return "";
  return it->dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral Gaussian graphical model toolkit: renormalised evidence maximisation and restoration"};
  app.require_subcommand(1);
  FlagSet flags;

  struct Spec {
    const char* name;
    const char* help;
  };
  const std::vector<Spec> specs = {
      {"sample", "Draw a field from the prior and write it as 16-bit PGM"},
      {"degrade", "Add white Gaussian noise to an image"},
      {"estimate", "Estimate (alpha, beta, gamma) on the frequency window W(n)"},
      {"denoise", "Restore an image by the posterior mean"},
      {"sweep", "Closed-form SNR against the window fraction 1 - n/N"},
      {"validate", "Run the built-in oracle and Monte-Carlo checks"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    subs[s.name] = sub;
    const std::string cmd = s.name;
    const Json defaults = msrg::app::command_defaults(cmd);
    auto has = [&](const char* key) { return defaults.contains(key); };
    auto opt = [&](const char* flag, const char* key, auto& target, const char* help) {
      if (!has(key)) return;
      sub->add_option(flag, target, help)->default_str(default_text(cmd, key));
    };
    sub->add_option("--config", flags.config, "JSON config file or sidecar to re-run");
    opt("--input", "input", flags.input, "Input image (PGM or PNG)");
    opt("--output", "output", flags.output, "Output path");
    opt("--seed", "seed", flags.seed, "RNG seed");
    opt("--size", "size", flags.size, "Lattice side N for a prior sample");
    opt("--n", "n", flags.n, "Window size n (1 <= n <= N)");
    opt("--shrink", "shrink", flags.shrink, "Window fraction 1 - n/N, alternative to --n");
    opt("--estimate-n", "estimate_n", flags.estimate_n, "Estimate hyperparameters on W(n) before restoring");
    opt("--sigma", "sigma", flags.sigma, "Noise standard deviation");
    opt("--alpha", "alpha", flags.alpha, "Smoothness precision");
    opt("--beta", "beta", flags.beta, "Noise precision");
    opt("--gamma", "gamma", flags.gamma, "Ridge precision");
    opt("--offset", "offset", flags.offset, "Constant added before 16-bit export");
    opt("--phi", "phi", flags.phi, "Scale exponent of the data field");
    opt("--psi", "psi", flags.psi, "Scale exponent of the latent field");
    opt("--max-iterations", "max_iterations", flags.max_iterations, "Optimizer iteration budget per start");
    opt("--tolerance", "relative_tolerance", flags.tolerance, "Relative objective tolerance");
    opt("--svg", "svg", flags.svg, "Also write an SVG chart to this path");
    if (has("fractions"))
      sub->add_option("--fractions", flags.fractions, "Shrink fractions 1 - n/N")
          ->default_str("0, 0.05, ..., 0.95")
          ->delimiter(',');
    if (has("timing")) sub->add_flag("--timing", flags.timing, "Record estimation wall time (not reproducible)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return msrg::app::kUsageError;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      std::optional<Json> file;
      if (flags.config) file = msrg::io::load_config(*flags.config, name);
      const Json cfg = msrg::app::resolve_config(name, file, flags.to_json(*sub));
      return msrg::app::run_command(name, cfg, std::cout);
    } catch (const msrg::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return msrg::app::exit_code_for(e.code());
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return msrg::app::kUsageError;
    }
  }
  return msrg::app::kUsageError;
}
