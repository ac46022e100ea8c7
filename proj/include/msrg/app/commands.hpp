#pragma once

// The pipeline commands behind the CLI. Each command receives a fully
// resolved JSON configuration (defaults < config file < flags), performs its
// work, and records that configuration in a sidecar next to every output.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "msrg/app/validation.hpp"
#include "msrg/error.hpp"
#include "msrg/estimator.hpp"
#include "msrg/evaluation.hpp"
#include "msrg/ggm_model.hpp"
#include "msrg/io/image_io.hpp"
#include "msrg/io/sidecar.hpp"
#include "msrg/io/tables.hpp"
#include "msrg/restoration.hpp"
#include "msrg/spectral_core.hpp"
#include "msrg/synthesis.hpp"

namespace msrg::app {

using io::Json;

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kUsageError = 2, kIoFailure = 3 };

inline int exit_code_for(ErrorCode code) noexcept {
  return code == ErrorCode::IoError ? kIoFailure : kUsageError;
}

inline std::vector<double> default_fractions() {
  std::vector<double> f;
  for (int i = 0; i < 20; ++i) f.push_back(i / 20.0);
  return f;
}

inline Json optimizer_defaults() { return {{"max_iterations", 500}, {"relative_tolerance", 1e-9}}; }

/// Every key a command accepts, with its default (null = unset).
inline Json command_defaults(const std::string& command) {
  Json d;
  if (command == "sample") {
    d = {{"output", nullptr}, {"size", 64}, {"alpha", 1.0}, {"gamma", 1e-3}, {"seed", 1}, {"offset", 32768.0}};
  } else if (command == "degrade") {
    d = {{"input", nullptr}, {"output", nullptr}, {"sigma", 40.0}, {"seed", 1}};
  } else if (command == "estimate") {
    d = {{"input", nullptr}, {"output", nullptr}, {"n", nullptr}, {"shrink", nullptr}, {"phi", 0.0}, {"psi", 0.0}};
    d.update(optimizer_defaults());
  } else if (command == "denoise") {
    d = {{"input", nullptr}, {"output", nullptr}, {"alpha", nullptr}, {"beta", nullptr},
         {"gamma", nullptr}, {"estimate_n", nullptr}};
    d.update(optimizer_defaults());
  } else if (command == "sweep") {
    d = {{"input", nullptr}, {"output", nullptr}, {"sigma", 40.0}, {"fractions", default_fractions()},
         {"svg", nullptr},   {"timing", false}};
    d.update(optimizer_defaults());
  } else if (command == "validate") {
    d = {{"output", nullptr}};
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown command '" + command + "'");
  }
  return d;
}

/// defaults < file < flags. Unknown keys are rejected.
inline Json resolve_config(const std::string& command, const std::optional<Json>& file, const Json& flags) {
  Json resolved = command_defaults(command);
  for (const Json* layer : {file ? &*file : nullptr, &flags}) {
    if (!layer) continue;
    for (const auto& [key, value] : layer->items()) {
      if (!resolved.contains(key))
        throw Error(ErrorCode::InvalidConfig, "unknown option '" + key + "' for command '" + command + "'");
      resolved[key] = value;
    }
  }
  return resolved;
}

namespace detail {

template <class T>
std::optional<T> optional_value(const Json& cfg, const std::string& key) {
  const auto it = cfg.find(key);
  if (it == cfg.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::InvalidConfig, "option '" + key + "' has the wrong type");
  }
}

template <class T>
T required_value(const Json& cfg, const std::string& key) {
  auto v = optional_value<T>(cfg, key);
  if (!v) throw Error(ErrorCode::InvalidConfig, "option '" + key + "' is required");
  return *v;
}

inline double positive(const Json& cfg, const std::string& key) {
  const double v = required_value<double>(cfg, key);
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, "option '" + key + "' must be > 0");
  return v;
}

inline OptimizerConfig optimizer_config(const Json& cfg) {
  OptimizerConfig oc;
  oc.max_iterations = required_value<int>(cfg, "max_iterations");
  oc.relative_tolerance = required_value<double>(cfg, "relative_tolerance");
  try {
    oc.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return oc;
}

inline std::vector<PixelField> load_fields(const std::filesystem::path& path, io::Image& image) {
  image = io::read_image(path);
  return io::to_fields(image);
}

inline int window_from(const Json& cfg, int full, const char* n_key, const char* shrink_key) {
  const auto n = optional_value<int>(cfg, n_key);
  const auto shrink = shrink_key ? optional_value<double>(cfg, shrink_key) : std::nullopt;
  if (n && shrink) throw Error(ErrorCode::InvalidConfig, "give either n or shrink, not both");
  int window = full;
  if (n) window = *n;
  if (shrink) {
    if (!(*shrink >= 0.0 && *shrink < 1.0)) throw Error(ErrorCode::InvalidConfig, "shrink must lie in [0, 1)");
    window = std::max(1, static_cast<int>(std::lround((1.0 - *shrink) * full)));
  }
  if (window < 1 || window > full)
    throw Error(ErrorCode::InvalidConfig,
                "window n=" + std::to_string(window) + " must satisfy 1 <= n <= N=" + std::to_string(full));
  return window;
}

inline Json hyperparams_json(const Hyperparams& h) {
  return {{"alpha", h.alpha()}, {"beta", h.beta()}, {"gamma", h.gamma()}};
}

inline Json estimation_json(const EstimationResult& r, int n, int full) {
  Json j = hyperparams_json(r.estimate);
  j["objective"] = r.objective_value;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["status"] = to_string(r.status);
  j["n"] = n;
  j["N"] = full;
  if (!r.diagnostics.empty()) j["warning"] = r.diagnostics;
  return j;
}

}  // namespace detail

/// Prior sample written as 16-bit PGM (value + offset, clamped at export).
inline int cmd_sample(const Json& cfg, std::ostream& log) {
  const std::filesystem::path output = detail::required_value<std::string>(cfg, "output");
  const int size = detail::required_value<int>(cfg, "size");
  if (size < 1) throw Error(ErrorCode::InvalidConfig, "size must be >= 1, got " + std::to_string(size));
  const double alpha = detail::positive(cfg, "alpha");
  const double gamma = detail::positive(cfg, "gamma");
  const auto seed = detail::required_value<std::uint64_t>(cfg, "seed");
  const double offset = detail::required_value<double>(cfg, "offset");

  SeededRng rng(seed);
  PixelField f = sample_prior(Hyperparams(alpha, 1.0, gamma), LatticeSize(size), rng);
  for (double& v : f.values()) v += offset;
  const io::Image img = io::from_fields({f}, 65535);
  io::write_pgm(output, img);

  Json side = io::make_sidecar("sample", cfg);
  side["rng"] = {{"algorithm", rng.algorithm()}, {"seed", seed}};
  side["clamped_samples"] = io::count_clamped(img);
  side["pixel_variance"] = variance_of(f);
  io::write_json(io::sidecar_path(output), side);
  log << "wrote " << output.string() << " (" << size << "x" << size << ")\n";
  return kSuccess;
}

/// g = f + N(0, sigma^2) per pixel and channel; each channel has its own
/// derived RNG stream.
inline int cmd_degrade(const Json& cfg, std::ostream& log) {
  const std::filesystem::path input = detail::required_value<std::string>(cfg, "input");
  const std::filesystem::path output = detail::required_value<std::string>(cfg, "output");
  const double sigma = detail::positive(cfg, "sigma");
  const auto seed = detail::required_value<std::uint64_t>(cfg, "seed");

  io::Image image;
  auto fields = detail::load_fields(input, image);
  const NoiseSpec noise(sigma);
  for (std::size_t c = 0; c < fields.size(); ++c) {
    SeededRng rng = SeededRng::derived(seed, c);
    fields[c] = degrade(fields[c], noise, rng);
  }
  const io::Image out = io::from_fields(fields, image.maxval);
  io::write_image(output, out);

  Json side = io::make_sidecar("degrade", cfg);
  side["inputs"] = Json::array({io::input_record(input)});
  side["rng"] = {{"algorithm", SeededRng::kAlgorithm}, {"seed", seed}, {"stream", "derived(seed, channel)"}};
  side["sigma"] = sigma;
  side["beta_star"] = noise.beta_star();
  side["clamped_samples"] = io::count_clamped(out);
  io::write_json(io::sidecar_path(output), side);
  log << "wrote " << output.string() << " (sigma=" << sigma << ", beta*=" << noise.beta_star() << ")\n";
  return kSuccess;
}

/// Hyperparameter estimation from the band-limited spectrum of the input.
inline int cmd_estimate(const Json& cfg, std::ostream& log) {
  const std::filesystem::path input = detail::required_value<std::string>(cfg, "input");
  const auto output = detail::optional_value<std::string>(cfg, "output");
  const OptimizerConfig oc = detail::optimizer_config(cfg);
  const ScaleExponents exps{detail::required_value<double>(cfg, "psi"), detail::required_value<double>(cfg, "phi")};

  io::Image image;
  const auto fields = detail::load_fields(input, image);
  const int full = fields.front().side();
  const int n = detail::window_from(cfg, full, "n", "shrink");
  const auto names = io::channel_names(fields.size());

  Json report = io::make_sidecar("estimate", cfg);
  report["inputs"] = Json::array({io::input_record(input)});
  report["objective_note"] = "objective is the log evidence per retained mode on W(n); values for different n are not comparable";
  Json channels = Json::array();
  for (std::size_t c = 0; c < fields.size(); ++c) {
    const auto G = select_window(forward_dft(fields[c]), LatticeSize(n));
    const EstimationResult r = estimate_empirical(G, oc, exps);
    Json j = detail::estimation_json(r, n, full);
    j["channel"] = names[c];
    channels.push_back(std::move(j));
  }
  report["channels"] = std::move(channels);
  if (output) io::write_json(*output, report);
  log << report["channels"].dump(2) << '\n';
  return kSuccess;
}

/// Posterior-mean restoration at full resolution, with explicit
/// hyperparameters or ones estimated on W(estimate_n).
inline int cmd_denoise(const Json& cfg, std::ostream& log) {
  const std::filesystem::path input = detail::required_value<std::string>(cfg, "input");
  const std::filesystem::path output = detail::required_value<std::string>(cfg, "output");
  const auto alpha = detail::optional_value<double>(cfg, "alpha");
  const auto beta = detail::optional_value<double>(cfg, "beta");
  const auto gamma = detail::optional_value<double>(cfg, "gamma");
  const auto estimate_n = detail::optional_value<int>(cfg, "estimate_n");
  const bool explicit_h = alpha || beta || gamma;
  if (explicit_h && estimate_n)
    throw Error(ErrorCode::InvalidConfig, "give either alpha/beta/gamma or estimate_n, not both");
  if (explicit_h && !(alpha && beta && gamma))
    throw Error(ErrorCode::InvalidConfig, "explicit hyperparameters need all of alpha, beta and gamma");
  if (!explicit_h && !estimate_n)
    throw Error(ErrorCode::InvalidConfig, "denoise needs alpha/beta/gamma or estimate_n");

  io::Image image;
  auto fields = detail::load_fields(input, image);
  const int full = fields.front().side();
  const auto names = io::channel_names(fields.size());
  const OptimizerConfig oc = detail::optimizer_config(cfg);

  Json side = io::make_sidecar("denoise", cfg);
  side["inputs"] = Json::array({io::input_record(input)});
  Json channels = Json::array();
  for (std::size_t c = 0; c < fields.size(); ++c) {
    const SpectralField spectrum = forward_dft(fields[c]);
    Json entry{{"channel", names[c]}};
    std::optional<Hyperparams> h;
    if (explicit_h) {
      h.emplace(detail::positive(cfg, "alpha"), detail::positive(cfg, "beta"), detail::positive(cfg, "gamma"));
    } else {
      const int n = detail::window_from(cfg, full, "estimate_n", nullptr);
      const EstimationResult r = estimate_empirical(select_window(spectrum, LatticeSize(n)), oc);
      entry["estimation"] = detail::estimation_json(r, n, full);
      h = r.estimate;
    }
    const RestorationOutput restored = posterior_mean(spectrum, *h);
    entry["hyperparams"] = detail::hyperparams_json(*h);
    entry["gain"] = {{"min", restored.gains.min}, {"mean", restored.gains.mean}, {"max", restored.gains.max}};
    channels.push_back(std::move(entry));
    fields[c] = restored.restored;
  }
  const io::Image out = io::from_fields(fields, image.maxval);
  io::write_image(output, out);
  side["channels"] = std::move(channels);
  side["clamped_samples"] = io::count_clamped(out);
  io::write_json(io::sidecar_path(output), side);
  log << side["channels"].dump(2) << '\n';
  return kSuccess;
}

/// Closed-form SNR of the full pipeline against the window fraction 1 - n/N,
/// using the statistical-average estimates on each window.
inline std::vector<io::SweepRecord> run_sweep(const std::vector<PixelField>& truths, double sigma,
                                              const std::vector<double>& fractions, const OptimizerConfig& oc,
                                              bool timing) {
  const auto names = io::channel_names(truths.size());
  const double beta_star = NoiseSpec(sigma).beta_star();
  std::vector<io::SweepRecord> records;
  for (std::size_t c = 0; c < truths.size(); ++c) {
    const LatticeSize full = truths[c].size();
    const TrueModel tm(beta_star, PowerSpectrum::of(truths[c]));
    const double var = variance_of(truths[c]);
    std::vector<io::SweepRecord> rows;
    for (double fraction : fractions) {
      if (!(fraction >= 0.0 && fraction < 1.0))
        throw Error(ErrorCode::InvalidConfig, "shrink fractions must lie in [0, 1)");
      const int n = std::max(1, static_cast<int>(std::lround((1.0 - fraction) * full.value())));
      const auto start = std::chrono::steady_clock::now();
      const EstimationResult r = estimate_expected(tm, LatticeSize(n), oc);
      const auto stop = std::chrono::steady_clock::now();
      const RiskReport risk = closed_form_risk(r.estimate, tm);
      rows.push_back({names[c], n, 1.0 - static_cast<double>(n) / full.value(), r.estimate.alpha(),
                      r.estimate.beta(), r.estimate.gamma(), risk.d_n,
                      var > 0.0 ? snr_db(var, risk.d_n) : std::nan(""),
                      timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
    records.insert(records.end(), rows.begin(), rows.end());
  }
  return records;
}

inline int cmd_sweep(const Json& cfg, std::ostream& log) {
  const std::filesystem::path input = detail::required_value<std::string>(cfg, "input");
  const std::filesystem::path output = detail::required_value<std::string>(cfg, "output");
  const double sigma = detail::positive(cfg, "sigma");
  const auto fractions = detail::required_value<std::vector<double>>(cfg, "fractions");
  if (fractions.empty()) throw Error(ErrorCode::InvalidConfig, "fractions must not be empty");
  const auto svg = detail::optional_value<std::string>(cfg, "svg");
  const bool timing = detail::required_value<bool>(cfg, "timing");
  const OptimizerConfig oc = detail::optimizer_config(cfg);

  io::Image image;
  const auto truths = detail::load_fields(input, image);
  const auto records = run_sweep(truths, sigma, fractions, oc, timing);
  io::write_text(output, io::sweep_csv(records));
  if (svg) io::write_text(*svg, io::sweep_svg(records));

  Json side = io::make_sidecar("sweep", cfg);
  side["inputs"] = Json::array({io::input_record(input)});
  side["beta_star"] = NoiseSpec(sigma).beta_star();
  Json variances = Json::object();
  const auto names = io::channel_names(truths.size());
  for (std::size_t c = 0; c < truths.size(); ++c) variances[names[c]] = variance_of(truths[c]);
  side["truth_variance"] = std::move(variances);
  io::write_json(io::sidecar_path(output), side);
  log << "wrote " << records.size() << " rows to " << output.string() << '\n';
  return kSuccess;
}

inline int cmd_validate(const Json& cfg, std::ostream& log) {
  const auto output = detail::optional_value<std::string>(cfg, "output");
  const auto results = validation::run_all();
  bool all = true;
  Json suites = Json::array();
  for (const auto& r : results) {
    all = all && r.passed;
    log << std::left << std::setw(22) << r.name << (r.passed ? "PASS  " : "FAIL  ") << r.detail << '\n';
    suites.push_back({{"suite", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  if (output) {
    Json report = io::make_sidecar("validate", cfg);
    report["suites"] = std::move(suites);
    report["passed"] = all;
    io::write_json(*output, report);
  }
  return all ? kSuccess : kValidationFailure;
}

inline int run_command(const std::string& command, const Json& cfg, std::ostream& log) {
  if (command == "sample") return cmd_sample(cfg, log);
  if (command == "degrade") return cmd_degrade(cfg, log);
  if (command == "estimate") return cmd_estimate(cfg, log);
  if (command == "denoise") return cmd_denoise(cfg, log);
  if (command == "sweep") return cmd_sweep(cfg, log);
  if (command == "validate") return cmd_validate(cfg, log);
  throw Error(ErrorCode::InvalidConfig, "unknown command '" + command + "'");
}

}  // namespace msrg::app
