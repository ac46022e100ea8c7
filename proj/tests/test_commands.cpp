#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "msrg/app/commands.hpp"
#include "msrg/app/validation.hpp"
#include "msrg/io/image_io.hpp"
#include "msrg/io/sidecar.hpp"

using namespace msrg;
using io::Json;
namespace fs = std::filesystem;

namespace {

const fs::path kData(MSRG_TEST_DATA_DIR);

class CommandTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("msrg_cmd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& command, const Json& flags, const std::optional<Json>& file = std::nullopt) {
    std::ostringstream log;
    return app::run_command(command, app::resolve_config(command, file, flags), log);
  }

  ErrorCode error_of(const std::string& command, const Json& flags) {
    try {
      run(command, flags);
    } catch (const Error& e) {
      return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidArgument;
  }

  static std::vector<unsigned char> bytes(const std::string& p) { return io::detail::read_bytes(p); }

  static Json json(const std::string& p) {
    std::ifstream in(p);
    return Json::parse(in);
  }

  void write_constant_pgm(const std::string& p, int w, int h, double value) const {
    io::Image img;
    img.width = w;
    img.height = h;
    img.channels = {std::vector<double>(static_cast<std::size_t>(w) * h, value)};
    io::write_pgm(p, img);
  }

  fs::path dir_;
};

double mse(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

TEST(ResolveConfig, FlagsOverrideFileOverrideDefaults) {
  const Json file = {{"sigma", 10.0}, {"seed", 5}};
  const Json flags = {{"sigma", 20.0}};
  const Json cfg = app::resolve_config("degrade", file, flags);
  EXPECT_EQ(cfg["sigma"], 20.0);
  EXPECT_EQ(cfg["seed"], 5);
  EXPECT_TRUE(cfg["input"].is_null());
  EXPECT_EQ(app::resolve_config("degrade", std::nullopt, Json::object())["sigma"], 40.0);
}

TEST(ResolveConfig, UnknownKeysAndCommandsAreRejected) {
  try {
    (void)app::resolve_config("degrade", std::nullopt, {{"alpha", 1.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
  EXPECT_THROW((void)app::command_defaults("frobnicate"), Error);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(app::exit_code_for(ErrorCode::IoError), 3);
  EXPECT_EQ(app::exit_code_for(ErrorCode::InvalidConfig), 2);
  EXPECT_EQ(app::exit_code_for(ErrorCode::NonSquareImage), 2);
}

TEST_F(CommandTest, SampleIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(run("sample", {{"output", path("a.pgm")}, {"size", 64}, {"seed", 1}}), 0);
  ASSERT_EQ(run("sample", {{"output", path("b.pgm")}, {"size", 64}, {"seed", 1}}), 0);
  EXPECT_EQ(bytes(path("a.pgm")), bytes(path("b.pgm")));
  const Json side = json(path("a.pgm.json"));
  EXPECT_EQ(side["rng"]["algorithm"], "mt19937_64+box-muller");
  EXPECT_EQ(side["rng"]["seed"], 1);
  EXPECT_EQ(side["config"]["size"], 64);
  const auto img = io::read_image(path("a.pgm"));
  EXPECT_EQ(img.maxval, 65535);
  EXPECT_EQ(img.width, 64);
}

TEST_F(CommandTest, SampleRejectsZeroSizeAndMissingDirectory) {
  EXPECT_EQ(error_of("sample", {{"output", path("z.pgm")}, {"size", 0}}), ErrorCode::InvalidConfig);
  const std::string target = path("no/such/dir/s.pgm");
  try {
    run("sample", {{"output", target}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
    EXPECT_NE(std::string(e.what()).find(target), std::string::npos) << e.what();
  }
}

TEST_F(CommandTest, DegradeNoiseVarianceOnConstantImage) {
  write_constant_pgm(path("c.pgm"), 128, 128, 128.0);
  ASSERT_EQ(run("degrade", {{"input", path("c.pgm")}, {"output", path("g.pgm")}, {"sigma", 40.0}}), 0);
  const auto g = io::read_image(path("g.pgm")).channels[0];
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= g.size();
  double var = 0.0;
  for (double v : g) var += (v - mean) * (v - mean);
  var /= g.size();
  EXPECT_NEAR(var, 1600.0, 0.05 * 1600.0);
  const Json side = json(path("g.pgm.json"));
  EXPECT_EQ(side["sigma"], 40.0);
  EXPECT_DOUBLE_EQ(side["beta_star"].get<double>(), 1.0 / 1600.0);
  EXPECT_EQ(side["inputs"][0]["sha256"], io::sha256_file(path("c.pgm")));
}

TEST_F(CommandTest, DegradeWithVanishingNoiseKeepsImage) {
  const std::string input = (kData / "cameraman_128.pgm").string();
  ASSERT_EQ(run("degrade", {{"input", input}, {"output", path("same.pgm")}, {"sigma", 1e-12}}), 0);
  const auto a = io::read_image(input).channels[0];
  const auto b = io::read_image(path("same.pgm")).channels[0];
  EXPECT_LE(mse(a, b), 1e-18);
}

TEST_F(CommandTest, DegradeRejectsNonSquare) {
  write_constant_pgm(path("wide.pgm"), 64, 32, 10.0);
  EXPECT_EQ(error_of("degrade", {{"input", path("wide.pgm")}, {"output", path("o.pgm")}}), ErrorCode::NonSquareImage);
}

TEST_F(CommandTest, EstimateReportsAtFullAndHalfWindow) {
  ASSERT_EQ(run("sample", {{"output", path("truth.pgm")}, {"size", 64}, {"alpha", 1.0}, {"gamma", 1e-3}}), 0);
  ASSERT_EQ(run("degrade", {{"input", path("truth.pgm")}, {"output", path("g.pgm")}, {"sigma", 10.0}}), 0);
  ASSERT_EQ(run("estimate", {{"input", path("g.pgm")}, {"output", path("full.json")}}), 0);
  ASSERT_EQ(run("estimate", {{"input", path("g.pgm")}, {"output", path("half.json")}, {"n", 32}}), 0);
  for (const auto& [name, n] : {std::pair{"full.json", 64}, {"half.json", 32}}) {
    const Json r = json(path(name));
    ASSERT_EQ(r["channels"].size(), 1u);
    const Json& c = r["channels"][0];
    for (const char* key : {"alpha", "beta", "gamma", "objective", "iterations", "converged", "n", "N"})
      EXPECT_TRUE(c.contains(key)) << key;
    EXPECT_EQ(c["n"], n);
    EXPECT_EQ(c["N"], 64);
    EXPECT_TRUE(r.contains("objective_note"));
    EXPECT_GT(c["beta"].get<double>(), 0.0);
  }
  // Noise precision is well identified at n = N: 1/sigma^2 = 0.01.
  EXPECT_NEAR(json(path("full.json"))["channels"][0]["beta"].get<double>(), 0.01, 0.002);
}

TEST_F(CommandTest, EstimateOnRgbIsPerChannel) {
  ASSERT_EQ(run("estimate", {{"input", (kData / "astronaut_128.png").string()}, {"output", path("rgb.json")},
                             {"shrink", 0.5}}),
            0);
  const Json r = json(path("rgb.json"));
  ASSERT_EQ(r["channels"].size(), 3u);
  EXPECT_EQ(r["channels"][1]["channel"], "green");
  EXPECT_EQ(r["channels"][1]["n"], 64);
}

TEST_F(CommandTest, EstimateErrors) {
  std::ofstream(path("bad.pgm"), std::ios::binary) << "P5\n64 ?\n255\n";
  try {
    run("estimate", {{"input", path("bad.pgm")}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
    EXPECT_NE(std::string(e.what()).find("byte offset 6"), std::string::npos) << e.what();
  }
  const std::string cam = (kData / "cameraman_128.pgm").string();
  EXPECT_EQ(error_of("estimate", {{"input", cam}, {"n", 64}, {"shrink", 0.5}}), ErrorCode::InvalidConfig);
  EXPECT_EQ(error_of("estimate", {{"input", cam}, {"n", 129}}), ErrorCode::InvalidConfig);
  EXPECT_EQ(error_of("estimate", {{"input", cam}, {"shrink", 1.0}}), ErrorCode::InvalidConfig);
}

TEST_F(CommandTest, DenoiseWithHugeBetaReturnsInput) {
  const std::string cam = (kData / "cameraman_128.pgm").string();
  ASSERT_EQ(run("denoise", {{"input", cam}, {"output", path("d.pgm")}, {"alpha", 1.0}, {"beta", 1e12}, {"gamma", 1.0}}),
            0);
  const auto a = io::read_image(cam).channels[0];
  const auto b = io::read_image(path("d.pgm")).channels[0];
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(std::abs(a[i] - b[i]), 1.0);
  const Json side = json(path("d.pgm.json"));
  EXPECT_EQ(side["channels"][0]["hyperparams"]["beta"], 1e12);
  EXPECT_TRUE(side["channels"][0]["gain"].contains("mean"));
}

TEST_F(CommandTest, EstimateThenDenoiseImprovesSnr) {
  const std::string cam = (kData / "cameraman_128.pgm").string();
  ASSERT_EQ(run("degrade", {{"input", cam}, {"output", path("noisy.pgm")}, {"sigma", 40.0}, {"seed", 3}}), 0);
  const auto clean = io::read_image(cam).channels[0];
  const auto noisy = io::read_image(path("noisy.pgm")).channels[0];
  for (int n : {128, 64}) {
    const std::string out = path("den" + std::to_string(n) + ".pgm");
    ASSERT_EQ(run("denoise", {{"input", path("noisy.pgm")}, {"output", out}, {"estimate_n", n}}), 0);
    const auto restored = io::read_image(out).channels[0];
    const double gain_db = 10.0 * std::log10(mse(noisy, clean) / mse(restored, clean));
    EXPECT_GT(gain_db, 0.0) << "estimate_n=" << n;
  }
}

TEST_F(CommandTest, DenoiseNeedsHyperparameters) {
  const std::string cam = (kData / "cameraman_128.pgm").string();
  EXPECT_EQ(error_of("denoise", {{"input", cam}, {"output", path("x.pgm")}}), ErrorCode::InvalidConfig);
  EXPECT_EQ(error_of("denoise", {{"input", cam}, {"output", path("x.pgm")}, {"alpha", 1.0}}), ErrorCode::InvalidConfig);
  EXPECT_EQ(error_of("denoise", {{"input", cam}, {"output", path("x.pgm")}, {"alpha", 1.0}, {"beta", 1.0},
                                 {"gamma", 1.0}, {"estimate_n", 64}}),
            ErrorCode::InvalidConfig);
}

TEST_F(CommandTest, SweepBaselineRowMatchesDirectFullWindowRun) {
  const std::string cam = (kData / "cameraman_128.pgm").string();
  ASSERT_EQ(run("sweep", {{"input", cam}, {"output", path("s.csv")}, {"fractions", {0.0, 0.5}}}), 0);
  const auto field = io::to_fields(io::read_image(cam)).front();
  const TrueModel tm(1.0 / 1600.0, PowerSpectrum::of(field));
  const auto r = estimate_expected(tm, LatticeSize(128));
  const auto risk = closed_form_risk(r.estimate, tm);
  const auto rows = app::run_sweep({field}, 40.0, {0.0, 0.5}, OptimizerConfig{}, false);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].n, 64);
  EXPECT_EQ(rows[1].n, 128);
  EXPECT_EQ(rows[1].shrink, 0.0);
  EXPECT_EQ(rows[1].alpha, r.estimate.alpha());
  EXPECT_EQ(rows[1].beta, r.estimate.beta());
  EXPECT_EQ(rows[1].gamma, r.estimate.gamma());
  EXPECT_EQ(rows[1].d_n, risk.d_n);
  EXPECT_EQ(rows[1].snr_db, snr_db(variance_of(field), risk.d_n));

  std::ifstream in(path("s.csv"), std::ios::binary);
  const std::string csv((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(csv, io::sweep_csv(rows));
}

TEST_F(CommandTest, SweepOnRgbWritesThreeRowsPerFraction) {
  const std::vector<double> fractions = {0.0, 0.25, 0.5};
  ASSERT_EQ(run("sweep", {{"input", (kData / "astronaut_128.png").string()},
                          {"output", path("rgb.csv")},
                          {"fractions", fractions},
                          {"svg", path("rgb.svg")}}),
            0);
  std::ifstream in(path("rgb.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1 + 3 * static_cast<int>(fractions.size()));
  EXPECT_TRUE(fs::exists(path("rgb.svg")));
  const Json side = json(path("rgb.csv.json"));
  EXPECT_TRUE(side["truth_variance"].contains("blue"));
}

TEST_F(CommandTest, SweepRejectsBadFractions) {
  const std::string cam = (kData / "cameraman_128.pgm").string();
  EXPECT_EQ(error_of("sweep", {{"input", cam}, {"output", path("s.csv")}, {"fractions", {1.0}}}),
            ErrorCode::InvalidConfig);
  EXPECT_EQ(error_of("sweep", {{"input", cam}, {"output", path("s.csv")}, {"fractions", Json::array()}}),
            ErrorCode::InvalidConfig);
}

TEST_F(CommandTest, ValidatePassesAndWritesReport) {
  ASSERT_EQ(run("validate", {{"output", path("v.json")}}), 0);
  const Json r = json(path("v.json"));
  EXPECT_TRUE(r["passed"].get<bool>());
  EXPECT_EQ(r["suites"].size(), 6u);
}

TEST(ValidationSuites, SignFlippedEigenvalueIsCaught) {
  // Mirror the eigenvalue about 4 so it stays a valid precision but is wrong.
  auto mutated = [](int k, int l, LatticeSize n) { return 8.0 - lattice_eigenvalue(k, l, n); };
  EXPECT_FALSE(validation::dense_oracle_suite(mutated).passed);
  EXPECT_TRUE(validation::dense_oracle_suite().passed);
}

TEST_F(CommandTest, RerunFromSidecarIsByteIdentical) {
  const std::string cam = (kData / "cameraman_128.pgm").string();
  struct Case {
    std::string command;
    Json flags;
    std::string output;
    std::string sidecar;
  };
  const std::vector<Case> cases = {
      {"sample", {{"output", path("s.pgm")}, {"size", 32}}, path("s.pgm"), path("s.pgm.json")},
      {"degrade", {{"input", cam}, {"output", path("g.pgm")}}, path("g.pgm"), path("g.pgm.json")},
      {"estimate", {{"input", cam}, {"output", path("e.json")}, {"n", 48}}, path("e.json"), path("e.json")},
      {"denoise", {{"input", cam}, {"output", path("d.pgm")}, {"estimate_n", 64}}, path("d.pgm"), path("d.pgm.json")},
      {"sweep", {{"input", cam}, {"output", path("w.csv")}, {"fractions", {0.0, 0.5}}}, path("w.csv"), path("w.csv.json")},
      {"validate", {{"output", path("v.json")}}, path("v.json"), path("v.json")},
  };
  for (const auto& c : cases) {
    ASSERT_EQ(run(c.command, c.flags), 0) << c.command;
    const auto first = bytes(c.output);
    const auto first_side = bytes(c.sidecar);
    const Json from_sidecar = io::load_config(c.sidecar, c.command);
    ASSERT_EQ(run(c.command, Json::object(), from_sidecar), 0) << c.command;
    EXPECT_EQ(bytes(c.output), first) << c.command;
    EXPECT_EQ(bytes(c.sidecar), first_side) << c.command;
  }
}
