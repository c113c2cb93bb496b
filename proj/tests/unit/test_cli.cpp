#include <doctest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "icsad/simulate.hpp"
#include "icsad/trace.hpp"
#include "test_support.hpp"

using namespace icsad;
namespace fs = std::filesystem;
using icsad::testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "icsad");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

// A trace file whose flow column is replaced by `flow`.
fs::path write_custom_trace(const fs::path& dir, const std::vector<double>& flow) {
  Trace t = simulate(PlantConfig{}, static_cast<double>(flow.size()) / 2.0);
  t.flow = flow;
  const auto path = dir / "custom.csv";
  save(t, path);
  return path;
}

Result simulate_canonical(const fs::path& out, const std::string& seed = "42") {
  return run({"simulate", "--scenario", "canonical", "--attacked-plc", "3", "--duration", "3600",
              "--seed", seed, "--out", out.string()});
}

}  // namespace

TEST_CASE("simulate canonical writes five traces with plc3 attacked") {
  TempDir dir("cli");
  const auto r = simulate_canonical(dir.path() / "run");
  REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
  CHECK(r.out.find("seed: 42") != std::string::npos);
  for (int k = 1; k <= 5; ++k) {
    const Trace t = load(dir.path() / "run" / ("plc" + std::to_string(k) + ".csv"));
    CHECK(t.size() == 7200);
    const bool attacked = std::any_of(t.labels.begin(), t.labels.end(),
                                      [](Label l) { return l != Label::Normal; });
    CHECK(attacked == (k == 3));
  }
  const auto manifest = read_json(dir.path() / "run" / "manifest.json");
  CHECK(manifest["run"]["attacked_plc"] == 3);
  CHECK(manifest["traces"].size() == 5);
}

TEST_CASE("simulate without a scenario gives an all-normal fleet") {
  TempDir dir("cli");
  REQUIRE(run({"simulate", "--duration", "600", "--out", (dir.path() / "run").string()}).code ==
          cli::kOk);
  for (int k = 1; k <= 5; ++k) {
    const Trace t = load(dir.path() / "run" / ("plc" + std::to_string(k) + ".csv"));
    CHECK(std::all_of(t.labels.begin(), t.labels.end(), [](Label l) { return l == Label::Normal; }));
  }
}

TEST_CASE("same flags and seed give byte-identical CSVs") {
  TempDir dir("cli");
  REQUIRE(simulate_canonical(dir.path() / "a", "9").code == cli::kOk);
  REQUIRE(simulate_canonical(dir.path() / "b", "9").code == cli::kOk);
  for (int k = 1; k <= 5; ++k) {
    const std::string name = "plc" + std::to_string(k) + ".csv";
    CHECK(slurp(dir.path() / "a" / name) == slurp(dir.path() / "b" / name));
  }
  REQUIRE(simulate_canonical(dir.path() / "c", "10").code == cli::kOk);
  CHECK(slurp(dir.path() / "a" / "plc1.csv") != slurp(dir.path() / "c" / "plc1.csv"));
}

TEST_CASE("detect mp on a canonical run") {
  TempDir dir("cli");
  const auto run_dir = dir.path() / "run";
  REQUIRE(simulate_canonical(run_dir).code == cli::kOk);

  SUBCASE("fixed window finds both attacks") {
    const auto r = run({"detect", "--run", run_dir.string(), "--method", "mp", "--window", "300"});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    CHECK(r.out.find("window: 300 (fixed)") != std::string::npos);
    const auto report = read_json(run_dir / "detect" / "report_mp.json");
    CHECK(report["summary"]["detected"] == 2);
    CHECK(fs::exists(run_dir / "detect" / "plot_mp.csv"));
    CHECK(fs::exists(run_dir / "detect" / "report_mp.txt"));
  }
  SUBCASE("automatic window is about 300") {
    const auto r = run({"detect", "--run", run_dir.string(), "--method", "mp", "--svg"});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    const auto manifest = read_json(run_dir / "detect" / "detect_manifest.json");
    const int window = manifest["window"].get<int>();
    CHECK(std::abs(window - 300) <= 2);
    CHECK(r.out.find("(autocorrelation)") != std::string::npos);
    CHECK(fs::exists(run_dir / "detect" / "plot_mp.svg"));
  }
  SUBCASE("eval re-thresholds the plot data") {
    REQUIRE(run({"detect", "--run", run_dir.string(), "--method", "mp", "--window", "300"}).code ==
            cli::kOk);
    const auto out = dir.path() / "eval.json";
    const auto r = run({"eval", "--plot", (run_dir / "detect" / "plot_mp.csv").string(),
                        "--window", "300", "--out", out.string()});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    CHECK(read_json(out)["summary"]["detected"] == 2);
    const auto svg = dir.path() / "p.svg";
    CHECK(run({"plot", "--plot", (run_dir / "detect" / "plot_mp.csv").string(), "--out",
               svg.string()}).code == cli::kOk);
    CHECK(slurp(svg).find("<svg") != std::string::npos);
  }
}

TEST_CASE("detect lstm with a small network produces a report") {
  TempDir dir("cli");
  REQUIRE(run({"simulate", "--duration", "600", "--out", (dir.path() / "normal").string()}).code ==
          cli::kOk);
  REQUIRE(run({"simulate", "--duration", "600", "--scenario", "canonical", "--out",
               (dir.path() / "attacked").string(), "--set", "rng_seed=5"})
              .code == cli::kUsage);  // canonical needs 7200 frames
  AttackScript script{{AttackDirective::open_valve(700, 900)}};
  Trace attacked = simulate(PlantConfig{}, 600.0, &script, 3);
  save(attacked, dir.path() / "attacked.csv");
  const auto model = dir.path() / "model.json";
  const std::vector<std::string> common{
      "detect", "--method", "lstm", "--train", (dir.path() / "normal" / "plc3.csv").string(),
      "--test", (dir.path() / "attacked.csv").string(), "--layers", "6", "--input-len", "20",
      "--epochs", "2", "--stride", "10", "--out", (dir.path() / "det").string()};
  auto args = common;
  args.insert(args.end(), {"--model-out", model.string()});
  const auto r = run(args);
  REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
  const auto report = read_json(dir.path() / "det" / "report_lstm.json");
  CHECK(report["detector"] == "lstm");
  CHECK(report["matched_attacks"].size() == 1);
  CHECK(fs::exists(model));

  const auto first = slurp(dir.path() / "det" / "report_lstm.json");
  const auto again = run({"detect", "--method", "lstm", "--test",
                          (dir.path() / "attacked.csv").string(), "--model-in", model.string(),
                          "--out", (dir.path() / "det2").string()});
  REQUIRE_MESSAGE(again.code == cli::kOk, again.err);
  CHECK(slurp(dir.path() / "det2" / "report_lstm.json") == first);
}

TEST_CASE("acf subcommand") {
  TempDir dir("cli");
  SUBCASE("canonical normal trace") {
    REQUIRE(run({"simulate", "--duration", "3600", "--out", (dir.path() / "run").string()}).code ==
            cli::kOk);
    const auto r = run({"acf", "--run", (dir.path() / "run").string(), "--plc", "1"});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    CHECK(r.out.find("period: 150") != std::string::npos);
    CHECK(r.out.find("window: 300") != std::string::npos);
  }
  SUBCASE("sine with a period of 100 samples is 50 s") {
    const auto path = write_custom_trace(dir.path(), icsad::testing::sine(2000, 100.0));
    const auto r = run({"acf", "--trace", path.string()});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    CHECK(r.out.find("period: 50") != std::string::npos);
    CHECK(r.out.find("(100 samples)") != std::string::npos);
  }
  SUBCASE("white noise has no period") {
    const auto path = write_custom_trace(dir.path(), icsad::testing::white_noise(2000, 3));
    const auto r = run({"acf", "--trace", path.string()});
    CHECK(r.code == cli::kDetectorFailure);
    CHECK_FALSE(r.err.empty());
  }
}

TEST_CASE("error exit codes") {
  TempDir dir("cli");
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"simulate", "--duration", "-5"}).code == cli::kUsage);
  CHECK(run({"simulate", "--scenario", "chaos"}).code == cli::kUsage);
  CHECK(run({"simulate", "--set", "pump_rate_lps=0.01", "--duration", "600", "--out",
             (dir.path() / "x").string()}).code == cli::kUsage);
  CHECK(run({"detect", "--method", "mp"}).code == cli::kUsage);
  CHECK(run({"detect", "--trace", (dir.path() / "missing.csv").string()}).code == cli::kDataError);
  CHECK(run({"detect", "--run", (dir.path() / "nope").string()}).code == cli::kDataError);
  REQUIRE(run({"simulate", "--duration", "600", "--out", (dir.path() / "run").string()}).code ==
          cli::kOk);
  CHECK(run({"detect", "--run", (dir.path() / "run").string(), "--plc", "1", "--channels",
             "bogus", "--window", "300"}).code == cli::kDataError);
  CHECK(run({"detect", "--run", (dir.path() / "run").string(), "--plc", "1", "--channels", "temp",
             "--window", "5000"}).code == cli::kUsage);
}
