#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seqfdr/cli.hpp"

using namespace seqfdr;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / ("seqfdr_cli_" + std::to_string(::getpid()));

struct Run {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  fs::create_directories(kWork);
  const auto o = kWork / "stdout.txt", e = kWork / "stderr.txt";
  const std::string cmd = std::string("\"") + SEQFDR_CLI_PATH + "\" " + args + " >\"" + o.string() +
                          "\" 2>\"" + e.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

fs::path write_file(const std::string& name, const std::string& text) {
  fs::create_directories(kWork);
  const auto p = kWork / name;
  std::ofstream(p) << text;
  return p;
}

std::string config_error(const json& j) {
  try {
    cli::simulation_config_from_json(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("exit codes and digests") {
  CHECK(cli::exit_code(ErrorKind::Config) == 2);
  CHECK(cli::exit_code(ErrorKind::Domain) == 2);
  CHECK(cli::exit_code(ErrorKind::Data) == 3);
  CHECK(cli::exit_code(ErrorKind::Numerical) == 4);
  CHECK(cli::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(cli::fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("simulation config parsing") {
  const json base = {{"m0", 5}, {"seed", 9}};
  const auto c = cli::simulation_config_from_json(base);
  CHECK(c.J == 10);
  CHECK(c.m0 == 5);
  CHECK(c.seed == 9);
  CHECK(c.copula_rho == -0.6);
  CHECK(c.null_param == 0.05);

  auto pois = base;
  pois["family"] = "poisson";
  const auto p = cli::simulation_config_from_json(pois);
  CHECK(p.family == Family::Poisson);
  CHECK(p.null_param == 1.5);
  CHECK(p.alt_param == 2.0);

  // Round trip through the resolved form.
  const auto back = cli::simulation_config_from_json(cli::to_json(p));
  CHECK(cli::to_json(back) == cli::to_json(p));

  auto j = base;
  j["reps"] = 0;
  CHECK(config_error(j) == "reps");
  j = base;
  j.erase("seed");
  CHECK(config_error(j) == "seed");
  j = base;
  j["mode"] = "closed";
  CHECK(config_error(j) == "mode");
  j = base;
  j["rho"] = "high";
  CHECK(config_error(j) == "rho");
  j = base;
  j["colour"] = 1;
  CHECK(config_error(j) == "colour");
  CHECK(config_error(json::array()) != "<none>");

  const json f = {{"m0", 5}, {"seed", 1}};
  try {
    cli::fss_config_from_json(f);
    FAIL("target_fnr is required");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "target_fnr");
  }
  auto g = f;
  g["target_fnr"] = 0.03;
  CHECK(cli::fss_config_from_json(g).target_fnr == 0.03);
}

TEST_CASE("bounds command") {
  const auto r = run("bounds --scheme bh --q 0.25 --J 10");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("m,D\n", 0) == 0);
  CHECK(r.out.find("# D(alpha)") != std::string::npos);
  const auto toy = run("bounds --scheme bh --q 0.25 --J 2");
  CHECK(toy.code == 0);
  CHECK(toy.out.find("1,0.1875") != std::string::npos);
  CHECK(toy.out.find("2,0.25") != std::string::npos);
  CHECK(run("bounds --scheme bh --q 1.5 --J 10").code == 2);
  CHECK(run("bounds --scheme xx --q 0.2 --J 10").code == 2);
  CHECK(run("no-such-command").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("verify-lp command") {
  const auto r = run("verify-lp --j-min 2 --j-max 3 --schemes bh");
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("2,0,bh,0,0,0,pass") != std::string::npos);
  CHECK(run("verify-lp --j-max 6").code == 2);
}

TEST_CASE("simulate is byte-reproducible") {
  const auto cfg = write_file("sim.json", R"({"J": 4, "m0": 2, "reps": 200, "seed": 5, "write_trials": true})");
  const auto a = kWork / "a", b = kWork / "b";
  const auto ra = run("simulate --config \"" + cfg.string() + "\" --workers 1 --out \"" + a.string() + "\"");
  const auto rb = run("simulate --config \"" + cfg.string() + "\" --workers 3 --out \"" + b.string() + "\"");
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  for (const char* f : {"metrics.csv", "metrics.json", "trials.csv", "manifest.json"}) {
    CAPTURE(f);
    CHECK(!slurp(a / f).empty());
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(fs::exists(a / "timings.json"));
  const auto manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["seed"] == 5);
  CHECK(json::parse(slurp(a / "metrics.json"))["manifest"] == "manifest.json");

  const auto bad = write_file("bad.json", R"({"J": 4, "m0": 2, "reps": 0, "seed": 5})");
  const auto rbad = run("simulate --config \"" + bad.string() + "\" --out \"" + (kWork / "c").string() + "\"");
  CHECK(rbad.code == 2);
  CHECK(rbad.err.find("reps") != std::string::npos);
  CHECK(run("simulate --config /nonexistent.json").code == 2);
}

TEST_CASE("fss command") {
  const auto cfg = write_file("fss.json", R"({"J": 4, "m0": 2, "reps": 200, "seed": 5, "target_fnr": 1.0})");
  const auto r = run("fss --config \"" + cfg.string() + "\" --out \"" + (kWork / "f").string() + "\"");
  CHECK(r.code == 0);
  CHECK(r.out.find("n_fss=1") != std::string::npos);
}

TEST_CASE("yellowcard command") {
  const std::string fixture = std::string(SEQFDR_FIXTURES_DIR) + "/yellowcard_drugs.csv";
  const auto a = kWork / "ya", b = kWork / "yb";
  CHECK(run("yellowcard --csv \"" + fixture + "\" --seed 7 --out \"" + a.string() + "\"").code == 0);
  CHECK(run("yellowcard --csv \"" + fixture + "\" --seed 7 --out \"" + b.string() + "\"").code == 0);
  const auto decisions = slurp(a / "yellowcard_decisions.csv");
  CHECK(decisions == slurp(b / "yellowcard_decisions.csv"));
  CHECK(slurp(a / "yellowcard_run.json") == slurp(b / "yellowcard_run.json"));
  std::size_t lines = 0;
  for (char c : decisions) lines += c == '\n';
  CHECK(lines == 121);

  const auto bad = write_file("bad.csv", "name,amnesia_count,other_count,years,cluster\nA,1,2,3,1\nB,1,two,3,1\n");
  const auto r = run("yellowcard --csv \"" + bad.string() + "\" --seed 1 --out \"" + (kWork / "yc").string() + "\"");
  CHECK(r.code == 3);
  CHECK(r.err.find(":3:") != std::string::npos);
  CHECK(run("yellowcard --csv \"" + fixture + "\" --out \"" + (kWork / "yd").string() + "\"").code == 2);
}

TEST_CASE("cleanup") { fs::remove_all(kWork); }
