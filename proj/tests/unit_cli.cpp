#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "chronos/cli.hpp"
#include "chronos/corpus.hpp"

using namespace chronos;
using nlohmann::json;

namespace {

struct Captured {
  int exit_code;
  std::string out;
  std::string err;
};

Captured run(const cli::RunConfig& cfg) {
  std::ostringstream out, err;
  const int code = cli::run_command(cfg, out, err);
  return {code, out.str(), err.str()};
}

Captured check(const cli::RunConfig& cfg) {
  std::ostringstream out, err;
  const int code = cli::check_command(cfg, out, err);
  return {code, out.str(), err.str()};
}

std::string strip_timing(const std::string& text) {
  static const std::regex timing("\"timing_us\": [0-9]+");
  return std::regex_replace(text, timing, "\"timing_us\": 0");
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& text) {
    path = std::string(std::tmpnam(nullptr)) + ".chs";
    std::ofstream(path) << text;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

const char* kInconsistentDemo =
    "# three spin frames in a row are not a consistent family\n"
    "space dim 2;\n"
    "ket zp = [1,0]; ket zm = [0,1];\n"
    "ket xp = 1/sqrt(2)*(zp + zm); ket xm = 1/sqrt(2)*(zp - zm);\n"
    "proj Zp = dyad(zp); proj Zm = dyad(zm); proj Xp = dyad(xp); proj Xm = dyad(xm);\n"
    "times t0 t1 t2;\n"
    "evolve identity;\n"
    "framework zxz expect inconsistent =\n"
    "  { Zp@t0 + Zm@t0 } { Xp@t1 + Xm@t1 } { Zp@t2 + Zm@t2 };\n";

}  // namespace

TEST_CASE("corpus list: five entries with stable ids") {
  std::ostringstream out;
  CHECK(cli::corpus_list_command(true, out) == cli::kExitOk);
  const json j = json::parse(out.str());
  CHECK(j["schema_version"] == 1);
  REQUIRE(j["corpus"].size() == 5);
  std::vector<std::string> ids;
  for (const auto& e : j["corpus"]) {
    ids.push_back(e["id"]);
    CHECK_FALSE(std::string(e["description"]).empty());
  }
  CHECK(ids == std::vector<std::string>{"spin-half", "oscillator", "spin-measurement",
                                        "spin-measurement-mixed", "three-state"});

  std::ostringstream text;
  cli::corpus_list_command(false, text);
  CHECK(text.str().find("corpus:three-state") != std::string::npos);
}

TEST_CASE("run: three-state verdicts over JSON") {
  cli::RunConfig cfg;
  cfg.input = "corpus:three-state";
  cfg.json = true;
  const Captured got = run(cfg);
  CHECK(got.exit_code == cli::kExitOk);
  const json j = json::parse(got.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["mode"] == "strong");
  REQUIRE(j["results"].size() == 3);
  CHECK(j["results"][0]["id"] == "certainly_a");
  CHECK(j["results"][0]["verdict"] == "true");
  CHECK(double(j["results"][0]["probability"]) == doctest::Approx(1.0));
  CHECK(j["results"][1]["verdict"] == "true");
  CHECK(j["results"][2]["id"] == "joint_ab");
  CHECK(j["results"][2]["verdict"] == "meaningless");
  CHECK_FALSE(j["results"][2].contains("probability"));
  CHECK(j["results"][2]["framework"]["consistent"] == false);
}

TEST_CASE("run: JSON output is byte-stable apart from timing") {
  cli::RunConfig cfg;
  cfg.input = "corpus:spin-measurement";
  cfg.json = true;
  const Captured a = run(cfg);
  const Captured b = run(cfg);
  CHECK(a.exit_code == cli::kExitOk);
  CHECK(strip_timing(a.out) == strip_timing(b.out));
  CHECK(a.out.find("\"timing_us\"") != std::string::npos);
}

TEST_CASE("run: exit codes follow the documented mapping") {
  // 0: a clean run
  cli::RunConfig ok;
  ok.input = "corpus:spin-half";
  CHECK(run(ok).exit_code == cli::kExitOk);

  // 1: unreadable input
  cli::RunConfig missing;
  missing.input = "/nonexistent/path.chs";
  const Captured io = run(missing);
  CHECK(io.exit_code == cli::kExitError);
  CHECK(io.err.find("IoError") != std::string::npos);

  // 1: parse error with a line number on stderr
  TempFile bad("space dim 2;\nket zp = [1, 0;\n");
  cli::RunConfig parse_err;
  parse_err.input = bad.path;
  const Captured pe = run(parse_err);
  CHECK(pe.exit_code == cli::kExitError);
  CHECK(pe.err.find("SyntaxError") != std::string::npos);
  CHECK(pe.err.find("line 2") != std::string::npos);

  // 2: mutually incompatible initial data
  TempFile incompatible(
      "space dim 2;\n"
      "ket zp = [1,0]; ket zm = [0,1];\n"
      "ket xp = 1/sqrt(2)*(zp + zm); ket xm = 1/sqrt(2)*(zp - zm);\n"
      "proj Zp = dyad(zp); proj Zm = dyad(zm); proj Xp = dyad(xp); proj Xm = dyad(xm);\n"
      "times t0;\n"
      "framework Z = Zp@t0 + Zm@t0;\n"
      "framework X = Xp@t0 + Xm@t0;\n"
      "assume Z : Zp@t0;\n"
      "assume X : Xp@t0;\n"
      "query q : Zp@t0;\n");
  cli::RunConfig data_err;
  data_err.input = incompatible.path;
  data_err.json = true;
  const Captured de = run(data_err);
  CHECK(de.exit_code == cli::kExitDataInconsistent);
  const json j = json::parse(de.out);
  CHECK(j["results"][0]["verdict"] == "data-inconsistent");
}

TEST_CASE("run: an empty query list yields an empty results array") {
  TempFile empty("space dim 2; ket zp = [1,0]; proj Zp = dyad(zp); times t0;\n");
  cli::RunConfig cfg;
  cfg.input = empty.path;
  cfg.json = true;
  const Captured got = run(cfg);
  CHECK(got.exit_code == cli::kExitOk);
  const json j = json::parse(got.out);
  CHECK(j["results"].is_array());
  CHECK(j["results"].empty());
}

TEST_CASE("check: measurement corpus families are all consistent") {
  cli::RunConfig cfg;
  cfg.input = "corpus:spin-measurement";
  cfg.json = true;
  const Captured got = check(cfg);
  CHECK(got.exit_code == cli::kExitOk);
  const json j = json::parse(got.out);
  REQUIRE(j["frameworks"].size() == 7);
  for (const auto& f : j["frameworks"]) {
    CHECK(f["consistent"] == true);
    CHECK(double(f["worst_magnitude"]) <= double(f["bound"]));
  }
}

TEST_CASE("check: the inconsistent demo reports the 1/4 witness") {
  TempFile demo(kInconsistentDemo);
  cli::RunConfig cfg;
  cfg.input = demo.path;
  cfg.json = true;
  const Captured got = check(cfg);
  CHECK(got.exit_code == cli::kExitOk);
  const json j = json::parse(got.out);
  REQUIRE(j["frameworks"].size() == 1);
  CHECK(j["frameworks"][0]["consistent"] == false);
  CHECK(double(j["frameworks"][0]["worst_magnitude"]) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(j["frameworks"][0]["expected_inconsistent"] == true);

  std::ostringstream out, err;
  cli::RunConfig text_cfg = cfg;
  text_cfg.json = false;
  cli::check_command(text_cfg, out, err);
  CHECK(out.str().find("INCONSISTENT") != std::string::npos);
}

TEST_CASE("run: weak mode accepts the weakly-but-not-strongly consistent family") {
  // K1 = i/2 * something real-orthogonal: build a family whose off-diagonal
  // inner product is purely imaginary, passing weak mode and failing strong.
  TempFile weakonly(
      "space dim 2;\n"
      "ket zp = [1,0]; ket zm = [0,1];\n"
      "ket yp = 1/sqrt(2)*(zp + 1i*zm); ket ym = 1/sqrt(2)*(zp - 1i*zm);\n"
      "ket xp = 1/sqrt(2)*(zp + zm); ket xm = 1/sqrt(2)*(zp - zm);\n"
      "proj Zp = dyad(zp); proj Zm = dyad(zm);\n"
      "proj Yp = dyad(yp); proj Ym = dyad(ym);\n"
      "proj Xp = dyad(xp); proj Xm = dyad(xm);\n"
      "times t0 t1 t2;\n"
      "evolve identity;\n"
      "framework f expect inconsistent =\n"
      "  { Zp@t0 + Zm@t0 } { Yp@t1 + Ym@t1 } { Xp@t2 + Xm@t2 };\n");
  cli::RunConfig strong_cfg;
  strong_cfg.input = weakonly.path;
  strong_cfg.json = true;
  const json strong = json::parse(check(strong_cfg).out);
  CHECK(strong["frameworks"][0]["consistent"] == false);

  cli::RunConfig weak_cfg = strong_cfg;
  weak_cfg.mode = ConsistencyMode::Weak;
  const json weak = json::parse(check(weak_cfg).out);
  CHECK(weak["frameworks"][0]["consistent"] == true);
}

TEST_CASE("run: rho mode needs its density matrix") {
  cli::RunConfig cfg;
  cfg.input = "corpus:spin-half";
  cfg.mode = ConsistencyMode::Rho;
  const Captured missing = run(cfg);
  CHECK(missing.exit_code == cli::kExitError);
  CHECK(missing.err.find("NotDensityMatrix") != std::string::npos);

  cfg.rho_name = "Zp";
  const Captured ok = run(cfg);
  CHECK(ok.exit_code == cli::kExitOk);
}
