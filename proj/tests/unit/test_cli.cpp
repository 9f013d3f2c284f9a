#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;  // stdout and stderr
};

Result sh(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + " " + SOLITON_FORGE_BIN + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  const fs::path dir = fs::current_path() / "cli_scratch";
  fs::create_directories(dir);
  return dir;
}

fs::path write_measure(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

std::vector<std::pair<double, double>> read_csv(const std::string& text) {
  std::vector<std::pair<double, double>> rows;
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "x,q");
  while (std::getline(ss, line)) {
    const auto comma = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return rows;
}

const std::string kAtom = R"({"name": "atom", "atoms": [{"kappa": 1, "weight": 2}]})";

}  // namespace

TEST_CASE("gas: single atom") {
  const auto m = write_measure("atom.json", kAtom);
  const auto out = scratch() / "atom.csv";
  const auto r = sh("gas --measure " + m.string() + " --xmin -5 --xmax 5 --nx 201 --t 0 --out " + out.string());
  CHECK(r.code == 0);
  const auto text = slurp(out);
  CHECK(text.find('\r') == std::string::npos);
  const auto rows = read_csv(text);
  REQUIRE(rows.size() == 201);
  CHECK(rows[100].first == 0.0);
  CHECK(std::abs(rows[100].second + 2.0) < 1e-10);
}

TEST_CASE("gas: empty measure gives zeros") {
  const auto m = write_measure("empty.json", R"({"name": "empty"})");
  const auto r = sh("gas --measure " + m.string() + " --nx 11");
  CHECK(r.code == 0);
  const auto rows = read_csv(r.output);
  CHECK(rows.size() == 11);
  for (const auto& [x, q] : rows) CHECK(q == 0.0);
}

TEST_CASE("gas: signed atom reports the pole and exits 3") {
  const auto m = write_measure("pole.json", R"({"name": "pole", "atoms": [{"kappa": 0.5, "weight": -1}]})");
  const auto out = scratch() / "pole.csv";
  const auto r = sh("gas --measure " + m.string() + " --xmin 0 --xmax 2 --nx 201 --t 1 --out " + out.string());
  CHECK(r.code == 3);
  CHECK(r.output.find("pole near x=1") != std::string::npos);
  CHECK(fs::exists(out));
  CHECK(slurp(out).find("nan") != std::string::npos);
}

TEST_CASE("malformed measures exit 2 naming the field") {
  const auto bad = write_measure("bad.json", R"({"atoms": [{"kappa": 1}]})");
  const auto r = sh("gas --measure " + bad.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("atoms[0].weight") != std::string::npos);

  const auto broken = write_measure("broken.json", "{");
  CHECK(sh("gas --measure " + broken.string()).code == 2);
  CHECK(sh("gas --measure " + (scratch() / "missing.json").string()).code == 2);
  CHECK(sh("gas --measure " + write_measure("a.json", kAtom).string() + " --nx 1").code == 2);
  CHECK(sh("gas --measure " + write_measure("a.json", kAtom).string() + " --t abc").code == 2);
  CHECK(sh("gas").code == 2);
  CHECK(sh("frobnicate").code == 2);
  CHECK(sh("--help").code == 0);
}

TEST_CASE("overflow is a numeric failure") {
  const auto m = write_measure("atom.json", kAtom);
  // the whole grid lies beyond the exponent guard
  CHECK(sh("gas --measure " + m.string() + " --xmin -1000 --xmax -900 --nx 11").code == 3);
}

TEST_CASE("multi-time runs write one file per time") {
  const auto m = write_measure("atom.json", kAtom);
  const auto out = scratch() / "multi.csv";
  CHECK(sh("gas --measure " + m.string() + " --t 0,0.5 --nx 21 --out " + out.string()).code == 0);
  CHECK(fs::exists(scratch() / "multi_t0.csv"));
  CHECK(fs::exists(scratch() / "multi_t0.5.csv"));
  CHECK(sh("gas --measure " + m.string() + " --t 0,0.5 --nx 21").code == 2);
}

TEST_CASE("output is deterministic across thread counts") {
  const auto m = write_measure("mix.json", R"({"name": "mix", "atoms": [{"kappa": 1.2, "weight": 0.7}],
    "densities": [{"form": "condensate", "support": [0, 1], "params": {"h": 1}}]})");
  const auto a = scratch() / "det_a.csv", b = scratch() / "det_b.csv", c = scratch() / "det_c.csv";
  const std::string args = "gas --measure " + m.string() + " --xmin -10 --xmax 10 --nx 101 --t 0.2 --out ";
  CHECK(sh(args + a.string(), "SOLITON_FORGE_THREADS=1").code == 0);
  CHECK(sh(args + b.string(), "SOLITON_FORGE_THREADS=3").code == 0);
  CHECK(sh(args + c.string(), "SOLITON_FORGE_THREADS=0").code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) == slurp(c));
}

TEST_CASE("solitons subcommand matches gas on atoms") {
  const auto m = write_measure("atom.json", kAtom);
  const auto g = sh("gas --measure " + m.string() + " --nx 41 --t 0.3");
  const auto s = sh("solitons --atoms 1:2 --nx 41 --t 0.3");
  CHECK(g.code == 0);
  CHECK(s.code == 0);
  const auto rg = read_csv(g.output), rs = read_csv(s.output);
  REQUIRE(rg.size() == rs.size());
  for (std::size_t j = 0; j < rg.size(); ++j) CHECK(std::abs(rg[j].second - rs[j].second) < 1e-12);
  CHECK(sh("solitons --atoms 1-2").code == 2);
}

TEST_CASE("condensate levels") {
  const auto out = scratch() / "cond.csv", rep = scratch() / "cond.json";
  const auto r =
      sh("condensate --h 1 --xmin -40 --xmax 40 --nx 801 --out " + out.string() + " --report " + rep.string());
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(rep));
  const auto& lv = j["levels"][0];
  CHECK(std::abs(lv["left_level"].get<double>() + 1.0) < 5e-2);
  CHECK(std::abs(lv["right_level"].get<double>()) < 1e-4);
  CHECK(read_csv(slurp(out)).size() == 801);
}

TEST_CASE("darboux against kay-moses passes verification") {
  const auto m = write_measure("atom.json", kAtom);
  const auto rep = scratch() / "darboux.json";
  const auto r = sh("verify --target darboux --seed zero --measure " + m.string() + " --nx 101 --out " + rep.string());
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(rep));
  REQUIRE(j["checks"].size() == 2);
  for (const auto& c : j["checks"]) {
    CHECK(c["pass"].get<bool>());
    CHECK(c.contains("name"));
    CHECK(c.contains("value"));
    CHECK(c.contains("tolerance"));
  }
  CHECK(j["config_echo"]["target"] == "darboux");

  const auto d = sh("darboux --measure " + m.string() + " --nx 21 --t 0");
  CHECK(d.code == 0);
  const auto rows = read_csv(d.output);
  CHECK(std::abs(rows[10].second + 2.0) < 1e-8);
}

TEST_CASE("verify with an impossible tolerance exits 4") {
  const auto m = write_measure("atom.json", kAtom);
  const auto r = sh("verify --target gas --measure " + m.string() + " --checks residual --tol residual=1e-15 --t 0.1");
  CHECK(r.code == 4);
  const auto j = nlohmann::json::parse(r.output);
  CHECK_FALSE(j["checks"][0]["pass"].get<bool>());
  CHECK(j["checks"][0]["tolerance"].get<double>() == 1e-15);

  const auto ok = sh("verify --target gas --measure " + m.string() + " --checks residual,bounds --t 0.1");
  CHECK(ok.code == 0);
  CHECK(sh("verify --target gas --measure " + m.string() + " --tol nonsense=1").code == 2);
  CHECK(sh("verify --target nowhere").code == 2);
}

TEST_CASE("verify spectrum on three solitons") {
  const auto r = sh("verify --target solitons --atoms 0.5:1,1:1,1.5:1 --checks spectrum --xmin -30 --xmax 30");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j["checks"][0]["note"] == "count=3");
}
