#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

const std::string kCli = TOBITLS_CLI_PATH;
const std::string kConfigs = TOBITLS_CONFIG_DIR;

struct Run {
  int code;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("tobitls_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch() / ("stdout_" + std::to_string(counter++));
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

// Small dataset: 30 rows, threshold 0, roughly a quarter censored.
fs::path dataset() {
  std::ostringstream s;
  s << "y,censored,x1,x2\n";
  for (int i = 0; i < 30; ++i) {
    const double x1 = (i % 7) / 7.0, x2 = ((i * 5) % 11) / 11.0;
    double y = 0.3 + 0.8 * x1 - 0.4 * x2 + 0.5 * std::sin(1.7 * i);
    const bool c = y <= 0.2;
    if (c) y = 0.2;
    s << y << "," << (c ? 1 : 0) << "," << x1 << "," << x2 << "\n";
  }
  return write_file("data.csv", s.str());
}

}  // namespace

TEST_CASE("fit emits JSON with estimates and echoes its configuration") {
  const auto data = dataset().string();
  const Run r = run("fit " + data + " --family normal --gamma 0.2");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.contains("config"));
  CHECK(j.at("config").at("family") == "normal");
  CHECK(j.at("fit").contains("loglik"));
  CHECK(j.at("fit").contains("aic"));
  const Run csv = run("--format csv fit " + data + " --family student-t --xi 4 --gamma 0.2");
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("# config:", 0) == 0);
  CHECK(csv.out.find("name,estimate,se,fixed") != std::string::npos);
}

TEST_CASE("usage errors exit with status 2") {
  const auto bad = write_file("bad.csv", "y,x\n1,2\n3,4\n");
  CHECK(run("fit " + bad.string()).code == 2);
  const auto data = dataset().string();
  CHECK(run("test " + data + " --restrict nosuch=0").code == 2);
  CHECK(run("fit " + data + " --family nosuch").code == 2);
  CHECK(run("--format xml fit " + data).code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("test subcommand reports both statistics") {
  const auto data = dataset().string();
  const Run both = run("test " + data + " --gamma 0.2 --restrict x2=0");
  REQUIRE(both.code == 0);
  const auto j = nlohmann::json::parse(both.out);
  REQUIRE(j.at("tests").size() == 2);
  CHECK(j.at("tests")[0].at("kind") == "LR");
  CHECK(j.at("tests")[1].at("kind") == "GR");
  CHECK(j.at("tests")[0].at("df") == 1);
  const Run lr = run("test " + data + " --gamma 0.2 --restrict x1=0.8,x2=0 --kind lr");
  REQUIRE(lr.code == 0);
  const auto jl = nlohmann::json::parse(lr.out);
  CHECK(jl.at("tests").size() == 1);
  CHECK(jl.at("tests")[0].at("df") == 2);
}

TEST_CASE("residuals and envelope") {
  const auto data = dataset().string();
  const Run r = run("residuals " + data + " --gamma 0.2");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("# ks_statistic") != std::string::npos);
  CHECK(r.out.find("index,residual,censored,theoretical_q,lower,median,upper") != std::string::npos);
  const Run e1 = run("--seed 4 envelope " + data + " --gamma 0.2 --replications 20");
  const Run e2 = run("--seed 4 --threads 3 envelope " + data + " --gamma 0.2 --replications 20");
  REQUIRE(e1.code == 0);
  CHECK(e1.out.substr(e1.out.find('\n')) == e2.out.substr(e2.out.find('\n')));
}

TEST_CASE("sample is reproducible") {
  const Run a = run("--seed 11 sample --family power-exponential --xi 0.5 --eta 2 --phi 0.5 -n 50");
  const Run b = run("--seed 11 sample --family power-exponential --xi 0.5 --eta 2 --phi 0.5 -n 50");
  const Run c = run("--seed 12 sample --family power-exponential --xi 0.5 --eta 2 --phi 0.5 -n 50");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  CHECK(run("sample --family normal --phi -1").code == 2);
}

TEST_CASE("shipped study configs") {
  const Run r = run("--format csv simulate --study bias-mse " + kConfigs + "/table2.json --replications 2");
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  // Header plus 4 n x 3 phi x 2 rho x 3 parameters.
  CHECK(rows == 1 + 72);
  const Run table = run("--format table simulate --study bias-mse " + kConfigs + "/table2.json --replications 2");
  CHECK(table.code == 0);
  for (const char* name : {"table3.json", "table4.json"}) {
    CHECK(run("--format csv simulate --study bias-mse " + kConfigs + "/" + name + " --replications 1").code == 0);
  }
  const Run p = run("--format csv simulate --study power " + kConfigs + "/power-smoke.json --replications 5");
  CHECK(p.code == 0);
  // Study kind must match the config.
  CHECK(run("simulate --study power " + kConfigs + "/table2.json").code == 2);
}
