// End-to-end tests that drive the installed `tomo` binary through
// std::system, checking artifacts, stdout, and exit codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tomo/io.hpp"

using namespace tomo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = TOMO_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tomo_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

int run_cli(const std::string& args, const fs::path& stdout_to = {}) {
  std::string cmd = kCli + " " + args;
  if (!stdout_to.empty()) cmd += " > " + stdout_to.string();
  cmd += " 2> /dev/null";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("full pipeline: simulate, reconstruct, likelihood, wigner, radon") {
  TempDir tmp;
  write_text(tmp / "state.json", R"({"kind":"vacuum","n_max":6})");
  json plan{{"n_samples", 20000}, {"phases", "uniform"}, {"seed", 424242}};
  write_text(tmp / "plan.json", plan.dump());
  write_text(tmp / "config.json", R"({"n_max":6,"max_iterations":400})");

  REQUIRE(run_cli("simulate --state " + (tmp / "state.json").string() +
                  " --plan " + (tmp / "plan.json").string() + " --out " +
                  (tmp / "data.csv").string()) == 0);
  auto ds = ingest_dataset(tmp / "data.csv");
  CHECK(ds.size() == 20000);

  REQUIRE(run_cli("reconstruct --data " + (tmp / "data.csv").string() +
                  " --config " + (tmp / "config.json").string() + " --out " +
                  (tmp / "rho.json").string()) == 0);
  json rho_j = read_json(tmp / "rho.json");
  CHECK(rho_j.at("format") == kRhoFormat);
  CHECK(rho_j.contains("config"));
  DensityMatrix rho = density_matrix_from_json(rho_j);
  CHECK(rho.matrix(0, 0).real() >= 0.99);

  // sidecar diagnostics carry the likelihood trace
  json diag = read_json(tmp / "rho.json.diag.json");
  REQUIRE(diag.contains("loglik_trace"));
  std::vector<double> trace = diag["loglik_trace"].get<std::vector<double>>();
  REQUIRE(!trace.empty());

  // likelihood of the reported state matches the last trace entry
  REQUIRE(run_cli("likelihood --rho " + (tmp / "rho.json").string() +
                      " --data " + (tmp / "data.csv").string(),
                  tmp / "lnl.txt") == 0);
  double lnl = std::stod(read_text(tmp / "lnl.txt"));
  CHECK(lnl == doctest::Approx(trace.back()).epsilon(1e-9));

  // wigner of the reconstruction vs the radon baseline at the origin
  REQUIRE(run_cli("wigner --rho " + (tmp / "rho.json").string() +
                  " --grid -1,1,-1,1,21,21 --out " +
                  (tmp / "wig.json").string()) == 0);
  REQUIRE(run_cli("radon --data " + (tmp / "data.csv").string() +
                  " --grid -1,1,-1,1,21,21 --out " +
                  (tmp / "rad.json").string()) == 0);
  WignerGrid wig = wigner_grid_from_json(read_json(tmp / "wig.json"));
  WignerGrid rad = wigner_grid_from_json(read_json(tmp / "rad.json"));
  CHECK(wig.provenance == WignerProvenance::FromDensityMatrix);
  CHECK(rad.provenance == WignerProvenance::FromBackProjection);
  CHECK(std::abs(wig.at(10, 10) - rad.at(10, 10)) < 0.05);
}

TEST_CASE("binned reconstruction via the CLI") {
  TempDir tmp;
  write_text(tmp / "state.json", R"({"kind":"fock","n":1,"n_max":5})");
  json plan{{"n_samples", 5000}, {"phases", "uniform"}, {"seed", 7}};
  write_text(tmp / "plan.json", plan.dump());
  write_text(tmp / "config.json",
             R"({"n_max":5,"max_iterations":300,
                 "binning":{"theta_bins":40,"x_bins":120,"x_min":-5,"x_max":5}})");
  REQUIRE(run_cli("simulate --state " + (tmp / "state.json").string() +
                  " --plan " + (tmp / "plan.json").string() + " --out " +
                  (tmp / "data.csv").string()) == 0);
  REQUIRE(run_cli("reconstruct --binned --data " + (tmp / "data.csv").string() +
                  " --config " + (tmp / "config.json").string() + " --out " +
                  (tmp / "rho.json").string()) == 0);
  json rho_j = read_json(tmp / "rho.json");
  CHECK(rho_j.at("binned") == true);
  DensityMatrix rho = density_matrix_from_json(rho_j);
  CHECK(rho.matrix(1, 1).real() > 0.8);
}

TEST_CASE("seeded runs are reproducible byte for byte") {
  TempDir tmp;
  write_text(tmp / "state.json",
             R"({"kind":"coherent","alpha":[0.8,0.1],"n_max":12})");
  json plan{{"n_samples", 3000}, {"phases", "uniform"}, {"seed", 99}};
  write_text(tmp / "plan.json", plan.dump());
  for (const char* out : {"a.csv", "b.csv"}) {
    REQUIRE(run_cli("simulate --state " + (tmp / "state.json").string() +
                    " --plan " + (tmp / "plan.json").string() + " --out " +
                    (tmp / out).string()) == 0);
  }
  CHECK(read_text(tmp / "a.csv") == read_text(tmp / "b.csv"));
}

TEST_CASE("--threads placement after the subcommand works") {
  TempDir tmp;
  write_text(tmp / "state.json", R"({"kind":"vacuum","n_max":4})");
  json plan{{"n_samples", 2000}, {"phases", "uniform"}, {"seed", 5}};
  write_text(tmp / "plan.json", plan.dump());
  write_text(tmp / "config.json", R"({"n_max":4,"max_iterations":100})");
  REQUIRE(run_cli("simulate --state " + (tmp / "state.json").string() +
                  " --plan " + (tmp / "plan.json").string() + " --out " +
                  (tmp / "data.csv").string()) == 0);
  REQUIRE(run_cli("reconstruct --data " + (tmp / "data.csv").string() +
                  " --config " + (tmp / "config.json").string() +
                  " --threads 1 --out " + (tmp / "r1.json").string()) == 0);
  REQUIRE(run_cli("reconstruct --data " + (tmp / "data.csv").string() +
                  " --config " + (tmp / "config.json").string() + " --out " +
                  (tmp / "r0.json").string()) == 0);
  // deterministic reductions: thread count never changes the result
  json a = read_json(tmp / "r1.json"), b = read_json(tmp / "r0.json");
  CHECK(a.at("matrix") == b.at("matrix"));
}

TEST_CASE("exit codes") {
  TempDir tmp;
  // usage error: missing required option
  CHECK(run_cli("reconstruct --data nowhere.csv") == 1);
  // usage error: unknown subcommand
  CHECK(run_cli("frobnicate") == 1);
  // data error: malformed dataset
  write_text(tmp / "bad.csv", "0.0,1.0\nxyz,abc\n");
  write_text(tmp / "config.json", R"({"n_max":4})");
  CHECK(run_cli("reconstruct --data " + (tmp / "bad.csv").string() +
                " --config " + (tmp / "config.json").string() + " --out " +
                (tmp / "rho.json").string()) == 2);
  // data error: missing input file
  CHECK(run_cli("reconstruct --data " + (tmp / "missing.csv").string() +
                " --config " + (tmp / "config.json").string() + " --out " +
                (tmp / "rho.json").string()) == 2);
  // failed runs leave no output artifact behind
  CHECK(!fs::exists(tmp / "rho.json"));
}

TEST_CASE("uncertainty subcommand") {
  TempDir tmp;
  write_text(tmp / "state.json", R"({"kind":"vacuum","n_max":4})");
  json plan{{"n_samples", 1500}, {"phases", "uniform"}, {"seed", 11}};
  write_text(tmp / "plan.json", plan.dump());
  write_text(tmp / "config.json", R"({"n_max":4,"max_iterations":200})");
  REQUIRE(run_cli("simulate --state " + (tmp / "state.json").string() +
                  " --plan " + (tmp / "plan.json").string() + " --out " +
                  (tmp / "data.csv").string()) == 0);
  REQUIRE(run_cli("reconstruct --data " + (tmp / "data.csv").string() +
                  " --config " + (tmp / "config.json").string() + " --out " +
                  (tmp / "rho.json").string()) == 0);
  REQUIRE(run_cli("uncertainty --rho " + (tmp / "rho.json").string() +
                  " --plan " + (tmp / "plan.json").string() + " --config " +
                  (tmp / "config.json").string() + " --replicas 8 --data " +
                  (tmp / "data.csv").string() + " --out " +
                  (tmp / "unc.json").string()) == 0);
  json u = read_json(tmp / "unc.json");
  CHECK(u.at("format") == kUncertaintyFormat);
  CHECK(u.at("replicas") == 8);
  double u00 = u.at("mean_abs_dev")[0][0].get<double>();
  CHECK(u00 >= 0.0);
  CHECK(u00 < 0.05);
}
