// tomo: command-line front end for homodyne quantum-state tomography.
//
// Subcommands: simulate, reconstruct, likelihood, wigner, radon,
// uncertainty. See README.md for file formats.

#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tomo/io.hpp"
#include "tomo/radon.hpp"
#include "tomo/rng.hpp"
#include "tomo/simulate.hpp"
#include "tomo/wigner.hpp"

namespace {

using nlohmann::json;
using namespace tomo;

struct RunConfig {
  int n_max = 10;
  double eta = 1.0;
  int k_max = -1;  // -1: use n_max
  int max_iterations = 5000;
  double tolerance = 1e-10;
  std::uint64_t seed = 1;
  int threads = 0;
  struct Binning {
    int theta_bins = 60;
    int x_bins = 160;
    double x_min = -4.0;
    double x_max = 4.0;
  };
  std::optional<Binning> binning;
  std::optional<std::string> initial_rho_path;

  static RunConfig load(const std::string& path) {
    RunConfig c;
    json j = read_json(path);
    c.n_max = j.value("n_max", c.n_max);
    c.eta = j.value("eta", c.eta);
    c.k_max = j.value("k_max", c.k_max);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.seed = j.value("seed", c.seed);
    if (j.contains("binning") && !j["binning"].is_null()) {
      Binning b;
      const auto& jb = j["binning"];
      b.theta_bins = jb.value("theta_bins", b.theta_bins);
      b.x_bins = jb.value("x_bins", b.x_bins);
      b.x_min = jb.value("x_min", b.x_min);
      b.x_max = jb.value("x_max", b.x_max);
      c.binning = b;
    }
    if (j.contains("initial_rho") && !j["initial_rho"].is_null()) {
      c.initial_rho_path = j["initial_rho"].get<std::string>();
    }
    return c;
  }

  json echo() const {
    json j{{"n_max", n_max},
           {"eta", eta},
           {"k_max", k_max},
           {"max_iterations", max_iterations},
           {"tolerance", tolerance},
           {"seed", seed},
           {"threads", threads}};
    if (binning) {
      j["binning"] = {{"theta_bins", binning->theta_bins},
                      {"x_bins", binning->x_bins},
                      {"x_min", binning->x_min},
                      {"x_max", binning->x_max}};
    } else {
      j["binning"] = nullptr;
    }
    j["initial_rho"] = initial_rho_path ? json(*initial_rho_path) : json(nullptr);
    return j;
  }

  ReconstructionConfig to_recon() const {
    ReconstructionConfig rc;
    rc.n_max = n_max;
    rc.eta = eta;
    rc.k_max = k_max;
    rc.max_iterations = max_iterations;
    rc.tolerance = tolerance;
    rc.threads = threads;
    if (initial_rho_path) {
      rc.initial = density_matrix_from_json(read_json(*initial_rho_path));
    }
    return rc;
  }
};

int default_threads() {
  if (const char* env = std::getenv("TOMO_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 0;  // module default: machine parallelism
}

WignerGridSpec parse_grid(const std::string& s) {
  WignerGridSpec g;
  double v[6];
  std::istringstream is(s);
  for (int i = 0; i < 6; ++i) {
    std::string tok;
    if (!std::getline(is, tok, ',')) throw UsageError("grid: expected 6 comma-separated values");
    v[i] = std::stod(tok);
  }
  g.x_min = v[0];
  g.x_max = v[1];
  g.p_min = v[2];
  g.p_max = v[3];
  g.nx = int(v[4]);
  g.np = int(v[5]);
  g.validate();
  return g;
}

StateSpec load_state(const std::string& path) {
  json j = read_json(path);
  StateSpec s;
  s.n_max = j.value("n_max", 10);
  std::string kind = j.value("kind", "vacuum");
  auto cplx = [&](const char* key) {
    const auto& a = j.at(key);
    return Complex(a.at(0).get<double>(), a.at(1).get<double>());
  };
  if (kind == "vacuum") {
    s.kind = StateSpec::Vacuum{};
  } else if (kind == "fock") {
    s.kind = StateSpec::Fock{j.at("n").get<int>()};
  } else if (kind == "coherent") {
    s.kind = StateSpec::Coherent{cplx("alpha")};
  } else if (kind == "superposition01") {
    s.kind = StateSpec::Superposition01{cplx("c0"), cplx("c1")};
  } else if (kind == "matrix") {
    DensityMatrix rho = density_matrix_from_json(
        j.contains("path") ? read_json(j.at("path").get<std::string>()) : j);
    s.n_max = rho.n_max();
    s.kind = StateSpec::ExplicitMatrix{std::move(rho)};
  } else {
    throw UsageError("state: unknown kind '" + kind + "'");
  }
  return s;
}

SimulationPlan load_plan(const std::string& path) {
  json j = read_json(path);
  SimulationPlan p;
  p.n_samples = j.at("n_samples").get<std::int64_t>();
  p.eta = j.value("eta", 1.0);
  p.seed = j.value("seed", std::uint64_t(1));
  const auto& ph = j.at("phases");
  if (ph.is_string() && ph.get<std::string>() == "uniform") {
    p.schedule.mode = PhaseSchedule::Mode::UniformRandom;
  } else if (ph.is_array()) {
    p.schedule.mode = PhaseSchedule::Mode::FixedSet;
    for (const auto& t : ph) p.schedule.phases.push_back(t.get<double>());
  } else {
    throw UsageError("plan: 'phases' must be \"uniform\" or an array of angles");
  }
  p.validate();
  return p;
}

json diagnostics_to_json(const Diagnostics& d) {
  return json{{"format", kDiagnosticsFormat},
              {"warnings", d.warnings},
              {"degenerate_records", d.degenerate_records}};
}

void write_sidecar(const std::string& out_path, json diag) {
  atomic_write_json(out_path + ".diag.json", diag);
}

int run(int argc, char** argv) {
  CLI::App app{"Homodyne quantum-state tomography toolkit"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads,
                 "worker threads (0 = machine parallelism; 1 = bit-exact)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate synthetic quadrature data");
  std::string sim_state, sim_plan, sim_out;
  sim->add_option("--state", sim_state, "state spec json")->required();
  sim->add_option("--plan", sim_plan, "simulation plan json")->required();
  sim->add_option("--out", sim_out, "output dataset file")->required();

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "maximum-likelihood reconstruction");
  std::string rec_data, rec_config, rec_out;
  bool rec_binned = false;
  rec->add_option("--data", rec_data, "dataset file")->required();
  rec->add_option("--config", rec_config, "run config json")->required();
  rec->add_option("--out", rec_out, "output density matrix json")->required();
  rec->add_flag("--binned", rec_binned, "bin the data first (uses config.binning)");

  // likelihood
  auto* lik = app.add_subcommand("likelihood", "print lnL of a state on a dataset");
  std::string lik_rho, lik_data, lik_config;
  lik->add_option("--rho", lik_rho, "density matrix json")->required();
  lik->add_option("--data", lik_data, "dataset file")->required();
  lik->add_option("--config", lik_config, "run config json (for eta)");

  // wigner
  auto* wig = app.add_subcommand("wigner", "Wigner function of a stored matrix");
  std::string wig_rho, wig_grid = "-2,2,-2,2,81,81", wig_out;
  wig->add_option("--rho", wig_rho, "density matrix json")->required();
  wig->add_option("--grid", wig_grid, "x_min,x_max,p_min,p_max,nx,np");
  wig->add_option("--out", wig_out, "output grid json")->required();

  // radon
  auto* rad = app.add_subcommand("radon", "filtered back-projection baseline");
  std::string rad_data, rad_grid = "-2,2,-2,2,81,81", rad_out;
  double rad_cutoff = 6.3;
  rad->add_option("--data", rad_data, "dataset file")->required();
  rad->add_option("--cutoff", rad_cutoff, "filter cutoff frequency");
  rad->add_option("--grid", rad_grid, "x_min,x_max,p_min,p_max,nx,np");
  rad->add_option("--out", rad_out, "output grid json")->required();

  // uncertainty
  auto* unc = app.add_subcommand("uncertainty", "bootstrap uncertainty matrix");
  std::string unc_rho, unc_plan, unc_config, unc_out, unc_data;
  int unc_replicas = 50;
  unc->add_option("--rho", unc_rho, "density matrix json")->required();
  unc->add_option("--plan", unc_plan, "simulation plan json")->required();
  unc->add_option("--replicas", unc_replicas, "number of replicas");
  unc->add_option("--config", unc_config, "run config json")->required();
  unc->add_option("--data", unc_data,
                  "dataset whose phase multiset the replicas reuse");
  unc->add_option("--out", unc_out, "output uncertainty json")->required();

  for (auto* sub : {sim, rec, lik, wig, rad, unc}) sub->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*sim) {
    StateSpec state = load_state(sim_state);
    SimulationPlan plan = load_plan(sim_plan);
    QuadratureDataset ds = sample_quadratures(state, plan);
    write_dataset(sim_out, ds);
  } else if (*rec) {
    RunConfig cfg = RunConfig::load(rec_config);
    cfg.threads = threads;
    QuadratureDataset ds = ingest_dataset(rec_data, {}, cfg.eta);
    ReconstructionResult res;
    if (rec_binned) {
      if (!cfg.binning) throw UsageError("--binned requires config.binning");
      BinnedHistogram hist = BinnedHistogram::from_dataset(
          ds, cfg.binning->theta_bins, cfg.binning->x_bins, cfg.binning->x_min,
          cfg.binning->x_max);
      res = reconstruct_binned(hist, cfg.to_recon());
    } else {
      res = reconstruct(ds, cfg.to_recon());
    }
    json out = density_matrix_to_json(res.rho_ml);
    out["config"] = cfg.echo();
    out["binned"] = rec_binned;
    atomic_write_json(rec_out, out);
    json diag = diagnostics_to_json(res.diagnostics);
    diag["loglik_trace"] = res.loglik_trace;
    diag["iterations"] = res.iterations;
    diag["stop_reason"] =
        res.stop_reason == StopReason::Converged ? "converged" : "max_iterations";
    write_sidecar(rec_out, diag);
  } else if (*lik) {
    RunConfig cfg = lik_config.empty() ? RunConfig{} : RunConfig::load(lik_config);
    cfg.threads = threads;
    DensityMatrix rho = density_matrix_from_json(read_json(lik_rho));
    QuadratureDataset ds = ingest_dataset(lik_data, {}, cfg.eta);
    OperatorCache ops = OperatorCache::build(
        ds.records, rho.n_max(), cfg.eta,
        cfg.k_max < 0 ? rho.n_max() : cfg.k_max, nullptr, threads);
    double lnl = log_likelihood(rho, ds, ops, threads);
    std::printf("%.17g\n", lnl);
  } else if (*wig) {
    DensityMatrix rho = density_matrix_from_json(read_json(wig_rho));
    WignerGrid grid = wigner_from_rho(rho, parse_grid(wig_grid), threads);
    json out = wigner_grid_to_json(grid);
    out["config"] = json{{"rho", wig_rho}, {"grid", wig_grid}, {"threads", threads}};
    atomic_write_json(wig_out, out);
  } else if (*rad) {
    QuadratureDataset ds = ingest_dataset(rad_data);
    BackProjectionConfig cfg;
    cfg.cutoff = rad_cutoff;
    cfg.grid = parse_grid(rad_grid);
    Diagnostics diag;
    WignerGrid grid = backproject(ds, cfg, &diag, threads);
    json out = wigner_grid_to_json(grid);
    out["config"] = json{{"data", rad_data},
                         {"cutoff", rad_cutoff},
                         {"grid", rad_grid},
                         {"threads", threads}};
    atomic_write_json(rad_out, out);
    write_sidecar(rad_out, diagnostics_to_json(diag));
  } else if (*unc) {
    RunConfig cfg = RunConfig::load(unc_config);
    cfg.threads = threads;
    DensityMatrix rho = density_matrix_from_json(read_json(unc_rho));
    SimulationPlan plan = load_plan(unc_plan);
    if (!unc_data.empty()) {
      // Reuse the phase multiset of an existing dataset.
      QuadratureDataset ds = ingest_dataset(unc_data);
      plan.schedule.mode = PhaseSchedule::Mode::FixedSet;
      plan.schedule.phases.clear();
      for (const auto& r : ds.records) plan.schedule.phases.push_back(r.theta);
      plan.n_samples = std::int64_t(ds.records.size());
    }
    BootstrapResult res =
        bootstrap_uncertainty(rho, plan, unc_replicas, cfg.to_recon());
    json mean = json::array(), sd = json::array();
    for (int i = 0; i < res.mean_abs_dev.rows(); ++i) {
      json mrow = json::array(), srow = json::array();
      for (int j = 0; j < res.mean_abs_dev.cols(); ++j) {
        mrow.push_back(res.mean_abs_dev(i, j));
        srow.push_back(res.std_dev(i, j));
      }
      mean.push_back(std::move(mrow));
      sd.push_back(std::move(srow));
    }
    json out{{"format", kUncertaintyFormat},
             {"mean_abs_dev", mean},
             {"std_dev", sd},
             {"trace_norm_mean", res.trace_norm_mean},
             {"replicas", unc_replicas},
             {"config", cfg.echo()}};
    atomic_write_json(unc_out, out);
    write_sidecar(unc_out, diagnostics_to_json(res.diagnostics));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << json{{"error", {{"type", "usage"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << json{{"error", {{"type", "data"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << json{{"error", {{"type", "numerical"}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "internal"}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 3;
  }
}
