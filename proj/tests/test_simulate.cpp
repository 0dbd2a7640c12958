#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "stat_utils.hpp"
#include "tomo/fock.hpp"
#include "tomo/simulate.hpp"

using namespace tomo;
using std::numbers::pi;

namespace {

std::vector<double> xs_of(const QuadratureDataset& ds) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records) out.push_back(r.x);
  return out;
}

QuadratureDataset run_plan(const StateSpec& s, std::int64_t n, double eta,
                           std::uint64_t seed,
                           std::vector<double> fixed_phases = {}) {
  SimulationPlan plan;
  plan.n_samples = n;
  plan.eta = eta;
  plan.seed = seed;
  if (!fixed_phases.empty()) {
    plan.schedule.mode = PhaseSchedule::Mode::FixedSet;
    plan.schedule.phases = std::move(fixed_phases);
  }
  return sample_quadratures(s, plan);
}

}  // namespace

TEST_CASE("vacuum quadrature variance is 1/4") {
  StateSpec s;
  s.kind = StateSpec::Vacuum{};
  s.n_max = 6;
  auto ds = run_plan(s, 100000, 1.0, 42, {0.3});
  double mean = 0.0, var = 0.0;
  for (double x : xs_of(ds)) mean += x;
  mean /= double(ds.size());
  for (double x : xs_of(ds)) var += (x - mean) * (x - mean);
  var /= double(ds.size());
  CHECK(var == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("chi-square goodness of fit at the 0.1% level") {
  const std::int64_t n = 100000;
  struct Case {
    const char* name;
    StateSpec spec;
    std::function<double(double, double)> density;  // (theta, x)
  };
  std::vector<Case> cases;
  {
    StateSpec s;
    s.kind = StateSpec::Vacuum{};
    s.n_max = 8;
    cases.push_back({"vacuum", s, [](double, double x) {
                       return std::sqrt(2.0 / pi) * std::exp(-2.0 * x * x);
                     }});
  }
  {
    StateSpec s;
    s.kind = StateSpec::Fock{1};
    s.n_max = 8;
    cases.push_back({"fock1", s, [](double, double x) {
                       return std::sqrt(2.0 / pi) * 4.0 * x * x *
                              std::exp(-2.0 * x * x);
                     }});
  }
  {
    StateSpec s;
    s.kind = StateSpec::Coherent{Complex(1.0, 0.0)};
    s.n_max = 16;
    cases.push_back({"coherent", s, [](double theta, double x) {
                       // Gaussian, mean Re(alpha e^{-i theta}), variance 1/4
                       double mu = std::cos(theta);
                       return std::sqrt(2.0 / pi) *
                              std::exp(-2.0 * (x - mu) * (x - mu));
                     }});
  }
  {
    StateSpec s;
    double r = 1.0 / std::sqrt(2.0);
    s.kind = StateSpec::Superposition01{Complex(r, 0.0), Complex(r, 0.0)};
    s.n_max = 8;
    cases.push_back({"superposition01", s, [r](double theta, double x) {
                       double psi0 = std::pow(2.0 / pi, 0.25) * std::exp(-x * x);
                       double psi1 = 2.0 * x * psi0;
                       Complex amp = r * psi0 + r * std::polar(1.0, theta) * psi1;
                       return std::norm(amp);
                     }});
  }

  std::uint64_t seed = 1000;
  for (const auto& c : cases) {
    for (double theta : {0.0, pi / 4.0, pi / 2.0}) {
      CAPTURE(c.name);
      CAPTURE(theta);
      auto ds = run_plan(c.spec, n, 1.0, seed++, {theta});
      auto r = stat_utils::chi2_gof(
          xs_of(ds), [&](double x) { return c.density(theta, x); }, -4.0, 4.0,
          64);
      CHECK(r.statistic < stat_utils::chi2_critical(r.dof(), 1e-3));
    }
  }
}

TEST_CASE("Fock(1) density dips to zero at the origin") {
  StateSpec s;
  s.kind = StateSpec::Fock{1};
  s.n_max = 8;
  auto ds = run_plan(s, 50000, 1.0, 9, {0.0});
  int near_zero = 0;
  for (double x : xs_of(ds)) {
    if (std::abs(x) < 0.02) ++near_zero;
  }
  // analytic mass in |x|<0.02 is ~8.5e-6; a Gaussian of the same
  // variance would put ~3.2e-2 there
  CHECK(near_zero <= 5);
}

TEST_CASE("loss equivalence: eta channel vs pre-degraded state") {
  StateSpec lossy;
  lossy.kind = StateSpec::Fock{1};
  lossy.n_max = 8;
  auto a = run_plan(lossy, 10000, 0.5, 21, {0.7});

  StateSpec degraded;
  degraded.kind = StateSpec::ExplicitMatrix{
      bernoulli_transform(DensityMatrix::fock(1, 8), 0.5, 8)};
  degraded.n_max = 8;
  auto b = run_plan(degraded, 10000, 1.0, 22, {0.7});

  CHECK(stat_utils::ks_two_sample(xs_of(a), xs_of(b)) > 0.01);
}

TEST_CASE("eta continuity: 1 vs 0.99999") {
  StateSpec s;
  s.kind = StateSpec::Fock{1};
  s.n_max = 8;
  auto a = run_plan(s, 10000, 1.0, 31, {0.0});
  auto b = run_plan(s, 10000, 0.99999, 32, {0.0});
  CHECK(stat_utils::ks_two_sample(xs_of(a), xs_of(b)) > 0.01);
}

TEST_CASE("uniform phase schedule is uniform on [0, 2pi)") {
  StateSpec s;
  s.kind = StateSpec::Vacuum{};
  s.n_max = 4;
  auto ds = run_plan(s, 100000, 1.0, 8);
  std::vector<double> thetas;
  for (const auto& r : ds.records) thetas.push_back(r.theta);
  CHECK(stat_utils::ks_one_sample(thetas, [](double t) { return t / kTwoPi; }) >
        0.01);
}

TEST_CASE("seed determinism") {
  StateSpec s;
  s.kind = StateSpec::Coherent{Complex(0.6, 0.3)};
  s.n_max = 12;
  auto a = run_plan(s, 5000, 0.8, 77);
  auto b = run_plan(s, 5000, 0.8, 77);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].theta == b.records[i].theta);
    CHECK(a.records[i].x == b.records[i].x);
  }
  auto c = run_plan(s, 5000, 0.8, 78);
  bool identical = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.records[i].x != c.records[i].x) identical = false;
  }
  CHECK(!identical);
}

TEST_CASE("state spec construction checks") {
  StateSpec coh;
  coh.kind = StateSpec::Coherent{Complex(3.0, 0.0)};
  coh.n_max = 5;  // far too small for |alpha| = 3
  CHECK_THROWS_AS(coh.to_density_matrix(), UsageError);

  StateSpec sup;
  sup.kind = StateSpec::Superposition01{Complex(0.9, 0.0), Complex(0.9, 0.0)};
  sup.n_max = 4;
  CHECK_THROWS_AS(sup.to_density_matrix(), UsageError);

  StateSpec ok;
  double r = 1.0 / std::sqrt(2.0);
  ok.kind = StateSpec::Superposition01{Complex(r, 0.0), Complex(0.0, r)};
  ok.n_max = 4;
  auto rho = ok.to_density_matrix();
  CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-14));

  SimulationPlan bad;
  bad.n_samples = 0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("bootstrap: forced-identical replicas have zero spread") {
  DensityMatrix vac = DensityMatrix::vacuum(4);
  SimulationPlan tmpl;
  tmpl.n_samples = 500;
  tmpl.seed = 5;
  ReconstructionConfig cfg;
  cfg.n_max = 4;
  cfg.max_iterations = 50;
  auto res = bootstrap_uncertainty(
      vac, tmpl, 2, cfg, [](std::uint64_t, std::uint64_t) { return 123u; });
  // all replicas are the same dataset, so the deviation from rho_ml is
  // identical across replicas and the spread collapses to zero
  CHECK(res.std_dev.maxCoeff() == 0.0);
  CHECK(res.mean_abs_dev.maxCoeff() > 0.0);
}

TEST_CASE("bootstrap: vacuum uncertainty is small") {
  DensityMatrix vac = DensityMatrix::vacuum(4);
  SimulationPlan tmpl;
  tmpl.n_samples = 10000;
  tmpl.seed = 91;
  ReconstructionConfig cfg;
  cfg.n_max = 4;
  auto res = bootstrap_uncertainty(vac, tmpl, 20, cfg);
  CHECK(res.mean_abs_dev(0, 0) < 0.01);
  CHECK(res.trace_norm_mean < 0.05);
  CHECK_THROWS_AS(bootstrap_uncertainty(vac, tmpl, 1, cfg), UsageError);
}
