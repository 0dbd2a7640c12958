#include "tomo/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "tomo/fock.hpp"
#include "tomo/parallel.hpp"
#include "tomo/rng.hpp"

namespace tomo {

void SimulationPlan::validate() const {
  if (n_samples < 1) throw UsageError("plan: n_samples must be >= 1");
  if (!(eta > 0.0) || eta > 1.0) throw UsageError("plan: eta must be in (0, 1]");
  if (schedule.mode == PhaseSchedule::Mode::FixedSet && schedule.phases.empty()) {
    throw UsageError("plan: FixedSet schedule needs at least one phase");
  }
  for (double t : schedule.phases) {
    if (!std::isfinite(t)) throw DataError("plan: non-finite phase");
  }
}

DensityMatrix StateSpec::to_density_matrix() const {
  if (n_max < 0) throw UsageError("state: n_max must be >= 0");
  return std::visit(
      [&](const auto& k) -> DensityMatrix {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Vacuum>) {
          return DensityMatrix::vacuum(n_max);
        } else if constexpr (std::is_same_v<T, Fock>) {
          return DensityMatrix::fock(k.n, n_max);
        } else if constexpr (std::is_same_v<T, Coherent>) {
          Eigen::VectorXcd c = coherent_amplitudes(k.alpha, n_max);
          double tail = 1.0 - c.squaredNorm();
          if (tail > 1e-6) {
            std::ostringstream os;
            os << "state: coherent |alpha|=" << std::abs(k.alpha)
               << " leaves tail weight " << tail << " above n_max=" << n_max;
            throw UsageError(os.str());
          }
          return DensityMatrix::from_pure(c);
        } else if constexpr (std::is_same_v<T, Superposition01>) {
          if (n_max < 1) throw UsageError("state: superposition01 needs n_max >= 1");
          double norm = std::norm(k.c0) + std::norm(k.c1);
          if (std::abs(norm - 1.0) > 1e-12) {
            throw UsageError("state: |c0|^2 + |c1|^2 must equal 1");
          }
          Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n_max + 1);
          psi[0] = k.c0;
          psi[1] = k.c1;
          return DensityMatrix::from_pure(psi);
        } else {
          static_assert(std::is_same_v<T, ExplicitMatrix>);
          if (k.rho.dim() != n_max + 1) {
            throw UsageError("state: explicit matrix dimension does not match n_max");
          }
          k.rho.validate(1e-9, 1e-9, -1e-8);
          return k.rho;
        }
      },
      kind);
}

QuadratureSampler::QuadratureSampler(const DensityMatrix& rho_eta,
                                     double theta) {
  const int d = rho_eta.dim();
  int n_eff = 0;
  for (int n = 0; n < d; ++n) {
    if (rho_eta.matrix(n, n).real() > 1e-12) n_eff = n;
  }
  const double L = 6.0 * std::sqrt((2.0 * n_eff + 1.0) / 4.0);
  constexpr int kGrid = 4096;

  // Real quadratic form: pr(x) = psi(x)^T M psi(x) with
  // M_mn = Re(rho_mn e^{i(n-m)theta}).
  Eigen::MatrixXd M(d, d);
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      M(m, n) = (rho_eta.matrix(m, n) * std::polar(1.0, (n - m) * theta)).real();
    }
  }

  xs_.resize(kGrid);
  pdf_.resize(kGrid);
  cdf_.resize(kGrid);
  const double dx = 2.0 * L / (kGrid - 1);
  for (int i = 0; i < kGrid; ++i) {
    double x = -L + i * dx;
    Eigen::VectorXd psi = oscillator_wavefunctions(x, d - 1);
    xs_[i] = x;
    pdf_[i] = std::max(0.0, psi.dot(M * psi));
  }
  cdf_[0] = 0.0;
  for (int i = 1; i < kGrid; ++i) {
    cdf_[i] = cdf_[i - 1] + 0.5 * (pdf_[i - 1] + pdf_[i]) * dx;
  }
  double total = cdf_.back();
  if (!(total > 0.0)) throw NumericalError("sampler: density integrates to zero");
  for (double& c : cdf_) c /= total;
  for (double& p : pdf_) p /= total;
}

double QuadratureSampler::draw(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return xs_.front();
  if (it == cdf_.end()) return xs_.back();
  std::size_t i = std::size_t(it - cdf_.begin());
  double c0 = cdf_[i - 1], c1 = cdf_[i];
  if (c1 <= c0) return xs_[i];
  double t = (u - c0) / (c1 - c0);
  return xs_[i - 1] + t * (xs_[i] - xs_[i - 1]);
}

double QuadratureSampler::density(double x) const {
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  if (it == xs_.begin() || it == xs_.end()) return 0.0;
  std::size_t i = std::size_t(it - xs_.begin());
  double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
  return pdf_[i - 1] + t * (pdf_[i] - pdf_[i - 1]);
}

namespace {

// UniformRandom phases share a CDF per theta bucket of width pi/512.
constexpr double kThetaBucket = std::numbers::pi / 512.0;

class SamplerCache {
 public:
  explicit SamplerCache(const DensityMatrix& rho_eta) : rho_(rho_eta) {}

  const QuadratureSampler& at_theta(double theta) {
    // Quantized key (1e-9 rad) so repeated FixedSet phases share one CDF.
    long long key = llround(theta / 1e-9);
    auto [it, inserted] = map_.try_emplace(key, nullptr);
    if (inserted) it->second = std::make_unique<QuadratureSampler>(rho_, theta);
    return *it->second;
  }

  const QuadratureSampler& at_bucket(double theta) {
    long long b = llround(std::floor(theta / kThetaBucket));
    auto [it, inserted] = bucket_map_.try_emplace(b, nullptr);
    if (inserted) {
      double center = (double(b) + 0.5) * kThetaBucket;
      it->second = std::make_unique<QuadratureSampler>(rho_, center);
    }
    return *it->second;
  }

 private:
  const DensityMatrix& rho_;
  std::unordered_map<long long, std::unique_ptr<QuadratureSampler>> map_;
  std::unordered_map<long long, std::unique_ptr<QuadratureSampler>> bucket_map_;
};

}  // namespace

QuadratureDataset sample_quadratures(const StateSpec& state,
                                     const SimulationPlan& plan) {
  plan.validate();
  DensityMatrix rho = state.to_density_matrix();
  DensityMatrix rho_eta =
      plan.eta == 1.0 ? rho : bernoulli_transform(rho, plan.eta, state.n_max);

  QuadratureDataset ds;
  ds.eta = plan.eta;
  {
    std::ostringstream os;
    os << "simulated(seed=" << plan.seed << ", n=" << plan.n_samples
       << ", eta=" << plan.eta << ", rng=splitmix64)";
    ds.source = os.str();
  }
  ds.records.reserve(std::size_t(plan.n_samples));

  SamplerCache cache(rho_eta);
  SplitMix64 rng(plan.seed);
  const bool fixed = plan.schedule.mode == PhaseSchedule::Mode::FixedSet;
  for (std::int64_t i = 0; i < plan.n_samples; ++i) {
    double theta;
    const QuadratureSampler* sampler;
    if (fixed) {
      theta = reduce_phase(
          plan.schedule.phases[std::size_t(i) % plan.schedule.phases.size()]);
      sampler = &cache.at_theta(theta);
    } else {
      theta = rng.uniform() * kTwoPi;
      sampler = &cache.at_bucket(theta);
    }
    double x = sampler->draw(rng.uniform());
    ds.records.emplace_back(theta, x);
  }
  return ds;
}

BootstrapResult bootstrap_uncertainty(const DensityMatrix& rho_ml,
                                      const SimulationPlan& tmpl,
                                      int n_replicas,
                                      const ReconstructionConfig& recon_config,
                                      ReplicaSeedFn seed_fn) {
  if (n_replicas < 2) throw UsageError("bootstrap: n_replicas must be >= 2");
  recon_config.validate();
  if (recon_config.n_max != rho_ml.n_max()) {
    throw UsageError("bootstrap: recon_config.n_max must match rho_ml");
  }
  const int d = rho_ml.dim();

  std::vector<Eigen::MatrixXcd> replicas;
  replicas.resize(std::size_t(n_replicas));
  std::vector<std::exception_ptr> errors;
  errors.resize(std::size_t(n_replicas));

  ReconstructionConfig inner = recon_config;
  inner.threads = 1;  // replicas run in parallel instead
  const int nt = std::min(effective_threads(recon_config.threads), n_replicas);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int k = next.fetch_add(1);
      if (k >= n_replicas) return;
      try {
        SimulationPlan plan = tmpl;
        plan.seed = seed_fn ? seed_fn(tmpl.seed, std::uint64_t(k))
                            : replica_seed(tmpl.seed, std::uint64_t(k));
        StateSpec spec;
        spec.kind = StateSpec::ExplicitMatrix{rho_ml};
        spec.n_max = rho_ml.n_max();
        QuadratureDataset ds = sample_quadratures(spec, plan);
        replicas[std::size_t(k)] = reconstruct(ds, inner).rho_ml.matrix;
      } catch (...) {
        errors[std::size_t(k)] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt - 1; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }
  for (int k = 0; k < n_replicas; ++k) {
    if (errors[std::size_t(k)]) {
      try {
        std::rethrow_exception(errors[std::size_t(k)]);
      } catch (const std::exception& e) {
        std::ostringstream os;
        os << "bootstrap: replica " << k << " failed: " << e.what();
        throw NumericalError(os.str());
      }
    }
  }

  BootstrapResult out;
  out.mean_abs_dev = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(d, d);
  double tn = 0.0;
  for (int k = 0; k < n_replicas; ++k) {
    Eigen::MatrixXcd delta = rho_ml.matrix - replicas[std::size_t(k)];
    Eigen::MatrixXd a = delta.cwiseAbs();
    out.mean_abs_dev += a;
    sq += a.cwiseProduct(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(delta,
                                                       Eigen::EigenvaluesOnly);
    tn += 0.5 * es.eigenvalues().cwiseAbs().sum();
  }
  out.mean_abs_dev /= double(n_replicas);
  out.trace_norm_mean = tn / double(n_replicas);
  out.std_dev = (sq / double(n_replicas) -
                 out.mean_abs_dev.cwiseProduct(out.mean_abs_dev))
                    .cwiseMax(0.0)
                    .cwiseSqrt();
  return out;
}

}  // namespace tomo
