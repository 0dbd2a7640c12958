#include "tomo/maxlik.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tomo/parallel.hpp"

namespace tomo {

void ReconstructionConfig::validate() const {
  if (n_max < 1) throw UsageError("config: n_max must be >= 1");
  if (max_iterations < 1) throw UsageError("config: max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw UsageError("config: tolerance must be > 0");
  if (!(eta > 0.0) || eta > 1.0) throw UsageError("config: eta must be in (0, 1]");
  if (threads < 0) throw UsageError("config: threads must be >= 0");
  if (initial) {
    if (initial->dim() != n_max + 1) {
      throw UsageError("config: initial state dimension does not match n_max");
    }
    initial->validate();
  }
}

OperatorCache OperatorCache::build(const std::vector<QuadratureRecord>& records,
                                   int n_max, double eta, int k_max,
                                   Diagnostics* diag, int threads) {
  OperatorCache cache;
  cache.dim_ = n_max + 1;
  const std::size_t n = records.size();
  if (eta == 1.0) {
    cache.ideal_ = true;
    cache.vectors_.resize(n_max + 1, n);
    map_chunks<int>(n, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        cache.vectors_.col(i) = fock_overlap(records[i], n_max).entries;
      }
      return 0;
    });
  } else {
    cache.ideal_ = false;
    cache.povms_.resize(n);
    // Warnings from worker threads would race; collect tail warnings
    // into per-chunk diagnostics and merge afterwards.
    auto chunk_diags = map_chunks<Diagnostics>(
        n, threads, [&](std::size_t b, std::size_t e) {
          Diagnostics local;
          for (std::size_t i = b; i < e; ++i) {
            cache.povms_[i] =
                loss_povm(records[i], eta, n_max, k_max,
                          diag != nullptr ? &local : nullptr)
                    .matrix;
          }
          return local;
        });
    if (diag != nullptr) {
      std::size_t tail_warned = 0;
      for (const auto& d : chunk_diags) tail_warned += d.warnings.size();
      if (tail_warned > 0) {
        std::ostringstream os;
        os << "loss_povm: dropped-tail weight above threshold for "
           << tail_warned << " of " << n << " records; first: "
           << [&]() -> std::string {
                for (const auto& d : chunk_diags)
                  if (!d.warnings.empty()) return d.warnings.front();
                return "";
              }();
        diag->warn(os.str());
      }
    }
  }
  return cache;
}

Eigen::VectorXd OperatorCache::probabilities(const DensityMatrix& rho,
                                             int threads) const {
  const std::size_t n = size();
  Eigen::VectorXd pr(n);
  if (ideal_) {
    // pr_i = v_i^dag rho v_i, batched as a matrix product.
    Eigen::MatrixXcd M = rho.matrix * vectors_;
    pr = vectors_.conjugate().cwiseProduct(M).colwise().sum().real();
  } else {
    const Eigen::MatrixXcd rt = rho.matrix.transpose();
    map_chunks<int>(n, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        pr[i] = povms_[i].cwiseProduct(rt).sum().real();
      }
      return 0;
    });
  }
  return pr;
}

Eigen::MatrixXcd OperatorCache::weighted_sum(const Eigen::VectorXd& weights,
                                             int threads) const {
  const std::size_t n = size();
  if (ideal_) {
    auto partials = map_chunks<Eigen::MatrixXcd>(
        n, threads, [&](std::size_t b, std::size_t e) {
          const Eigen::Index nb = Eigen::Index(e - b);
          Eigen::MatrixXcd V = vectors_.middleCols(Eigen::Index(b), nb);
          Eigen::MatrixXcd Vw = V;
          for (Eigen::Index j = 0; j < nb; ++j) {
            Vw.col(j) *= weights[Eigen::Index(b) + j];
          }
          return Eigen::MatrixXcd(Vw * V.adjoint());
        });
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (const auto& p : partials) R += p;
    // The chunk products are Hermitian only up to gemm roundoff.
    return 0.5 * (R + R.adjoint()).eval();
  }
  auto partials = map_chunks<Eigen::MatrixXcd>(
      n, threads, [&](std::size_t b, std::size_t e) {
        Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(dim_, dim_);
        for (std::size_t i = b; i < e; ++i) R += weights[i] * povms_[i];
        return R;
      });
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (const auto& p : partials) R += p;
  return R;
}

double probability(const DensityMatrix& rho, const MeasurementOperator& op) {
  if (op.dim() != rho.dim()) {
    throw UsageError("probability: operator/state dimension mismatch");
  }
  double pr = op.matrix.cwiseProduct(rho.matrix.transpose()).sum().real();
  // Roundoff may take a true zero slightly negative.
  if (pr < 0.0) {
    if (pr < -1e-12) {
      std::ostringstream os;
      os << "probability: significantly negative value " << pr;
      throw NumericalError(os.str());
    }
    pr = 0.0;
  }
  return pr;
}

namespace {

// Kahan-compensated sum of ln(max(pr_i, floor)), optionally weighted.
double log_sum(const Eigen::VectorXd& pr, const double* weights) {
  double s = 0.0, c = 0.0;
  for (Eigen::Index i = 0; i < pr.size(); ++i) {
    double term = std::log(std::max(pr[i], kProbabilityFloor));
    if (weights != nullptr) term *= weights[i];
    double y = term - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

}  // namespace

double log_likelihood(const DensityMatrix& rho, const QuadratureDataset& dataset,
                      const OperatorCache& ops, int threads) {
  if (dataset.empty()) throw DataError("log_likelihood: empty dataset");
  if (ops.size() != dataset.size()) {
    throw UsageError("log_likelihood: cache not aligned with dataset");
  }
  Eigen::VectorXd pr = ops.probabilities(rho, threads);
  return log_sum(pr, nullptr);
}

Eigen::MatrixXcd r_operator(const DensityMatrix& rho,
                            const QuadratureDataset& dataset,
                            const OperatorCache& ops, int threads) {
  if (ops.size() != dataset.size()) {
    throw UsageError("r_operator: cache not aligned with dataset");
  }
  Eigen::VectorXd pr = ops.probabilities(rho, threads);
  Eigen::VectorXd w(pr.size());
  for (Eigen::Index i = 0; i < pr.size(); ++i) {
    if (pr[i] <= kProbabilityFloor) {
      std::ostringstream os;
      os << "r_operator: degenerate measurement, pr at floor for record " << i;
      throw NumericalError(os.str());
    }
    w[i] = 1.0 / pr[i];
  }
  return ops.weighted_sum(w, threads);
}

Eigen::MatrixXcd r_operator_binned(const DensityMatrix& rho,
                                   const BinnedHistogram& hist, int n_max,
                                   double eta, int k_max) {
  const int d = n_max + 1;
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(d, d);
  if (k_max < 0) k_max = n_max;
  for (std::size_t j = 0; j < hist.counts.size(); ++j) {
    double f = hist.counts[j];
    if (f <= 0.0) continue;
    MeasurementOperator op =
        eta == 1.0 ? ideal_projector(hist.representative_points[j], n_max)
                   : loss_povm(hist.representative_points[j], eta, n_max, k_max);
    double pr = probability(rho, op);
    if (pr <= kProbabilityFloor) {
      std::ostringstream os;
      os << "r_operator_binned: degenerate measurement, pr at floor for bin " << j;
      throw NumericalError(os.str());
    }
    R += (f / pr) * op.matrix;
  }
  return R;
}

DensityMatrix iterate_once(const DensityMatrix& rho, const Eigen::MatrixXcd& R) {
  Eigen::MatrixXcd M = R * rho.matrix * R;
  M = 0.5 * (M + M.adjoint()).eval();  // kill roundoff drift
  double tr = M.trace().real();
  if (!(tr > kProbabilityFloor)) {
    throw NumericalError("iterate_once: trace of R rho R vanished");
  }
  return DensityMatrix(M / tr);
}

void check_phase_coverage(const std::vector<QuadratureRecord>& records,
                          Diagnostics& diag) {
  constexpr int kBins = 8;
  if (records.size() < 8 * kBins) return;
  std::array<std::size_t, kBins> hist{};
  for (const auto& r : records) {
    double t = std::fmod(r.theta, std::numbers::pi);
    int b = std::min(kBins - 1, int(t / std::numbers::pi * kBins));
    ++hist[b];
  }
  double expected = double(records.size()) / kBins;
  auto lo = std::min_element(hist.begin(), hist.end());
  if (double(*lo) < 0.2 * expected) {
    std::ostringstream os;
    os << "phase coverage is grossly non-uniform (emptiest of " << kBins
       << " bins over [0, pi) holds " << *lo << " of " << records.size()
       << " records); fixed-point premise may be violated";
    diag.warn(os.str());
  }
}

namespace {

struct IterationSums {
  double loglik = 0.0;
  bool any_floor = false;
  std::size_t first_floor = 0;
  std::vector<std::size_t> degenerate;
};

IterationSums score(const Eigen::VectorXd& pr, const double* weights) {
  IterationSums s;
  s.loglik = log_sum(pr, weights);
  double pmax = pr.maxCoeff();
  for (Eigen::Index i = 0; i < pr.size(); ++i) {
    if (pr[i] <= kProbabilityFloor && !s.any_floor) {
      s.any_floor = true;
      s.first_floor = std::size_t(i);
    }
    if (pr[i] < kDegenerateFraction * pmax) s.degenerate.push_back(std::size_t(i));
  }
  return s;
}

// Shared iteration loop for the unbinned and binned variants. weights
// is null for unbinned data (every record counts once); for binned
// data it holds the occupied-bin counts.
ReconstructionResult run_iteration(const OperatorCache& cache,
                                   const Eigen::VectorXd* bin_counts,
                                   double n_samples,
                                   const ReconstructionConfig& config,
                                   Diagnostics diag) {
  ReconstructionResult res;
  res.config_echo = config;
  res.diagnostics = std::move(diag);

  DensityMatrix rho =
      config.initial ? *config.initial
                     : DensityMatrix::maximally_mixed(config.n_max);
  const double tol_abs = config.tolerance * n_samples;
  const double* w = bin_counts != nullptr ? bin_counts->data() : nullptr;

  Eigen::VectorXd pr_weights;  // weight_i = f_i / pr_i (f_i = 1 unbinned)
  IterationSums last;
  int k = 0;
  for (;; ++k) {
    Eigen::VectorXd pr = cache.probabilities(rho, config.threads);
    last = score(pr, w);
    res.loglik_trace.push_back(last.loglik);
    if (k > 0) {
      double gain = res.loglik_trace[k] - res.loglik_trace[k - 1];
      if (gain < -1e-12 * n_samples && config.eta < 1.0) {
        std::ostringstream os;
        os << "log-likelihood decreased by " << -gain << " at iteration " << k
           << " (eta < 1: monotonicity is not guaranteed for loss POVMs)";
        res.diagnostics.warn(os.str());
      }
      if (gain < tol_abs) {
        res.stop_reason = StopReason::Converged;
        break;
      }
    }
    if (k == config.max_iterations) {
      res.stop_reason = StopReason::MaxIterations;
      break;
    }
    pr_weights.resize(pr.size());
    for (Eigen::Index i = 0; i < pr.size(); ++i) {
      double f = w != nullptr ? w[i] : 1.0;
      pr_weights[i] = f / std::max(pr[i], kProbabilityFloor);
    }
    Eigen::MatrixXcd R = cache.weighted_sum(pr_weights, config.threads);
    rho = iterate_once(rho, R);
  }

  // Clamping that survives to the final state means the model assigns
  // essentially zero probability to observed data: abort.
  if (last.any_floor) {
    std::ostringstream os;
    os << "reconstruct: probability clamped at floor for record "
       << last.first_floor << " at convergence";
    throw NumericalError(os.str());
  }
  if (!last.degenerate.empty()) {
    res.diagnostics.degenerate_records = last.degenerate;
    std::ostringstream os;
    os << last.degenerate.size()
       << " record(s) with pr below " << kDegenerateFraction
       << " of the maximum at convergence (first: record "
       << last.degenerate.front() << ")";
    res.diagnostics.warn(os.str());
  }

  res.iterations = k;
  res.rho_ml = std::move(rho);
  res.rho_ml.validate();
  return res;
}

}  // namespace

ReconstructionResult reconstruct(const QuadratureDataset& dataset,
                                 const ReconstructionConfig& config) {
  config.validate();
  if (dataset.empty()) throw DataError("reconstruct: empty dataset");
  Diagnostics diag;
  check_phase_coverage(dataset.records, diag);
  OperatorCache cache =
      OperatorCache::build(dataset.records, config.n_max, config.eta,
                           config.effective_k_max(), &diag, config.threads);
  return run_iteration(cache, nullptr, double(dataset.size()), config,
                       std::move(diag));
}

double BinnedHistogram::total_count() const {
  double s = 0.0;
  for (double c : counts) s += c;
  return s;
}

BinnedHistogram BinnedHistogram::from_dataset(const QuadratureDataset& ds,
                                              int theta_bins, int x_bins,
                                              double x_min, double x_max) {
  if (theta_bins < 1 || x_bins < 1 || !(x_min < x_max)) {
    throw UsageError("binning: need theta_bins, x_bins >= 1 and x_min < x_max");
  }
  BinnedHistogram h;
  h.theta_edges.resize(theta_bins + 1);
  for (int t = 0; t <= theta_bins; ++t) {
    h.theta_edges[t] = kTwoPi * t / theta_bins;
  }
  h.x_edges.resize(x_bins + 1);
  for (int j = 0; j <= x_bins; ++j) {
    h.x_edges[j] = x_min + (x_max - x_min) * j / x_bins;
  }
  h.counts.assign(std::size_t(theta_bins) * x_bins, 0.0);
  h.representative_points.reserve(h.counts.size());
  for (int t = 0; t < theta_bins; ++t) {
    double tc = 0.5 * (h.theta_edges[t] + h.theta_edges[t + 1]);
    for (int j = 0; j < x_bins; ++j) {
      double xc = 0.5 * (h.x_edges[j] + h.x_edges[j + 1]);
      h.representative_points.emplace_back(tc, xc);
    }
  }
  std::size_t out_of_range = 0;
  for (const auto& r : ds.records) {
    int t = std::min(theta_bins - 1, int(r.theta / kTwoPi * theta_bins));
    if (r.x < x_min || r.x >= x_max) {
      ++out_of_range;
      continue;
    }
    int j = std::min(x_bins - 1, int((r.x - x_min) / (x_max - x_min) * x_bins));
    h.counts[std::size_t(t) * x_bins + j] += 1.0;
  }
  if (out_of_range > 0) {
    std::ostringstream os;
    os << "binning: " << out_of_range << " record(s) outside [" << x_min
       << ", " << x_max << ") were dropped";
    throw DataError(os.str());
  }
  return h;
}

ReconstructionResult reconstruct_binned(const BinnedHistogram& hist,
                                        const ReconstructionConfig& config) {
  config.validate();
  double n_samples = hist.total_count();
  if (!(n_samples > 0.0)) throw DataError("reconstruct_binned: no counts");

  // Only occupied bins enter the cache; empty bins contribute nothing.
  std::vector<QuadratureRecord> points;
  std::vector<double> counts;
  for (std::size_t j = 0; j < hist.counts.size(); ++j) {
    if (hist.counts[j] > 0.0) {
      points.push_back(hist.representative_points[j]);
      counts.push_back(hist.counts[j]);
    }
  }
  Diagnostics diag;
  check_phase_coverage(points, diag);
  OperatorCache cache =
      OperatorCache::build(points, config.n_max, config.eta,
                           config.effective_k_max(), &diag, config.threads);
  Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(counts.data(),
                                                        Eigen::Index(counts.size()));
  return run_iteration(cache, &f, n_samples, config, std::move(diag));
}

}  // namespace tomo
