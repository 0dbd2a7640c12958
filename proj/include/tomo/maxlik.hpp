#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "tomo/density_matrix.hpp"
#include "tomo/fock.hpp"
#include "tomo/types.hpp"

namespace tomo {

// pr values below this are clamped before taking the log.
inline constexpr double kProbabilityFloor = 1e-300;
// Records with pr below this fraction of the largest pr are flagged.
inline constexpr double kDegenerateFraction = 1e-12;

struct ReconstructionConfig {
  int n_max = 10;
  double eta = 1.0;
  int k_max = -1;  // -1 means n_max
  int max_iterations = 5000;
  double tolerance = 1e-10;  // per-sample lnL gain threshold
  int threads = 0;           // 0 means hardware concurrency
  std::optional<DensityMatrix> initial;

  int effective_k_max() const { return k_max < 0 ? n_max : k_max; }
  void validate() const;
};

enum class StopReason { Converged, MaxIterations };

struct ReconstructionResult {
  DensityMatrix rho_ml;
  std::vector<double> loglik_trace;  // lnL(rho^{(k)}), last entry = output
  int iterations = 0;
  StopReason stop_reason = StopReason::MaxIterations;
  ReconstructionConfig config_echo;
  Diagnostics diagnostics;
};

// Precomputed per-record measurement operators. For the ideal case
// only the overlap vectors are stored (the projector is rank 1); loss
// POVMs are stored as full matrices.
class OperatorCache {
 public:
  static OperatorCache build(const std::vector<QuadratureRecord>& records,
                             int n_max, double eta, int k_max,
                             Diagnostics* diag = nullptr, int threads = 0);

  std::size_t size() const { return ideal_ ? std::size_t(vectors_.cols()) : povms_.size(); }
  bool ideal() const { return ideal_; }
  int dim() const { return dim_; }

  // pr_i = Re Tr[op_i rho] for every record, in record order.
  Eigen::VectorXd probabilities(const DensityMatrix& rho, int threads = 0) const;

  // R = sum_i weight_i * op_i, accumulated in a fixed chunk order that
  // does not depend on the thread count.
  Eigen::MatrixXcd weighted_sum(const Eigen::VectorXd& weights,
                                int threads = 0) const;

  const Eigen::MatrixXcd& povm(std::size_t i) const { return povms_[i]; }
  Eigen::VectorXcd overlap(std::size_t i) const { return vectors_.col(i); }

 private:
  bool ideal_ = true;
  int dim_ = 0;
  Eigen::MatrixXcd vectors_;  // dim x N, ideal case
  std::vector<Eigen::MatrixXcd> povms_;
};

struct BinnedHistogram {
  std::vector<double> theta_edges;  // sorted, size T+1
  std::vector<double> x_edges;      // sorted, size X+1
  // counts[t * X + x]; fractional weights allowed internally.
  std::vector<double> counts;
  std::vector<QuadraturePoint> representative_points;  // bin centers

  std::size_t theta_bins() const { return theta_edges.size() - 1; }
  std::size_t x_bins() const { return x_edges.size() - 1; }
  double total_count() const;

  static BinnedHistogram from_dataset(const QuadratureDataset& ds,
                                      int theta_bins, int x_bins,
                                      double x_min, double x_max);
};

double probability(const DensityMatrix& rho, const MeasurementOperator& op);

double log_likelihood(const DensityMatrix& rho, const QuadratureDataset& dataset,
                      const OperatorCache& ops, int threads = 0);

Eigen::MatrixXcd r_operator(const DensityMatrix& rho,
                            const QuadratureDataset& dataset,
                            const OperatorCache& ops, int threads = 0);

Eigen::MatrixXcd r_operator_binned(const DensityMatrix& rho,
                                   const BinnedHistogram& hist, int n_max,
                                   double eta = 1.0, int k_max = -1);

// One RrhoR step: symmetrize, re-Hermitize, trace-normalize.
DensityMatrix iterate_once(const DensityMatrix& rho, const Eigen::MatrixXcd& R);

ReconstructionResult reconstruct(const QuadratureDataset& dataset,
                                 const ReconstructionConfig& config);

ReconstructionResult reconstruct_binned(const BinnedHistogram& hist,
                                        const ReconstructionConfig& config);

// Warns into diag if the phase histogram over [0, pi) is grossly
// non-uniform (the fixed-point premise needs phase coverage).
void check_phase_coverage(const std::vector<QuadratureRecord>& records,
                          Diagnostics& diag);

}  // namespace tomo
