#pragma once

#include <Eigen/Dense>

#include "tomo/density_matrix.hpp"
#include "tomo/types.hpp"

namespace tomo {

// Fock-quadrature overlaps <n|theta,x> for n = 0..n_max, with the
// phase factor e^{i n theta} applied on top of the real oscillator
// wavefunctions.
struct OverlapVector {
  Eigen::VectorXcd entries;
  QuadraturePoint point;
};

struct MeasurementOperator {
  enum class Kind { IdealProjector, LossPovm };

  Eigen::MatrixXcd matrix;
  Kind kind = Kind::IdealProjector;
  double eta = 1.0;
  int k_max = 0;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

// Harmonic-oscillator wavefunctions psi_n(x) = (2/pi)^{1/4}
// H_n(sqrt(2) x) / sqrt(2^n n!) exp(-x^2), evaluated by the normalized
// three-term recurrence
//   psi_{n+1} = (2x/sqrt(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1},
// which stays finite where H_n and n! individually overflow.
Eigen::VectorXd oscillator_wavefunctions(double x, int n_max);

OverlapVector fock_overlap(const QuadraturePoint& point, int n_max);

// Rank-1 projector |theta,x><theta,x| in the truncated basis.
MeasurementOperator ideal_projector(const QuadraturePoint& point, int n_max);

// B_{n+k,n}(eta) = sqrt(C(n+k, n) eta^n (1-eta)^k), computed in
// log-space.
double bernoulli_coefficient(int n, int k, double eta);

// Loss-corrected POVM element E_eta(theta, x). Terms with n+k > n_max
// are dropped; if the estimated dropped diagonal weight exceeds
// tail_warn_threshold a warning lands in diag.
MeasurementOperator loss_povm(const QuadraturePoint& point, double eta,
                              int n_max, int k_max,
                              Diagnostics* diag = nullptr,
                              double tail_warn_threshold = 1e-6);

// Beam-splitter photon-loss channel acting on the Fock-basis matrix.
DensityMatrix bernoulli_transform(const DensityMatrix& rho, double eta,
                                  int k_max);

}  // namespace tomo
