#pragma once

#include <Eigen/Dense>
#include <complex>

#include "tomo/errors.hpp"

namespace tomo {

using Complex = std::complex<double>;

// Complex Hermitian, unit-trace, positive-semidefinite matrix in the
// truncated Fock basis {|0>, ..., |n_max>}.
struct DensityMatrix {
  Eigen::MatrixXcd matrix;

  DensityMatrix() = default;
  explicit DensityMatrix(Eigen::MatrixXcd m) : matrix(std::move(m)) {}

  int dim() const { return static_cast<int>(matrix.rows()); }
  int n_max() const { return dim() - 1; }

  double trace_real() const { return matrix.trace().real(); }

  // Largest elementwise |rho - rho^dagger| entry.
  double hermiticity_error() const {
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix,
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  // Checks the type invariants; throws NumericalError on violation.
  void validate(double herm_tol = 1e-12, double trace_tol = 1e-12,
                double eig_floor = -1e-10) const;

  static DensityMatrix maximally_mixed(int n_max);
  static DensityMatrix fock(int n, int n_max);
  static DensityMatrix vacuum(int n_max) { return fock(0, n_max); }
  static DensityMatrix coherent(Complex alpha, int n_max);
  static DensityMatrix from_pure(const Eigen::VectorXcd& psi);
};

// Amplitudes <n|alpha> for n = 0..n_max (not renormalized after
// truncation; callers decide how to treat the tail).
Eigen::VectorXcd coherent_amplitudes(Complex alpha, int n_max);

}  // namespace tomo
