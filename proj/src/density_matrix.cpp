#include "tomo/density_matrix.hpp"

#include <cmath>
#include <sstream>

namespace tomo {

void DensityMatrix::validate(double herm_tol, double trace_tol,
                             double eig_floor) const {
  if (dim() < 1) throw NumericalError("DensityMatrix: empty matrix");
  double he = hermiticity_error();
  if (he > herm_tol) {
    std::ostringstream os;
    os << "DensityMatrix: Hermiticity violated (" << he << " > " << herm_tol
       << ")";
    throw NumericalError(os.str());
  }
  double tr = trace_real();
  if (std::abs(tr - 1.0) > trace_tol) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr << " deviates from 1 beyond "
       << trace_tol;
    throw NumericalError(os.str());
  }
  double lam = min_eigenvalue();
  if (lam < eig_floor) {
    std::ostringstream os;
    os << "DensityMatrix: min eigenvalue " << lam << " below floor "
       << eig_floor;
    throw NumericalError(os.str());
  }
}

DensityMatrix DensityMatrix::maximally_mixed(int n_max) {
  int d = n_max + 1;
  return DensityMatrix(Eigen::MatrixXcd::Identity(d, d) / double(d));
}

DensityMatrix DensityMatrix::fock(int n, int n_max) {
  if (n < 0 || n > n_max) throw UsageError("fock: n out of range");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
  m(n, n) = 1.0;
  return DensityMatrix(std::move(m));
}

Eigen::VectorXcd coherent_amplitudes(Complex alpha, int n_max) {
  Eigen::VectorXcd c(n_max + 1);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n <= n_max; ++n) {
    c[n] = c[n - 1] * alpha / std::sqrt(double(n));
  }
  return c;
}

DensityMatrix DensityMatrix::coherent(Complex alpha, int n_max) {
  Eigen::VectorXcd c = coherent_amplitudes(alpha, n_max);
  // Renormalize the truncated vector so the matrix has unit trace.
  c /= c.norm();
  return from_pure(c);
}

DensityMatrix DensityMatrix::from_pure(const Eigen::VectorXcd& psi) {
  double n2 = psi.squaredNorm();
  if (n2 <= 0.0) throw UsageError("from_pure: zero state vector");
  return DensityMatrix((psi * psi.adjoint()) / n2);
}
}  // namespace tomo
