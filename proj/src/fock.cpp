#include "tomo/fock.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tomo {

namespace {
constexpr double kQuarticRoot2OverPi = 0.89324384173800219;  // (2/pi)^{1/4}
}

Eigen::VectorXd oscillator_wavefunctions(double x, int n_max) {
  if (n_max < 0) throw UsageError("oscillator_wavefunctions: n_max < 0");
  if (!std::isfinite(x)) throw DataError("oscillator_wavefunctions: x not finite");
  Eigen::VectorXd psi(n_max + 1);
  psi[0] = kQuarticRoot2OverPi * std::exp(-x * x);
  if (n_max >= 1) psi[1] = 2.0 * x * psi[0];
  for (int n = 1; n < n_max; ++n) {
    psi[n + 1] = (2.0 * x / std::sqrt(double(n + 1))) * psi[n] -
                 std::sqrt(double(n) / double(n + 1)) * psi[n - 1];
  }
  return psi;
}

OverlapVector fock_overlap(const QuadraturePoint& point, int n_max) {
  Eigen::VectorXd psi = oscillator_wavefunctions(point.x, n_max);
  OverlapVector out;
  out.point = point;
  out.entries.resize(n_max + 1);
  // Phase applied after the real recurrence so that
  // entries[n] == polar(1, n*theta) * psi_n(x) exactly.
  for (int n = 0; n <= n_max; ++n) {
    out.entries[n] = std::polar(1.0, n * point.theta) * psi[n];
  }
  return out;
}

MeasurementOperator ideal_projector(const QuadraturePoint& point, int n_max) {
  OverlapVector v = fock_overlap(point, n_max);
  MeasurementOperator op;
  op.kind = MeasurementOperator::Kind::IdealProjector;
  op.matrix = v.entries * v.entries.adjoint();
  return op;
}

double bernoulli_coefficient(int n, int k, double eta) {
  if (n < 0 || k < 0) throw UsageError("bernoulli_coefficient: negative index");
  if (!(eta > 0.0) || eta > 1.0) {
    throw UsageError("bernoulli_coefficient: eta must be in (0, 1]");
  }
  if (k == 0) return std::pow(eta, 0.5 * n);
  if (eta == 1.0) return 0.0;
  double log_binom = std::lgamma(double(n + k + 1)) -
                     std::lgamma(double(n + 1)) - std::lgamma(double(k + 1));
  return std::exp(0.5 * (log_binom + n * std::log(eta) + k * std::log1p(-eta)));
}

MeasurementOperator loss_povm(const QuadraturePoint& point, double eta,
                              int n_max, int k_max, Diagnostics* diag,
                              double tail_warn_threshold) {
  if (!(eta > 0.0) || eta > 1.0) throw UsageError("loss_povm: eta must be in (0, 1]");
  if (k_max < 0) throw UsageError("loss_povm: k_max < 0");

  OverlapVector v = fock_overlap(point, n_max);
  const int d = n_max + 1;

  // Bernoulli coefficients B_{n+k,n}(eta), indexed [n][k].
  Eigen::MatrixXd B(d, k_max + 1);
  for (int n = 0; n < d; ++n) {
    for (int k = 0; k <= k_max; ++k) B(n, k) = bernoulli_coefficient(n, k, eta);
  }

  // E[a][b] = sum_k B_{a,a-k} B_{b,b-k} <a-k|theta,x><theta,x|b-k>
  // with a = n+k, b = m+k; a,b clipped at n_max.
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b <= a; ++b) {
      Complex s(0.0, 0.0);
      int kk = std::min({k_max, a, b});
      for (int k = 0; k <= kk; ++k) {
        s += B(a - k, k) * B(b - k, k) * v.entries[a - k] *
             std::conj(v.entries[b - k]);
      }
      E(a, b) = s;
      if (b != a) E(b, a) = std::conj(s);
    }
  }

  if (diag != nullptr && eta < 1.0) {
    // Dropped terms have n+k > n_max; estimate their diagonal weight
    // relative to what was kept.
    double kept = 0.0, dropped = 0.0;
    Eigen::VectorXd psi2 = v.entries.cwiseAbs2();
    for (int n = 0; n < d; ++n) {
      for (int k = 0; k <= k_max; ++k) {
        double w = B(n, k) * B(n, k) * psi2[n];
        if (n + k <= n_max) kept += w; else dropped += w;
      }
    }
    if (kept > 0.0 && dropped / (kept + dropped) > tail_warn_threshold) {
      std::ostringstream os;
      os << "loss_povm: dropped-tail weight fraction "
         << dropped / (kept + dropped) << " at (theta=" << point.theta
         << ", x=" << point.x << "); consider raising n_max";
      diag->warn(os.str());
    }
  }

  MeasurementOperator op;
  op.kind = MeasurementOperator::Kind::LossPovm;
  op.eta = eta;
  op.k_max = k_max;
  op.matrix = std::move(E);
  return op;
}

DensityMatrix bernoulli_transform(const DensityMatrix& rho, double eta,
                                  int k_max) {
  if (!(eta > 0.0) || eta > 1.0) {
    throw UsageError("bernoulli_transform: eta must be in (0, 1]");
  }
  const int d = rho.dim();
  const int n_max = d - 1;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      Complex s(0.0, 0.0);
      int kk = std::min(k_max, n_max - std::max(m, n));
      for (int k = 0; k <= kk; ++k) {
        s += bernoulli_coefficient(m, k, eta) * bernoulli_coefficient(n, k, eta) *
             rho.matrix(m + k, n + k);
      }
      out(m, n) = s;
    }
  }
  return DensityMatrix(std::move(out));
}

}  // namespace tomo
