#include "tomo/wigner.hpp"

#include <cmath>
#include <numbers>

#include "tomo/parallel.hpp"

namespace tomo {

namespace {

// Associated Laguerre table L_n^k(u) for n = 0..n_top, k = 0..n_top,
// filled by the upward recurrence in n.
void laguerre_table(double u, int n_top, Eigen::MatrixXd& L) {
  L.resize(n_top + 1, n_top + 1);
  for (int k = 0; k <= n_top; ++k) {
    L(0, k) = 1.0;
    if (n_top >= 1) L(1, k) = 1.0 + k - u;
    for (int n = 1; n < n_top; ++n) {
      L(n + 1, k) =
          ((2.0 * n + 1.0 + k - u) * L(n, k) - (n + k) * L(n - 1, k)) /
          (n + 1.0);
    }
  }
}

}  // namespace

double wigner_point(const DensityMatrix& rho, double x, double p) {
  const int n_top = rho.n_max();
  const double r2 = x * x + p * p;
  const double u = 4.0 * r2;
  const double gauss = std::exp(-2.0 * r2);
  const double phi = std::atan2(p, x);

  Eigen::MatrixXd L;
  laguerre_table(u, n_top, L);

  // W = sum_{m,n} rho_{mn} W_{|m><n|} with
  // W_{|m><n|} = (2/pi)(-1)^n sqrt(n!/m!) (2 conj(alpha))^{m-n}
  //              e^{-2|alpha|^2} L_n^{m-n}(4|alpha|^2),   m >= n,
  // and the (n, m) partner contributing the complex conjugate.
  double w = 0.0;
  for (int n = 0; n <= n_top; ++n) {
    double sign = (n % 2 == 0) ? 1.0 : -1.0;
    w += rho.matrix(n, n).real() * sign * gauss * L(n, 0);
  }
  if (r2 > 0.0) {
    const double log2r = std::log(2.0 * std::sqrt(r2));
    for (int m = 1; m <= n_top; ++m) {
      for (int n = 0; n < m; ++n) {
        Complex rmn = rho.matrix(m, n);
        if (rmn == Complex(0.0, 0.0)) continue;
        int k = m - n;
        double sign = (n % 2 == 0) ? 1.0 : -1.0;
        double mag = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)) +
                              k * log2r - 2.0 * r2) *
                     L(n, k);
        Complex kernel = sign * mag * std::polar(1.0, -k * phi);
        w += 2.0 * (rmn * kernel).real();
      }
    }
  }
  return w * (2.0 / std::numbers::pi);
}

WignerGrid wigner_from_rho(const DensityMatrix& rho, const WignerGridSpec& spec,
                           int threads) {
  spec.validate();
  if (rho.dim() < 1) throw UsageError("wigner_from_rho: empty state");
  WignerGrid grid;
  grid.spec = spec;
  grid.provenance = WignerProvenance::FromDensityMatrix;
  grid.values.resize(std::size_t(spec.nx) * spec.np);
  map_chunks<int>(std::size_t(spec.nx), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double x = spec.x_at(int(i));
      for (int j = 0; j < spec.np; ++j) {
        grid.values[i * spec.np + j] = wigner_point(rho, x, spec.p_at(j));
      }
    }
    return 0;
  });
  return grid;
}

double WignerGrid::integral() const {
  double s = 0.0;
  for (int i = 0; i < spec.nx; ++i) {
    double wi = (i == 0 || i == spec.nx - 1) ? 0.5 : 1.0;
    for (int j = 0; j < spec.np; ++j) {
      double wj = (j == 0 || j == spec.np - 1) ? 0.5 : 1.0;
      s += wi * wj * at(i, j);
    }
  }
  return s * spec.dx() * spec.dp();
}

}  // namespace tomo
