#include "tomo/radon.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "tomo/maxlik.hpp"
#include "tomo/parallel.hpp"

namespace tomo {

double ramp_kernel(double z, double cutoff) {
  const double kz = cutoff * z;
  if (std::abs(kz) < 1e-4) {
    // Series of [cos(kz) + kz sin(kz) - 1] / z^2 around z = 0; the
    // closed form loses all digits to cancellation here.
    const double kz2 = kz * kz;
    return cutoff * cutoff * (0.5 - kz2 / 8.0 + kz2 * kz2 / 144.0);
  }
  return (std::cos(kz) + kz * std::sin(kz) - 1.0) / (z * z);
}

WignerGrid backproject(const QuadratureDataset& dataset,
                       const BackProjectionConfig& config, Diagnostics* diag,
                       int threads) {
  config.validate();
  if (dataset.empty()) throw DataError("backproject: empty dataset");
  if (diag != nullptr) check_phase_coverage(dataset.records, *diag);

  const std::size_t n = dataset.size();
  std::vector<double> ct(n), st(n), xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    ct[i] = std::cos(dataset.records[i].theta);
    st[i] = std::sin(dataset.records[i].theta);
    xs[i] = dataset.records[i].x;
  }

  const WignerGridSpec& g = config.grid;
  WignerGrid grid;
  grid.spec = g;
  grid.provenance = WignerProvenance::FromBackProjection;
  grid.values.resize(std::size_t(g.nx) * g.np);
  const double norm = 1.0 / (2.0 * std::numbers::pi * double(n));

  map_chunks<int>(std::size_t(g.nx), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double x = g.x_at(int(i));
      for (int j = 0; j < g.np; ++j) {
        const double p = g.p_at(j);
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          s += ramp_kernel(x * ct[r] + p * st[r] - xs[r], config.cutoff);
        }
        grid.values[i * g.np + j] = s * norm;
      }
    }
    return 0;
  });
  return grid;
}

}  // namespace tomo
