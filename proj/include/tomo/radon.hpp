#pragma once

#include "tomo/types.hpp"

namespace tomo {

struct BackProjectionConfig {
  double cutoff = 6.3;
  WignerGridSpec grid;

  void validate() const {
    if (!(cutoff > 0.0)) throw UsageError("radon: cutoff must be > 0");
    grid.validate();
  }
};

// Band-limited ramp-filter kernel K(z) = int_0^kc k cos(kz) dk.
double ramp_kernel(double z, double cutoff);

// Empirical filtered back-projection over the raw samples:
//   W(x, p) = (1 / (2 pi N)) sum_i K(x cos th_i + p sin th_i - x_i).
WignerGrid backproject(const QuadratureDataset& dataset,
                       const BackProjectionConfig& config,
                       Diagnostics* diag = nullptr, int threads = 0);

}  // namespace tomo
