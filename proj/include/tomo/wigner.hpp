#pragma once

#include "tomo/density_matrix.hpp"
#include "tomo/types.hpp"

namespace tomo {

// W(x, p) of a truncated Fock-basis density matrix, evaluated at a
// single phase-space point under the [x,p] = i/2 convention
// (vacuum: W = (2/pi) exp(-2(x^2 + p^2))).
double wigner_point(const DensityMatrix& rho, double x, double p);

WignerGrid wigner_from_rho(const DensityMatrix& rho, const WignerGridSpec& spec,
                           int threads = 0);

}  // namespace tomo
