// Test-only oracles, independent of the library's evaluation paths.
#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using BF = boost::multiprecision::cpp_bin_float_50;

inline BF pi() { return 4 * atan(BF(1)); }

// Physicists' Hermite polynomial by the textbook recurrence, in
// 50-digit arithmetic.
inline BF hermite(int n, const BF& y) {
  if (n == 0) return BF(1);
  BF hm = 1, h = 2 * y;
  for (int k = 1; k < n; ++k) {
    BF hn = 2 * y * h - 2 * k * hm;
    hm = h;
    h = hn;
  }
  return h;
}

inline BF factorial(int n) {
  BF f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Direct closed-form oscillator wavefunction
// (2/pi)^{1/4} H_n(sqrt(2) x) / sqrt(2^n n!) exp(-x^2).
inline double psi_reference(int n, double x) {
  BF xb(x);
  BF val = pow(BF(2) / pi(), BF(1) / 4) * hermite(n, sqrt(BF(2)) * xb) /
           sqrt(pow(BF(2), n) * factorial(n)) * exp(-xb * xb);
  return val.convert_to<double>();
}

}  // namespace oracle
