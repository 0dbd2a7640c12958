#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "tomo/errors.hpp"

namespace tomo {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reduces an angle into [0, 2*pi).
inline double reduce_phase(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  // fmod can return exactly 2*pi after the correction when theta is a
  // tiny negative number.
  if (t >= kTwoPi) t = 0.0;
  return t;
}

// One homodyne measurement setting: local-oscillator phase and the
// dimensionless quadrature value under the [x,p] = i/2 convention.
struct QuadraturePoint {
  double theta = 0.0;
  double x = 0.0;

  QuadraturePoint() = default;
  QuadraturePoint(double theta_in, double x_in)
      : theta(reduce_phase(theta_in)), x(x_in) {
    if (!std::isfinite(theta_in) || !std::isfinite(x_in)) {
      throw DataError("QuadraturePoint: non-finite (theta, x)");
    }
  }
};

using QuadratureRecord = QuadraturePoint;

// A full measurement run: the records plus the detector efficiency the
// run was taken at. eta is metadata carried from configuration, never
// from the data file itself.
struct QuadratureDataset {
  std::vector<QuadratureRecord> records;
  double eta = 1.0;
  std::string source;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct WignerGridSpec {
  double x_min = -2.0, x_max = 2.0;
  double p_min = -2.0, p_max = 2.0;
  int nx = 81, np = 81;

  void validate() const {
    if (nx < 2 || np < 2) throw UsageError("grid: nx and np must be >= 2");
    if (!(x_min < x_max) || !(p_min < p_max)) {
      throw UsageError("grid: empty ranges");
    }
  }
  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dp() const { return (p_max - p_min) / (np - 1); }
  double x_at(int i) const { return x_min + i * dx(); }
  double p_at(int j) const { return p_min + j * dp(); }
};

enum class WignerProvenance { FromDensityMatrix, FromBackProjection };

struct WignerGrid {
  WignerGridSpec spec;
  WignerProvenance provenance = WignerProvenance::FromDensityMatrix;
  // Row-major: values[i * np + j] = W(x_i, p_j).
  std::vector<double> values;

  double at(int i, int j) const { return values[i * spec.np + j]; }
  double& at(int i, int j) { return values[i * spec.np + j]; }

  // Trapezoid quadrature over the whole window.
  double integral() const;
};

// Non-fatal findings accumulated during a run; the CLI writes these to
// the sidecar diagnostics file.
struct Diagnostics {
  std::vector<std::string> warnings;
  std::vector<std::size_t> degenerate_records;

  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

}  // namespace tomo
