// Small statistics helpers for the test suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace stat_utils {

// Upper critical value of chi^2 with `dof` degrees of freedom at upper
// tail probability alpha, via the Wilson-Hilferty approximation.
inline double chi2_critical(int dof, double alpha) {
  // z for upper tail alpha (alpha in {1e-3, 1e-2, 5e-2} is enough here)
  double z;
  if (alpha <= 1.1e-3) z = 3.090232306167814;
  else if (alpha <= 1.1e-2) z = 2.3263478740408408;
  else z = 1.6448536269514722;
  double a = 2.0 / (9.0 * dof);
  double c = 1.0 - a + z * std::sqrt(a);
  return dof * c * c * c;
}

// Chi^2 goodness-of-fit of samples against a density, with equal-width
// bins on [lo, hi] and low-expectation bins merged into their
// neighbors. Returns the statistic and the surviving bin count.
struct Chi2Result {
  double statistic = 0.0;
  int bins = 0;
  int dof() const { return bins - 1; }
};

inline Chi2Result chi2_gof(const std::vector<double>& samples,
                           const std::function<double(double)>& density,
                           double lo, double hi, int n_bins) {
  std::vector<double> expected(n_bins, 0.0), observed(n_bins, 0.0);
  const double w = (hi - lo) / n_bins;
  // Simpson per bin for the expected mass.
  for (int b = 0; b < n_bins; ++b) {
    double a = lo + b * w;
    expected[b] = samples.size() * w / 6.0 *
                  (density(a) + 4.0 * density(a + w / 2) + density(a + w));
  }
  for (double x : samples) {
    if (x < lo || x >= hi) continue;
    observed[std::min(n_bins - 1, int((x - lo) / w))] += 1.0;
  }
  // Merge bins with expected < 5 into the running neighbor.
  std::vector<double> e, o;
  double ec = 0.0, oc = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    ec += expected[b];
    oc += observed[b];
    if (ec >= 5.0) {
      e.push_back(ec);
      o.push_back(oc);
      ec = oc = 0.0;
    }
  }
  if (ec > 0.0 && !e.empty()) {
    e.back() += ec;
    o.back() += oc;
  }
  Chi2Result r;
  r.bins = int(e.size());
  for (std::size_t b = 0; b < e.size(); ++b) {
    double d = o[b] - e[b];
    r.statistic += d * d / e[b];
  }
  return r;
}

// Asymptotic Kolmogorov distribution Q(lambda) = 2 sum (-1)^{k-1}
// exp(-2 k^2 lambda^2); p-value of the KS statistic.
inline double ks_pvalue(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
    s += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

// Two-sample KS test p-value.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  double ne = double(a.size()) * b.size() / (a.size() + b.size());
  return ks_pvalue((std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d);
}

// One-sample KS against a CDF.
inline double ks_one_sample(std::vector<double> a,
                            const std::function<double(double)>& cdf) {
  std::sort(a.begin(), a.end());
  double d = 0.0;
  const double n = double(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double c = cdf(a[i]);
    d = std::max({d, std::abs(c - double(i) / n), std::abs(c - double(i + 1) / n)});
  }
  double sn = std::sqrt(n);
  return ks_pvalue((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace stat_utils
