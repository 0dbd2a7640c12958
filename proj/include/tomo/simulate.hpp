#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "tomo/density_matrix.hpp"
#include "tomo/maxlik.hpp"
#include "tomo/types.hpp"

namespace tomo {

struct StateSpec {
  struct Vacuum {};
  struct Fock {
    int n = 0;
  };
  struct Coherent {
    Complex alpha;
  };
  struct Superposition01 {
    Complex c0, c1;
  };
  struct ExplicitMatrix {
    DensityMatrix rho;
  };
  using Kind = std::variant<Vacuum, Fock, Coherent, Superposition01, ExplicitMatrix>;

  Kind kind = Vacuum{};
  int n_max = 10;

  // Truncated density matrix; throws if the construction-time checks
  // (coherent tail weight, superposition normalization) fail.
  DensityMatrix to_density_matrix() const;
};

struct PhaseSchedule {
  enum class Mode { UniformRandom, FixedSet };
  Mode mode = Mode::UniformRandom;
  std::vector<double> phases;  // FixedSet: record i gets phases[i % size]
};

struct SimulationPlan {
  std::int64_t n_samples = 1;
  PhaseSchedule schedule;
  double eta = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

QuadratureDataset sample_quadratures(const StateSpec& state,
                                     const SimulationPlan& plan);

// Tabulated quadrature density pr_theta(x) for a fixed state and
// phase, with inverse-CDF draws by linear interpolation. 4096-point
// grid on [-L, L], L = 6 * sqrt((2 n_eff + 1)/4).
class QuadratureSampler {
 public:
  QuadratureSampler(const DensityMatrix& rho_eta, double theta);
  double draw(double u) const;  // u in [0,1)
  double density(double x) const;

 private:
  std::vector<double> xs_, cdf_, pdf_;
};

struct BootstrapResult {
  Eigen::MatrixXd mean_abs_dev;  // <|rho_ML - rho'_k|> elementwise
  Eigen::MatrixXd std_dev;       // per-element standard deviation
  double trace_norm_mean = 0.0;  // <0.5 ||rho_ML - rho'_k||_1>
  Diagnostics diagnostics;
};

using ReplicaSeedFn = std::function<std::uint64_t(std::uint64_t, std::uint64_t)>;

BootstrapResult bootstrap_uncertainty(const DensityMatrix& rho_ml,
                                      const SimulationPlan& tmpl,
                                      int n_replicas,
                                      const ReconstructionConfig& recon_config,
                                      ReplicaSeedFn seed_fn = {});

}  // namespace tomo
