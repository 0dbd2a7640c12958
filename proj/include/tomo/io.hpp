#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "tomo/density_matrix.hpp"
#include "tomo/maxlik.hpp"
#include "tomo/simulate.hpp"
#include "tomo/types.hpp"

namespace tomo {

inline constexpr const char* kDatasetFormat = "tomo.dataset.v1";
inline constexpr const char* kRhoFormat = "tomo.rho.v1";
inline constexpr const char* kWignerFormat = "tomo.wigner.v1";
inline constexpr const char* kUncertaintyFormat = "tomo.uncertainty.v1";
inline constexpr const char* kDiagnosticsFormat = "tomo.diagnostics.v1";

enum class PhaseUnit { Radians, Degrees };

struct IngestOptions {
  PhaseUnit phase_unit = PhaseUnit::Radians;
  char delimiter = ',';
};

// Text dataset: one "theta<delim>x" record per line, optional single
// header line auto-detected. eta comes from the caller, never the file.
QuadratureDataset ingest_dataset(const std::filesystem::path& path,
                                 const IngestOptions& options = {},
                                 double eta = 1.0);

// Doubles printed with 17 significant digits so a write/read cycle is
// bit-exact.
void write_dataset(const std::filesystem::path& path,
                   const QuadratureDataset& ds, char delimiter = ',');

// All structured artifacts are JSON with a format version string and
// the full run configuration echoed under "config".
nlohmann::json density_matrix_to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(const nlohmann::json& j);

nlohmann::json wigner_grid_to_json(const WignerGrid& grid);
WignerGrid wigner_grid_from_json(const nlohmann::json& j);

// Writes to a temporary file in the same directory, then renames, so a
// failed run never leaves a partial artifact behind.
void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content);
void atomic_write_json(const std::filesystem::path& path,
                       const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace tomo
