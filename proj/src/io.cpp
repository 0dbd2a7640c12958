#include "tomo/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <fstream>
#include <sstream>
#include <system_error>

namespace tomo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool parse_double(std::string_view s, double& out) {
  // Trim surrounding spaces; strtod-style parsing via from_chars.
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

QuadratureDataset ingest_dataset(const fs::path& path,
                                 const IngestOptions& options, double eta) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path.string());

  QuadratureDataset ds;
  ds.eta = eta;
  ds.source = path.string();

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> bad_lines;
  const double scale =
      options.phase_unit == PhaseUnit::Degrees ? std::numbers::pi / 180.0 : 1.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto pos = line.find(options.delimiter);
    double theta = 0.0, x = 0.0;
    bool ok = pos != std::string::npos &&
              parse_double(std::string_view(line).substr(0, pos), theta) &&
              parse_double(std::string_view(line).substr(pos + 1), x) &&
              std::isfinite(theta) && std::isfinite(x);
    if (!ok) {
      // A single non-numeric first line is a header.
      if (line_no == 1) continue;
      std::ostringstream os;
      os << "line " << line_no << ": '" << line << "'";
      bad_lines.push_back(os.str());
      if (bad_lines.size() >= 10) break;
      continue;
    }
    ds.records.emplace_back(theta * scale, x);
  }
  if (!bad_lines.empty()) {
    std::ostringstream os;
    os << "dataset parse failure in " << path.string() << ":";
    for (const auto& b : bad_lines) os << "\n  " << b;
    throw DataError(os.str());
  }
  if (ds.records.empty()) {
    throw DataError("dataset file has no records: " + path.string());
  }
  return ds;
}

void write_dataset(const fs::path& path, const QuadratureDataset& ds,
                   char delimiter) {
  std::ostringstream os;
  os << "theta" << delimiter << "x\n";
  for (const auto& r : ds.records) {
    os << format_double(r.theta) << delimiter << format_double(r.x) << "\n";
  }
  atomic_write_text(path, os.str());
}

json density_matrix_to_json(const DensityMatrix& rho) {
  json rows = json::array();
  for (int m = 0; m < rho.dim(); ++m) {
    json row = json::array();
    for (int n = 0; n < rho.dim(); ++n) {
      const Complex& z = rho.matrix(m, n);
      row.push_back(json::array({z.real(), z.imag()}));
    }
    rows.push_back(std::move(row));
  }
  return json{{"format", kRhoFormat}, {"n_max", rho.n_max()}, {"matrix", rows}};
}

DensityMatrix density_matrix_from_json(const json& j) {
  if (!j.contains("matrix")) throw DataError("rho json: missing 'matrix'");
  const auto& rows = j.at("matrix");
  const int d = int(rows.size());
  if (d < 1) throw DataError("rho json: empty matrix");
  Eigen::MatrixXcd m(d, d);
  for (int r = 0; r < d; ++r) {
    const auto& row = rows.at(r);
    if (int(row.size()) != d) throw DataError("rho json: ragged matrix");
    for (int c = 0; c < d; ++c) {
      const auto& z = row.at(c);
      m(r, c) = Complex(z.at(0).get<double>(), z.at(1).get<double>());
    }
  }
  return DensityMatrix(std::move(m));
}

json wigner_grid_to_json(const WignerGrid& grid) {
  json rows = json::array();
  for (int i = 0; i < grid.spec.nx; ++i) {
    json row = json::array();
    for (int j = 0; j < grid.spec.np; ++j) row.push_back(grid.at(i, j));
    rows.push_back(std::move(row));
  }
  return json{
      {"format", kWignerFormat},
      {"spec",
       {{"x_min", grid.spec.x_min},
        {"x_max", grid.spec.x_max},
        {"p_min", grid.spec.p_min},
        {"p_max", grid.spec.p_max},
        {"nx", grid.spec.nx},
        {"np", grid.spec.np}}},
      {"provenance", grid.provenance == WignerProvenance::FromDensityMatrix
                         ? "density_matrix"
                         : "backprojection"},
      {"values", rows}};
}

WignerGrid wigner_grid_from_json(const json& j) {
  WignerGrid g;
  const auto& s = j.at("spec");
  g.spec.x_min = s.at("x_min").get<double>();
  g.spec.x_max = s.at("x_max").get<double>();
  g.spec.p_min = s.at("p_min").get<double>();
  g.spec.p_max = s.at("p_max").get<double>();
  g.spec.nx = s.at("nx").get<int>();
  g.spec.np = s.at("np").get<int>();
  g.spec.validate();
  g.provenance = j.at("provenance").get<std::string>() == "density_matrix"
                     ? WignerProvenance::FromDensityMatrix
                     : WignerProvenance::FromBackProjection;
  const auto& rows = j.at("values");
  if (int(rows.size()) != g.spec.nx) throw DataError("wigner json: bad row count");
  g.values.resize(std::size_t(g.spec.nx) * g.spec.np);
  for (int i = 0; i < g.spec.nx; ++i) {
    const auto& row = rows.at(i);
    if (int(row.size()) != g.spec.np) throw DataError("wigner json: ragged rows");
    for (int k = 0; k < g.spec.np; ++k) g.at(i, k) = row.at(k).get<double>();
  }
  return g;
}

void atomic_write_text(const fs::path& path, const std::string& content) {
  fs::path dir = path.parent_path();
  if (dir.empty()) dir = ".";
  fs::path tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("rename failed for " + path.string() + ": " + ec.message());
  }
}

void atomic_write_json(const fs::path& path, const json& j) {
  atomic_write_text(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("json parse error in " + path.string() + ": " + e.what());
  }
}

}  // namespace tomo
