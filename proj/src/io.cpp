#include "netprobe/io.hpp"

#include "netprobe/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace netprobe::io {

namespace {

using ordered = nlohmann::ordered_json;

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorCode::Schema, msg); }

ordered matrix_rows(const Matrix& m) {
  ordered rows = ordered::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered row = ordered::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
ordered list(const std::vector<T>& v) {
  ordered out = ordered::array();
  for (const auto& x : v) out.push_back(x);
  return out;
}

std::size_t as_index(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) schema(where + " must be an integer");
  auto x = v.get<long long>();
  if (x < 0) schema(where + " must be non-negative");
  return static_cast<std::size_t>(x);
}

double as_number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) schema(where + " must be a number");
  return v.get<double>();
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string network_to_json(const NetworkSpec& spec) {
  ordered j;
  j["n"] = spec.n_nodes;
  j["omega0"] = spec.omega0;
  ordered edges = ordered::array();
  for (const auto& e : spec.edges) edges.push_back(ordered::array({e.i, e.j, e.h}));
  j["edges"] = std::move(edges);
  return j.dump(2) + "\n";
}

NetworkSpec network_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    schema(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) schema("network must be a JSON object");
  for (const char* field : {"n", "omega0", "edges"}) {
    if (!j.contains(field)) schema(std::string("missing field \"") + field + "\"");
  }
  NetworkSpec spec;
  spec.n_nodes = as_index(j["n"], "field \"n\"");
  spec.omega0 = as_number(j["omega0"], "field \"omega0\"");
  const auto& edges = j["edges"];
  if (!edges.is_array()) schema("field \"edges\" must be an array");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& item = edges[e];
    std::string where = "edges[" + std::to_string(e) + "]";
    if (!item.is_array() || item.size() != 3) schema(where + " must be [i, j, h]");
    spec.edges.push_back({as_index(item[0], where + "[0]"), as_index(item[1], where + "[1]"),
                          as_number(item[2], where + "[2]")});
  }
  spec.validate();
  spec.normalize();
  return spec;
}

NetworkSpec load_network(const std::filesystem::path& path) { return network_from_json(read_file(path)); }

void save_network(const NetworkSpec& spec, const std::filesystem::path& path) {
  NetworkSpec copy = spec;
  copy.validate();
  copy.normalize();
  write_atomic(path, network_to_json(copy));
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot move output into place at " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c) out += ',';
    out += "c" + std::to_string(c);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

Matrix matrix_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      schema("non-numeric CSV cell in matrix body");
    }
    first = false;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) schema("matrix CSV has no rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) schema("matrix CSV rows have unequal lengths");
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

std::string spectrum_csv(const SampledSpectrum& spectrum) {
  std::string out = "omega,J\n";
  for (const auto& s : spectrum.samples) out += format_double(s.omega) + "," + format_double(s.j) + "\n";
  return out;
}

std::string comb_csv(const SpectralComb& comb) {
  std::string out = "Omega,weight,J_binned\n";
  for (const auto& l : comb.lines) {
    out += format_double(l.omega) + "," + format_double(l.weight) + "," + format_double(l.binned) + "\n";
  }
  return out;
}

std::string series_csv(std::span<const double> t, std::span<const double> mean_n) {
  std::string out = "t,mean_n\n";
  for (std::size_t s = 0; s < t.size() && s < mean_n.size(); ++s) {
    out += format_double(t[s]) + "," + format_double(mean_n[s]) + "\n";
  }
  return out;
}

std::string scan_csv(const ScanResult& scan) {
  std::string out = "omega_S,J_est,status\n";
  for (const auto& p : scan.points) {
    out += format_double(p.omega) + "," + format_double(p.j) + "," + std::string(to_string(p.status)) + "\n";
  }
  return out;
}

std::string detection_json(const DetectionResult& detection) {
  ordered j;
  j["t"] = detection.scan.t;
  j["expected_count"] = detection.expected_count;
  j["found_count"] = detection.lines.size();
  j["partial"] = detection.partial;
  j["threshold"] = detection.threshold;
  ordered lines = ordered::array();
  for (const auto& l : detection.lines) {
    ordered item;
    item["omega"] = l.omega;
    item["height"] = l.height;
    item["prominence"] = l.prominence;
    item["above_threshold"] = detection.threshold > 0.0 ? l.height / detection.threshold : 0.0;
    lines.push_back(std::move(item));
  }
  j["lines"] = std::move(lines);
  return j.dump(2) + "\n";
}

std::string report_json(const ReconstructionReport& report) {
  const auto& d = report.diagnostics;
  ordered j;
  j["omegas"] = list(report.omegas_est);
  j["K"] = matrix_rows(report.k_est);
  j["A"] = matrix_rows(report.a_est.values());
  j["magnitudes"] = matrix_rows(report.magnitudes);
  ordered diag;
  diag["measurement_count"] = d.measurement_count;
  diag["detection_measurements"] = d.detection_measurements;
  diag["orthogonality_residual"] = d.orthogonality_residual;
  diag["band"] = ordered::array({d.band_lo, d.band_hi});
  diag["k"] = d.k;
  diag["detection_time"] = d.detection_time;
  diag["measurement_time"] = d.measurement_time;
  diag["recurrence_estimate"] = d.recurrence_estimate;
  diag["thermal_time"] = d.thermal_time;
  diag["thermal_reversal_found"] = d.thermal_reversal_found;
  diag["detection_nodes"] = list(d.detection_nodes);
  diag["lines_found"] = d.lines_found;
  diag["row_norm_flags"] = list(d.row_norm_flags);
  diag["fallback_modes"] = list(d.fallback_modes);
  ordered amb = ordered::array();
  for (auto [node, mode] : d.ambiguous_signs) amb.push_back(ordered::array({node, mode}));
  diag["ambiguous_signs"] = std::move(amb);
  diag["degenerate_modes"] = list(d.degenerate_modes);
  j["diagnostics"] = std::move(diag);
  return j.dump(2) + "\n";
}

Matrix adjacency_from_report_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    schema(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("A")) schema("missing field \"A\"");
  const auto& rows = j["A"];
  if (!rows.is_array() || rows.empty()) schema("field \"A\" must be a non-empty array of rows");
  const auto n = rows.size();
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (!rows[r].is_array() || rows[r].size() != n) schema("field \"A\" must be square");
    for (std::size_t c = 0; c < n; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(rows[r][c], "A[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

std::string difference_csv(const Matrix& a_est, const Matrix& a_true) {
  if (a_est.rows() != a_true.rows() || a_est.cols() != a_true.cols()) {
    throw Error(ErrorCode::InvalidArgument, "matrices must have equal dimensions");
  }
  std::string out = "i,j,a_est,a_true,diff\n";
  for (Eigen::Index i = 0; i < a_est.rows(); ++i) {
    for (Eigen::Index c = 0; c < a_est.cols(); ++c) {
      out += std::to_string(i) + "," + std::to_string(c) + "," + format_double(a_est(i, c)) + "," +
             format_double(a_true(i, c)) + "," + format_double(a_est(i, c) - a_true(i, c)) + "\n";
    }
  }
  return out;
}

std::string comparison_json(const Comparison& c) {
  ordered j;
  j["relative_frobenius"] = c.relative_frobenius;
  j["precision"] = c.precision;
  j["recall"] = c.recall;
  j["max_abs_diagonal_error"] = c.max_abs_diagonal_error;
  j["threshold"] = c.threshold;
  j["true_links"] = c.true_links;
  j["predicted_links"] = c.predicted_links;
  j["true_positives"] = c.true_positives;
  return j.dump(2) + "\n";
}

}  // namespace netprobe::io
