#pragma once

#include "netprobe/network_model.hpp"
#include "netprobe/probing.hpp"
#include "netprobe/reconstruction.hpp"
#include "netprobe/spectral.hpp"
#include "netprobe/types.hpp"

#include <filesystem>
#include <span>
#include <string>

namespace netprobe::io {

// {"n": int, "omega0": float, "edges": [[i, j, h], ...]}
std::string network_to_json(const NetworkSpec& spec);
// Throws Schema with the offending field named, or InvalidArgument for
// structural violations (self-edges, duplicates).
NetworkSpec network_from_json(const std::string& text);

NetworkSpec load_network(const std::filesystem::path& path);
void save_network(const NetworkSpec& spec, const std::filesystem::path& path);

// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

// 17 significant digits.
std::string format_double(double value);

std::string matrix_csv(const Matrix& m);
Matrix matrix_from_csv(const std::string& text);

std::string spectrum_csv(const SampledSpectrum& spectrum);
std::string comb_csv(const SpectralComb& comb);
std::string series_csv(std::span<const double> t, std::span<const double> mean_n);
std::string scan_csv(const ScanResult& scan);
std::string detection_json(const DetectionResult& detection);

std::string report_json(const ReconstructionReport& report);
// Reads back the adjacency estimate ("A") from a report.
Matrix adjacency_from_report_json(const std::string& text);

// Long format: i,j,a_est,a_true,diff
std::string difference_csv(const Matrix& a_est, const Matrix& a_true);

std::string comparison_json(const Comparison& c);

}  // namespace netprobe::io
