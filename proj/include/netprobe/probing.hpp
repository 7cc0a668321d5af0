#pragma once

#include "netprobe/gaussian_dynamics.hpp"
#include "netprobe/network_model.hpp"
#include "netprobe/spectral.hpp"
#include "netprobe/types.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace netprobe {

// The only view of a network that the probing protocol gets: attach the probe
// to `nodes`, prepare it in `init`, let it interact for time t with coupling k,
// and read back <n(t)>.
class NetworkOracle {
 public:
  virtual ~NetworkOracle() = default;

  virtual double measure(const NodeSet& nodes, double omega_s, double k, const ProbeInit& init,
                         double t) const = 0;

  // Number of nodes; the experimenter is assumed to know the network size.
  virtual std::size_t size() const = 0;
};

// Exact Gaussian simulation of a hidden network held at a fixed temperature.
class SimulatedOracle final : public NetworkOracle {
 public:
  SimulatedOracle(NetworkSpec hidden, double temperature);

  // The hidden file is read here and nowhere else.
  static std::unique_ptr<SimulatedOracle> from_file(const std::filesystem::path& path,
                                                    double temperature);

  double measure(const NodeSet& nodes, double omega_s, double k, const ProbeInit& init,
                 double t) const override;
  std::size_t size() const override { return n_; }

 private:
  std::size_t n_;
  AdjacencyMatrix adjacency_;
  Matrix net_cov_qq_;
  Matrix net_cov_pp_;
};

// Adds N(0, sigma^2) noise to every reading. Readings are deterministic per
// query: the noise is seeded from the seed and the query parameters.
class NoisyOracle final : public NetworkOracle {
 public:
  NoisyOracle(const NetworkOracle& inner, double sigma, std::uint64_t seed);

  double measure(const NodeSet& nodes, double omega_s, double k, const ProbeInit& init,
                 double t) const override;
  std::size_t size() const override { return inner_.size(); }

 private:
  const NetworkOracle& inner_;
  double sigma_;
  std::uint64_t seed_;
};

class CountingOracle final : public NetworkOracle {
 public:
  explicit CountingOracle(const NetworkOracle& inner) : inner_(inner) {}

  double measure(const NodeSet& nodes, double omega_s, double k, const ProbeInit& init,
                 double t) const override;
  std::size_t size() const override { return inner_.size(); }

  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  const NetworkOracle& inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

enum class Regime { Continuum, Discrete };

struct ProbeSchedule {
  std::vector<double> grid;
  double t = 0.0;
  double k = 0.0;
  ProbeInit init = probe::Vacuum{};
  double temperature = 0.0;
  NodeSet nodes{0};

  // Throws InvalidArgument unless t > 0, k > 0 and the grid is strictly increasing
  // with positive frequencies.
  void validate() const;

  Regime regime(double recurrence_estimate) const {
    return t < recurrence_estimate ? Regime::Continuum : Regime::Discrete;
  }

  // The decay law only holds after the non-Markovian transient, t >= 10 / w_max.
  bool past_transient() const;
};

// Evenly spaced grid with `steps` points including both ends.
std::vector<double> linear_grid(double lo, double hi, std::size_t steps);

// J(w_S) = (w_S / t) ln(dn(0) / dn(t)), dn = N(w_S) - <n>. Clipped at zero.
// Throws DegenerateContrast when |dn(0)| < 1e-9 max(1, N(w_S)) and SignFlip
// when dn changes sign between 0 and t.
double estimate_density_point(double n_t, double n_0, double omega_s, double t,
                              double temperature);

enum class PointStatus { Ok, DegenerateContrast, SignFlip };

std::string_view to_string(PointStatus status) noexcept;

struct ScanPoint {
  double omega = 0.0;
  double j = 0.0;
  PointStatus status = PointStatus::Ok;
};

struct ScanResult {
  std::vector<ScanPoint> points;
  double t = 0.0;

  // Valid points only, as a sampled spectrum.
  SampledSpectrum spectrum() const;
};

// One density estimate per grid frequency; failing points are kept with their
// status and J = 0.
ScanResult scan_density(const NetworkOracle& oracle, const ProbeSchedule& schedule);

struct DetectedLine {
  double omega = 0.0;
  double height = 0.0;      // estimated J at the refined peak
  double prominence = 0.0;  // height above the higher flanking minimum
};

struct DetectionResult {
  std::vector<DetectedLine> lines;  // descending frequency
  std::size_t expected_count = 0;
  bool partial = false;  // fewer lines than expected
  double threshold = 0.0;
  ScanResult scan;
};

// Local maxima of the discrete-regime scan curve that (a) rise above
// 3 x median(J) and (b) are not explained as sidelobes of a stronger line,
// refined by three-point parabolic interpolation. Throws GridTooCoarse when the
// grid cannot separate lines at this interaction time.
DetectionResult detect_eigenfrequencies(const NetworkOracle& oracle,
                                        const ProbeSchedule& schedule,
                                        std::size_t expected_count);

// Peak picking on an already measured curve; exposed for reuse and testing.
DetectionResult find_lines(const ScanResult& scan, std::size_t expected_count);

struct ThermalTime {
  double tau = 0.0;
  bool reversal_found = false;
  std::vector<double> occupation;  // <n> at each grid time
};

// First grid time after the transient (t >= 10 / w_S) at which the slope of
// <n(t)> changes sign. Without a reversal the grid end is returned and flagged.
ThermalTime measure_thermal_time(const NetworkOracle& oracle, const NodeSet& nodes,
                                 double omega_s, double k, const ProbeInit& init,
                                 std::span<const double> t_grid);

}  // namespace netprobe
