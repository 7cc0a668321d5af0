#include "netprobe/gaussian_dynamics.hpp"

#include "netprobe/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>

namespace netprobe {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

void check_frequency(double omega_s) {
  if (!(omega_s > 0.0) || !std::isfinite(omega_s)) invalid("probe frequency must be positive and finite");
}

struct ProbeBlock {
  double qq;
  double pp;
  double qp;
};

ProbeBlock probe_block(const ProbeInit& init, double omega_s) {
  const double vq = 1.0 / (2.0 * omega_s);
  const double vp = omega_s / 2.0;
  if (const auto* sq = std::get_if<probe::SqueezedVacuum>(&init)) {
    double c = std::cosh(2.0 * sq->r);
    double s = std::sinh(2.0 * sq->r);
    return {vq * (c - s * std::cos(sq->phi)), vp * (c + s * std::cos(sq->phi)),
            -s * std::sin(sq->phi) / 2.0};
  }
  if (const auto* th = std::get_if<probe::Thermal>(&init)) {
    double f = 2.0 * thermal_occupation(omega_s, th->temperature) + 1.0;
    return {vq * f, vp * f, 0.0};
  }
  return {vq, vp, 0.0};
}

}  // namespace

TotalSystem assemble_total(const AdjacencyMatrix& a, double omega_s, double k, const NodeSet& nodes) {
  check_frequency(omega_s);
  if (!(k >= 0.0) || !std::isfinite(k)) invalid("coupling k must be non-negative and finite");
  validate_node_set(nodes, a.dim());
  const auto n = static_cast<Eigen::Index>(a.dim());
  TotalSystem sys;
  sys.omega_s = omega_s;
  sys.k = k;
  sys.nodes = nodes;
  sys.a_tot = Matrix::Zero(n + 1, n + 1);
  sys.a_tot(0, 0) = omega_s * omega_s / 2.0;
  sys.a_tot.bottomRightCorner(n, n) = a.values();
  for (auto j : nodes) {
    auto c = static_cast<Eigen::Index>(j) + 1;
    sys.a_tot(0, c) = sys.a_tot(c, 0) = k / 2.0;
  }
  validate_stability(sys.a_tot);
  return sys;
}

void validate_probe_init(const ProbeInit& init) {
  if (const auto* sq = std::get_if<probe::SqueezedVacuum>(&init)) {
    if (!std::isfinite(sq->r) || !std::isfinite(sq->phi)) invalid("squeezing r and phi must be finite");
  } else if (const auto* th = std::get_if<probe::Thermal>(&init)) {
    if (!(th->temperature >= 0.0) || !std::isfinite(th->temperature)) {
      invalid("probe temperature must be non-negative and finite");
    }
  }
}

double initial_occupation(const ProbeInit& init, double omega_s) {
  validate_probe_init(init);
  check_frequency(omega_s);
  if (const auto* sq = std::get_if<probe::SqueezedVacuum>(&init)) {
    double s = std::sinh(sq->r);
    return s * s;
  }
  if (const auto* th = std::get_if<probe::Thermal>(&init)) {
    return thermal_occupation(omega_s, th->temperature);
  }
  return 0.0;
}

GaussianState initial_state(const ProbeInit& init, double omega_s, const EigenSystem& eig,
                            double temperature) {
  validate_probe_init(init);
  check_frequency(omega_s);
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    invalid("temperature must be non-negative and finite");
  }
  const auto n = static_cast<Eigen::Index>(eig.size());
  const Eigen::Index m = n + 1;
  GaussianState st;
  st.mean = Vector::Zero(2 * m);
  st.cov = Matrix::Zero(2 * m, 2 * m);

  auto pb = probe_block(init, omega_s);
  st.cov(0, 0) = pb.qq;
  st.cov(m, m) = pb.pp;
  st.cov(0, m) = st.cov(m, 0) = pb.qp;

  Vector dq(n);
  Vector dp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double w = eig.omegas(i);
    double f = 2.0 * thermal_occupation(w, temperature) + 1.0;
    dq(i) = f / (2.0 * w);
    dp(i) = f * w / 2.0;
  }
  const Matrix& k = eig.k_matrix;
  st.cov.block(1, 1, n, n) = k * dq.asDiagonal() * k.transpose();
  st.cov.block(m + 1, m + 1, n, n) = k * dp.asDiagonal() * k.transpose();
  return st;
}

Propagator::Propagator(const TotalSystem& sys) {
  validate_stability(sys.a_tot);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sys.a_tot);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "eigendecomposition of the total system failed");
  }
  u_ = solver.eigenvectors();
  nu_ = (2.0 * solver.eigenvalues().array()).sqrt().matrix();
}

Matrix Propagator::symplectic(double t) const {
  const auto m = nu_.size();
  Vector c = (nu_.array() * t).cos().matrix();
  Vector s = (nu_.array() * t).sin().matrix();
  Matrix out(2 * m, 2 * m);
  Matrix cc = u_ * c.asDiagonal() * u_.transpose();
  out.topLeftCorner(m, m) = cc;
  out.bottomRightCorner(m, m) = cc;
  out.topRightCorner(m, m) = u_ * (s.array() / nu_.array()).matrix().asDiagonal() * u_.transpose();
  out.bottomLeftCorner(m, m) = -(u_ * (s.array() * nu_.array()).matrix().asDiagonal() * u_.transpose());
  return out;
}

GaussianState Propagator::evolve(const GaussianState& state, double t) const {
  if (state.mean.size() != 2 * nu_.size() || state.cov.rows() != 2 * nu_.size()) {
    invalid("state dimension does not match the system");
  }
  Matrix s = symplectic(t);
  GaussianState out;
  out.mean = s * state.mean;
  out.cov = s * state.cov * s.transpose();
  out.cov = (out.cov + out.cov.transpose()) / 2.0;
  return out;
}

Propagator::ProbeMoments Propagator::probe_moments(const GaussianState& state, double t) const {
  const auto m = nu_.size();
  if (state.cov.rows() != 2 * m) invalid("state dimension does not match the system");
  Vector u0 = u_.row(0).transpose();
  Vector c = (nu_.array() * t).cos().matrix();
  Vector s = (nu_.array() * t).sin().matrix();
  // Row 0 of the position/momentum blocks of S(t).
  Vector alpha = u_ * (u0.array() * c.array()).matrix();
  Vector beta = u_ * (u0.array() * s.array() / nu_.array()).matrix();
  Vector gamma = -(u_ * (u0.array() * s.array() * nu_.array()).matrix());

  auto qq = state.cov.topLeftCorner(m, m);
  auto qp = state.cov.topRightCorner(m, m);
  auto pp = state.cov.bottomRightCorner(m, m);
  ProbeMoments out;
  out.qq = alpha.dot(qq * alpha) + 2.0 * alpha.dot(qp * beta) + beta.dot(pp * beta);
  out.pp = gamma.dot(qq * gamma) + 2.0 * gamma.dot(qp * alpha) + alpha.dot(pp * alpha);
  double mq = alpha.dot(state.mean.head(m)) + beta.dot(state.mean.tail(m));
  double mp = gamma.dot(state.mean.head(m)) + alpha.dot(state.mean.tail(m));
  out.qq += mq * mq;
  out.pp += mp * mp;
  return out;
}

GaussianState evolve(const TotalSystem& sys, const GaussianState& state, double t) {
  if (!(t >= 0.0)) invalid("t must be non-negative");
  return Propagator(sys).evolve(state, t);
}

double mean_occupation(const GaussianState& state, double omega_s) {
  check_frequency(omega_s);
  const auto m = static_cast<Eigen::Index>(state.modes());
  double q2 = state.cov(0, 0) + state.mean(0) * state.mean(0);
  double p2 = state.cov(m, m) + state.mean(m) * state.mean(m);
  return (omega_s * q2 + p2 / omega_s) / 2.0 - 0.5;
}

double total_energy(const TotalSystem& sys, const GaussianState& state) {
  const auto m = static_cast<Eigen::Index>(state.modes());
  Matrix qq = state.cov.topLeftCorner(m, m) + state.mean.head(m) * state.mean.head(m).transpose();
  Matrix pp = state.cov.bottomRightCorner(m, m) + state.mean.tail(m) * state.mean.tail(m).transpose();
  return pp.trace() / 2.0 + (sys.a_tot * qq).trace();
}

double uncertainty_margin(const GaussianState& state) {
  const auto m = static_cast<Eigen::Index>(state.modes());
  Eigen::MatrixXcd h = state.cov.cast<std::complex<double>>();
  const std::complex<double> half_i(0.0, 0.5);
  for (Eigen::Index a = 0; a < m; ++a) {
    h(a, m + a) += half_i;
    h(m + a, a) -= half_i;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double thermal_occupation(double omega, double temperature) {
  if (!(omega > 0.0)) invalid("frequency must be positive");
  if (!(temperature >= 0.0)) invalid("temperature must be non-negative");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(omega / temperature);
}

double predicted_occupation(double t, double j_at_omega_s, double omega_s, double temperature,
                            double n0) {
  check_frequency(omega_s);
  double decay = std::exp(-j_at_omega_s / omega_s * t);
  return decay * n0 + thermal_occupation(omega_s, temperature) * (1.0 - decay);
}

}  // namespace netprobe
