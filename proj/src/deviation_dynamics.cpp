#include "geopath/deviation_dynamics.hpp"

#include <complex>
#include <string>

#include "geopath/errors.hpp"

namespace geopath {

Eigen::Matrix4d tidal_matrix(const FieldSample& sample, const Eigen::Vector4d& worldline_velocity) {
  if (sample.full_curvature) return sample.full_curvature->tidal_matrix(worldline_velocity);
  Eigen::Matrix4d tidal = Eigen::Matrix4d::Zero();
  tidal(1, 1) = sample.curvature_r1010 * worldline_velocity(0) * worldline_velocity(0);
  return tidal;
}

namespace {

using Phase = Eigen::Matrix<double, 8, 1>;

struct DeviationRhs {
  Eigen::Matrix4d tidal;
  double forcing;

  Phase operator()(const Phase& y) const {
    Phase dy;
    dy.head<4>() = y.tail<4>();
    dy.tail<4>() = -tidal * y.head<4>() + Eigen::Vector4d::Constant(forcing);
    return dy;
  }
};

}  // namespace

DeviationTrajectory integrate_deviation(const FieldSample& sample, const DeviationState& initial,
                                        const Eigen::Vector4d& worldline_velocity, double t_span, double dt,
                                        double hbar) {
  if (!(dt > 0.0)) throw InvalidInput("integrate_deviation: dt must be positive");
  if (!(t_span >= dt)) throw InvalidInput("integrate_deviation: t_span must be >= dt");
  if (!(hbar > 0.0)) throw InvalidInput("integrate_deviation: hbar must be positive");

  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(t_span / dt)));
  const double h = t_span / static_cast<double>(steps);
  const DeviationRhs rhs{tidal_matrix(sample, worldline_velocity), sample.stochastic_f};

  DeviationTrajectory traj;
  traj.field_index = sample.index;
  traj.step = h;
  traj.samples.reserve(steps + 1);
  traj.samples.push_back(initial);

  Phase y;
  y << initial.ell, initial.ell_rate;
  for (std::size_t n = 1; n <= steps; ++n) {
    const Phase k1 = rhs(y);
    const Phase k2 = rhs(y + 0.5 * h * k1);
    const Phase k3 = rhs(y + 0.5 * h * k2);
    const Phase k4 = rhs(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double tau = initial.tau + static_cast<double>(n) * h;
    if (!y.allFinite()) {
      throw DivergenceError("integrate_deviation: non-finite state at tau=" + std::to_string(tau), tau);
    }
    traj.samples.push_back({y.head<4>(), y.tail<4>(), tau});
  }

  const ActionPhase ap = accumulate_action(sample, hbar, t_span);
  traj.action = ap.action;
  traj.phase = ap.phase;
  return traj;
}

double exp_solution_residual(const FieldSample& sample, const Eigen::Vector4d& x, double t, double light_speed) {
  const double spatial = sample.wave_covector.tail<3>().dot(x.tail<3>());
  const std::complex<double> exponent(spatial, sample.omega * t);
  const std::complex<double> ell = std::exp(exponent);
  const std::complex<double> i_omega(0.0, sample.omega);
  const double c2r = light_speed * light_speed * sample.curvature_r1010;
  if (std::isfinite(std::abs(ell)) && std::abs(ell) > 0.0) {
    const std::complex<double> second = i_omega * i_omega * ell;
    return std::abs(second + c2r * ell) / std::abs(ell);
  }
  // The ansatz over/underflows far from the origin; the ratio is position independent.
  return std::abs(i_omega * i_omega + c2r);
}

ActionPhase accumulate_action(const FieldSample& sample, double hbar, double t_span) {
  if (!(t_span > 0.0)) throw InvalidInput("accumulate_action: t_span must be positive");
  const double phase = sample.omega * t_span;
  return {hbar * phase, phase};
}

ActionPhase accumulate_action(const DeviationTrajectory& trajectory, const std::function<double(double)>& omega,
                              double hbar) {
  if (trajectory.samples.size() < 2) throw InvalidInput("accumulate_action: trajectory has no steps");
  double phase = 0.0;
  for (std::size_t n = 1; n < trajectory.samples.size(); ++n) {
    const double a = trajectory.samples[n - 1].tau;
    const double b = trajectory.samples[n].tau;
    phase += omega(0.5 * (a + b)) * (b - a);
  }
  return {hbar * phase, phase};
}

ActionPhase accumulate_action(const std::function<double(double)>& omega, double hbar, double t_span,
                              std::size_t steps) {
  if (!(t_span > 0.0)) throw InvalidInput("accumulate_action: t_span must be positive");
  if (steps == 0) throw InvalidInput("accumulate_action: steps must be positive");
  const double h = t_span / static_cast<double>(steps);
  double phase = 0.0;
  for (std::size_t n = 0; n < steps; ++n) phase += omega((static_cast<double>(n) + 0.5) * h) * h;
  return {hbar * phase, phase};
}

double total_action(std::span<const double> actions) {
  if (actions.empty()) throw InvalidInput("total_action: empty list");
  double sum = 0.0;
  double compensation = 0.0;
  for (double s : actions) {
    const double t = sum + s;
    if (std::abs(sum) >= std::abs(s))
      compensation += (sum - t) + s;
    else
      compensation += (s - t) + sum;
    sum = t;
  }
  return sum + compensation;
}

double plane_wave_action(const Eigen::Vector4d& momentum, const Eigen::Vector4d& position,
                         const Eigen::Matrix4d& metric) {
  return momentum.dot(metric * position);
}

}  // namespace geopath
