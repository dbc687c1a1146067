#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "geopath/background_ensemble.hpp"

namespace geopath {

struct DeviationState {
  Eigen::Vector4d ell = Eigen::Vector4d::Zero();       ///< separation l^i
  Eigen::Vector4d ell_rate = Eigen::Vector4d::Zero();  ///< dl^i/dtau
  double tau = 0.0;
};

struct ActionPhase {
  double action = 0.0;  ///< S(j)
  double phase = 0.0;   ///< Phi(j) = S(j) / hbar, radians
};

struct DeviationTrajectory {
  std::size_t field_index = 0;
  std::vector<DeviationState> samples;  ///< uniform in tau, first entry is the initial state
  double step = 0.0;
  double action = 0.0;
  double phase = 0.0;
};

/// Tidal matrix A^i_m multiplying l^m in the deviation equation. Uses the sample's full
/// Riemann components when present, otherwise only R^1_010 (A^1_1 = R^1_010 (u^0)^2).
Eigen::Matrix4d tidal_matrix(const FieldSample& sample, const Eigen::Vector4d& worldline_velocity);

/// Integrates d^2 l^i/dtau^2 = -A^i_m l^m + f with classical RK4 at fixed step.
///
/// The sign is chosen so that a positive R^1_010 on a static worldline gives the oscillator
/// l'' + c^2 R l = 0. The step is t_span / round(t_span / dt), so the samples land exactly on
/// t_span. Throws DivergenceError (carrying tau) on the first non-finite state. The returned
/// trajectory carries S and Phi for the sample's constant frequency.
DeviationTrajectory integrate_deviation(const FieldSample& sample, const DeviationState& initial,
                                        const Eigen::Vector4d& worldline_velocity, double t_span, double dt,
                                        double hbar = 1.0);

/// l0 cos(omega t) + (v0/omega) sin(omega t); l0 + v0 t at omega = 0.
template <typename Scalar>
Scalar oscillator_closed_form(Scalar ell0, Scalar v0, Scalar omega, Scalar t) {
  if (omega == Scalar(0)) return ell0 + v0 * t;
  return ell0 * std::cos(omega * t) + v0 * std::sin(omega * t) / omega;
}

/// |d^2 l/dt^2 + c^2 R^1_010 l| / |l| for l = exp(k_b x^b + i omega t) built from the sample's
/// covector and frequency. Equals |c^2 R - omega^2|, zero exactly on the dispersion relation.
double exp_solution_residual(const FieldSample& sample, const Eigen::Vector4d& x, double t, double light_speed);

/// Constant frequency: Phi = omega * t_span, S = hbar * Phi.
ActionPhase accumulate_action(const FieldSample& sample, double hbar, double t_span);

/// Midpoint rule for Phi = integral of omega(tau) over the trajectory's steps; S = hbar * Phi.
ActionPhase accumulate_action(const DeviationTrajectory& trajectory, const std::function<double(double)>& omega,
                              double hbar);

/// Midpoint rule over [0, t_span] with `steps` equal intervals.
ActionPhase accumulate_action(const std::function<double(double)>& omega, double hbar, double t_span,
                              std::size_t steps);

/// S_0 = sum_j S(j), compensated (Neumaier) summation. Rejects an empty list.
double total_action(std::span<const double> actions);

/// Plane-wave action p^m g_mn x^n. Coincides with hbar * omega * t for p = hbar * (omega/c, 0, 0, 0)
/// and x = (c t, 0, 0, 0); kept as a cross-check only.
double plane_wave_action(const Eigen::Vector4d& momentum, const Eigen::Vector4d& position,
                         const Eigen::Matrix4d& metric = Eigen::Vector4d(1, -1, -1, -1).asDiagonal());

}  // namespace geopath
