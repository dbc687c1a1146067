#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "geopath/deviation_dynamics.hpp"

namespace geopath {

enum class LawKind { interval, velocity, action_ratio, energy };

struct GaussianLaw {
  double sigma = 1.0;
  LawKind kind = LawKind::interval;
  /// Interval law only: use exp(-dl^2 / (2 sigma^2)) instead of exp(-dl^2 / (2 sigma)).
  bool conventional_interval = false;
};

/// (1/(sigma sqrt(2 pi))) exp(-dl^2 / (2 sigma)), or with 2 sigma^2 when conventional_interval is set.
/// This is a density value; at dl = 0 it is 1/(sigma sqrt(2 pi)), not 1.
double interval_probability(double delta_ell, const GaussianLaw& law);

/// (1/(sigma sqrt(2 pi))) exp(-du^2 / (2 sigma^2)).
double velocity_probability(double delta_u, const GaussianLaw& law);

/// (1/(sigma sqrt(2 pi))) exp(-S / S0). Rejects S0 <= 0.
double action_probability(double action, double action_scale, double sigma);

/// (1/(sigma sqrt(2 pi))) exp(-W / (2 sigma^2)).
double energy_probability(double energy, double sigma);

/// Action scale of a particle of mass m in a background of dispersion sigma: S0 = m sigma^2 / 2.
double particle_action_scale(double mass, double sigma);

class IntervalMetric {
 public:
  /// diag(+1, -1, -1, -1)
  IntervalMetric();
  /// Rejects a matrix that is not symmetric within 1e-12.
  explicit IntervalMetric(const Eigen::Matrix4d& metric);

  const Eigen::Matrix4d& matrix() const noexcept { return metric_; }

  /// dl^2 = g_ik dx^i dx^k
  double squared_interval(const Eigen::Vector4d& dx) const;
  /// sqrt(|dl^2|), the magnitude used for timelike and spacelike separations alike.
  double interval(const Eigen::Vector4d& dx) const;

 private:
  Eigen::Matrix4d metric_;
};

struct VelocityReport {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;      ///< unbiased sample variance
  double ks_statistic = 0.0;  ///< NaN when degenerate
  double ks_critical_95 = 0.0;  ///< 1.36 / sqrt(n)
  bool degenerate = false;    ///< zero variance, no Gaussian can be fitted
  bool ks_pass = false;
};

/// Moments of the samples and the Kolmogorov-Smirnov distance to the Gaussian velocity law with
/// the sample mean and standard deviation. Needs at least 100 samples.
VelocityReport velocity_sample_check(std::span<const double> velocities);

/// velocity_sample_check on the terminal dl^component/dtau of every trajectory.
VelocityReport empirical_velocity_check(std::span<const DeviationTrajectory> trajectories, int component = 1);

struct PropertyOutcome {
  std::string name;
  bool passed = false;
  bool asserted = true;  ///< false for properties that are reported but not required
  std::string detail;
};

/// Checks the interval law against its qualitative properties:
///   maximum_at_zero      density peaks at dl = 0 with value 1/(sigma sqrt(2 pi))
///   monotone_decrease    density strictly decreases in |dl| and is even
///   vanishes_at_infinity density below 1e-12 at dl = 1000 sigma
///   interval_additivity  P21 + P32 <= P31 for three spacelike-separated events (reported only)
std::vector<PropertyOutcome> property_suite(const GaussianLaw& law, const IntervalMetric& metric);

}  // namespace geopath
