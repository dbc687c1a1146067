#include "geopath/interval_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "geopath/errors.hpp"

namespace geopath {

namespace {

double gaussian_prefactor(double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
  return 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

double interval_probability(double delta_ell, const GaussianLaw& law) {
  if (law.kind != LawKind::interval) throw InvalidInput("interval_probability: law kind must be interval");
  const double norm = gaussian_prefactor(law.sigma);
  const double denom = law.conventional_interval ? 2.0 * law.sigma * law.sigma : 2.0 * law.sigma;
  return norm * std::exp(-delta_ell * delta_ell / denom);
}

double velocity_probability(double delta_u, const GaussianLaw& law) {
  if (law.kind != LawKind::velocity) throw InvalidInput("velocity_probability: law kind must be velocity");
  return gaussian_prefactor(law.sigma) * std::exp(-delta_u * delta_u / (2.0 * law.sigma * law.sigma));
}

double action_probability(double action, double action_scale, double sigma) {
  if (!(action_scale > 0.0)) throw InvalidInput("action_probability: S0 must be positive");
  return gaussian_prefactor(sigma) * std::exp(-action / action_scale);
}

double energy_probability(double energy, double sigma) {
  return gaussian_prefactor(sigma) * std::exp(-energy / (2.0 * sigma * sigma));
}

double particle_action_scale(double mass, double sigma) { return 0.5 * mass * sigma * sigma; }

IntervalMetric::IntervalMetric() : metric_(Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal()) {}

IntervalMetric::IntervalMetric(const Eigen::Matrix4d& metric) : metric_(metric) {
  if (!metric.allFinite() || (metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidInput("IntervalMetric: metric must be finite and symmetric");
  }
}

double IntervalMetric::squared_interval(const Eigen::Vector4d& dx) const { return dx.dot(metric_ * dx); }

double IntervalMetric::interval(const Eigen::Vector4d& dx) const { return std::sqrt(std::abs(squared_interval(dx))); }

VelocityReport velocity_sample_check(std::span<const double> velocities) {
  if (velocities.size() < 100) throw InvalidInput("velocity check needs at least 100 samples");
  VelocityReport r;
  r.count = velocities.size();
  const auto n = static_cast<double>(r.count);

  double sum = 0.0;
  for (double v : velocities) sum += v;
  r.mean = sum / n;
  double ss = 0.0;
  for (double v : velocities) ss += (v - r.mean) * (v - r.mean);
  r.variance = ss / (n - 1.0);
  r.ks_critical_95 = 1.36 / std::sqrt(n);

  if (!(r.variance > 0.0)) {
    r.degenerate = true;
    r.ks_statistic = std::numeric_limits<double>::quiet_NaN();
    return r;
  }

  std::vector<double> sorted(velocities.begin(), velocities.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(r.variance);
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf((sorted[i] - r.mean) / sd);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, hi - f, f - lo});
  }
  r.ks_statistic = d;
  r.ks_pass = d < r.ks_critical_95;
  return r;
}

VelocityReport empirical_velocity_check(std::span<const DeviationTrajectory> trajectories, int component) {
  if (component < 0 || component > 3) throw InvalidInput("empirical_velocity_check: component must be 0..3");
  if (trajectories.size() < 100) throw InvalidInput("empirical_velocity_check: need at least 100 trajectories");
  std::vector<double> terminal;
  terminal.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    if (t.samples.empty()) throw InvalidInput("empirical_velocity_check: empty trajectory");
    terminal.push_back(t.samples.back().ell_rate(component));
  }
  return velocity_sample_check(terminal);
}

std::vector<PropertyOutcome> property_suite(const GaussianLaw& law, const IntervalMetric& metric) {
  if (law.kind != LawKind::interval) throw InvalidInput("property_suite: law kind must be interval");
  if (!(law.sigma > 0.0)) throw InvalidInput("property_suite: sigma must be positive");
  const double s = law.sigma;
  auto p = [&](double d) { return interval_probability(d, law); };
  std::vector<PropertyOutcome> out;

  // Probe radii stay inside the range where the density is a normal (non-underflowed) number.
  const double reach = law.conventional_interval ? 6.0 * s : 6.0 * std::sqrt(s);
  std::vector<double> probes;
  for (int i = 1; i <= 24; ++i) probes.push_back(reach * i / 24.0);

  {
    PropertyOutcome o{"maximum_at_zero", true, true, {}};
    const double peak = p(0.0);
    const double expected = 1.0 / (s * std::sqrt(2.0 * std::numbers::pi));
    o.passed = std::abs(peak - expected) <= 1e-15 * expected;
    for (double d : probes) o.passed = o.passed && peak > p(d) && peak > p(-d);
    std::ostringstream msg;
    msg.precision(17);
    msg << "P(0)=" << peak << " expected " << expected;
    o.detail = msg.str();
    out.push_back(o);
  }
  {
    PropertyOutcome o{"monotone_decrease", true, true, {}};
    double prev = p(0.0);
    for (double d : probes) {
      const double cur = p(d);
      o.passed = o.passed && cur < prev && cur == p(-d);
      prev = cur;
    }
    o.detail = "strictly decreasing and even over " + std::to_string(probes.size()) + " probes";
    out.push_back(o);
  }
  {
    PropertyOutcome o{"vanishes_at_infinity", false, true, {}};
    const double far = p(1000.0 * s);
    o.passed = far < 1e-12;
    std::ostringstream msg;
    msg << "P(1000 sigma)=" << far;
    o.detail = msg.str();
    out.push_back(o);
  }
  {
    PropertyOutcome o{"interval_additivity", false, false, {}};
    const Eigen::Vector4d x1(0.0, 0.0, 0.0, 0.0);
    const Eigen::Vector4d x2(0.0, s, 0.0, 0.0);
    const Eigen::Vector4d x3(0.0, s, s, 0.0);
    const double l21 = metric.interval(x2 - x1);
    const double l32 = metric.interval(x3 - x2);
    const double l31 = metric.interval(x3 - x1);
    const double p21 = p(l21), p32 = p(l32), p31 = p(l31);
    o.passed = p21 + p32 <= p31;
    std::ostringstream msg;
    msg.precision(17);
    msg << "l21+l32=" << l21 + l32 << " l31=" << l31 << " P21+P32=" << p21 + p32 << " P31=" << p31;
    o.detail = msg.str();
    out.push_back(o);
  }
  return out;
}

}  // namespace geopath
