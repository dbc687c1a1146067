#include "geopath/background_ensemble.hpp"

#include <cmath>
#include <numbers>

#include "geopath/errors.hpp"
#include "geopath/parallel.hpp"
#include "geopath/random.hpp"

namespace geopath {

Eigen::Matrix4d RiemannComponents::tidal_matrix(const Eigen::Vector4d& velocity) const {
  Eigen::Matrix4d tidal = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 4; ++i)
    for (int m = 0; m < 4; ++m)
      for (int k = 0; k < 4; ++k)
        for (int n = 0; n < 4; ++n) tidal(i, m) += (*this)(i, k, m, n) * velocity(k) * velocity(n);
  return tidal;
}

void EnsembleConfig::validate() const {
  if (count < 1) throw ConfigError("ensemble count must be >= 1", "count");
  if (!(light_speed > 0.0) || !std::isfinite(light_speed)) throw ConfigError("light speed must be positive", "c");
  if (!std::isfinite(stochastic_f)) throw ConfigError("stochastic f must be finite", "f");
  std::visit(
      [](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, HalfNormal>) {
          if (!(d.scale > 0.0) || !std::isfinite(d.scale))
            throw ConfigError("half_normal scale must be positive", "distribution.scale");
        } else if constexpr (std::is_same_v<D, LogUniform>) {
          if (!(d.lo > 0.0) || !std::isfinite(d.hi))
            throw ConfigError("log_uniform bounds must be positive", "distribution.lo");
          if (!(d.lo < d.hi)) throw ConfigError("log_uniform requires lo < hi", "distribution.hi");
        } else {
          // A point mass at zero is the flat-background ensemble.
          if (!(d.value >= 0.0) || !std::isfinite(d.value))
            throw ConfigError("delta value must be non-negative", "distribution.value");
        }
      },
      curvature);
}

double frequency_of(double curvature_r1010, double light_speed) {
  if (curvature_r1010 < 0.0 || std::isnan(curvature_r1010)) {
    throw DomainError("frequency_of: negative curvature R^1_010 gives an imaginary frequency");
  }
  return light_speed * std::sqrt(curvature_r1010);
}

double frequency_of(const FieldSample& sample, double light_speed) {
  return frequency_of(sample.curvature_r1010, light_speed);
}

namespace {

double draw_curvature(const CurvatureDistribution& dist, CounterStream& stream) {
  return std::visit(
      [&stream](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, HalfNormal>) {
          return d.scale * std::abs(stream.normal());
        } else if constexpr (std::is_same_v<D, LogUniform>) {
          const double lo = std::log(d.lo);
          return std::exp(lo + (std::log(d.hi) - lo) * stream.uniform());
        } else {
          return d.value;
        }
      },
      dist);
}

}  // namespace

FieldSample sample_field(const EnsembleConfig& config, std::size_t index) {
  CounterStream curvature_stream(config.seed, "ensemble.curvature", index);
  CounterStream direction_stream(config.seed, "ensemble.direction", index);

  FieldSample s;
  s.index = index;
  s.curvature_r1010 = draw_curvature(config.curvature, curvature_stream);
  s.omega = frequency_of(s.curvature_r1010, config.light_speed);
  s.stochastic_f = config.stochastic_f;

  // Spatial part of the covector: magnitude omega/c along a uniformly random direction.
  const double cos_theta = 2.0 * direction_stream.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * direction_stream.uniform();
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  const double k = s.omega / config.light_speed;
  s.wave_covector << k, k * sin_theta * std::cos(phi), k * sin_theta * std::sin(phi), k * cos_theta;
  return s;
}

std::vector<FieldSample> sample_ensemble(const EnsembleConfig& config, unsigned threads) {
  config.validate();
  std::vector<FieldSample> out(config.count);
  parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = sample_field(config, i + 1); });
  return out;
}

}  // namespace geopath
