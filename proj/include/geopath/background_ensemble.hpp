#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace geopath {

/// Components R^i_{kmn} of a Riemann tensor at a point on the reference worldline.
class RiemannComponents {
 public:
  double& operator()(int i, int k, int m, int n) { return data_[flat(i, k, m, n)]; }
  double operator()(int i, int k, int m, int n) const { return data_[flat(i, k, m, n)]; }

  /// Tidal matrix A^i_m = R^i_{kmn} u^k u^n for worldline velocity u.
  Eigen::Matrix4d tidal_matrix(const Eigen::Vector4d& velocity) const;

 private:
  static std::size_t flat(int i, int k, int m, int n) { return static_cast<std::size_t>(((i * 4 + k) * 4 + m) * 4 + n); }
  std::array<double, 256> data_{};
};

/// One random background field j.
struct FieldSample {
  std::size_t index = 1;
  double curvature_r1010 = 0.0;                        ///< 1/length^2
  std::optional<RiemannComponents> full_curvature;     ///< when set, overrides the R^1_010-only tidal term
  double omega = 0.0;                                  ///< 1/time
  Eigen::Vector4d wave_covector = Eigen::Vector4d::Zero();  ///< (omega/c, k_1, k_2, k_3)
  double stochastic_f = 0.0;                           ///< length/time^2
};

struct HalfNormal {
  double scale = 1.0;
};
struct LogUniform {
  double lo = 1.0;
  double hi = 2.0;
};
struct Delta {
  double value = 0.0;
};
using CurvatureDistribution = std::variant<HalfNormal, LogUniform, Delta>;

struct EnsembleConfig {
  std::size_t count = 1;
  CurvatureDistribution curvature = HalfNormal{};
  std::uint64_t seed = 0;
  double light_speed = 1.0;
  double stochastic_f = 0.0;

  /// Throws ConfigError on non-positive count, scale, bounds or light speed.
  void validate() const;
};

/// omega = c * sqrt(R^1_010). Negative curvature is a DomainError rather than clamped.
double frequency_of(double curvature_r1010, double light_speed);
double frequency_of(const FieldSample& sample, double light_speed);

/// Field j of the ensemble; depends only on (seed, distribution, j).
FieldSample sample_field(const EnsembleConfig& config, std::size_t index);

/// Fields 1..count. Output is identical for every thread count.
std::vector<FieldSample> sample_ensemble(const EnsembleConfig& config, unsigned threads = 1);

}  // namespace geopath
