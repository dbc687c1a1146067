#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>

#include "geopath/background_ensemble.hpp"
#include "geopath/errors.hpp"

namespace geopath {

/// C * exp(i * phase) for one field.
struct PhaseFactor {
  std::size_t field_index = 0;
  double amplitude = 1.0;
  double phase = 0.0;
  std::complex<double> value{1.0, 0.0};
};

enum class Normalization { raw_sum, mean };

/// Which action scale divides S(j) in the phase: hbar, or the ensemble total S_0.
enum class PhaseScale { hbar, total_action };

struct KernelEstimate {
  std::complex<double> value;
  std::size_t ensemble_size = 0;
  double std_error = 0.0;  ///< standard error of the mean phase factor
};

/// value = C * exp(i S / scale). Rejects scale <= 0 and C < 0.
PhaseFactor phase_factor(double action, double scale, double amplitude = 1.0, std::size_t field_index = 0);

/// Sums phase factors in index order. raw_sum gives sum(value), mean gives sum(value)/J.
/// std_error = sqrt(sum |value - mean|^2 / (J-1)) / sqrt(J) in both modes (0 for J = 1).
KernelEstimate kernel_sum(std::span<const PhaseFactor> phases, Normalization normalization);

/// Free-particle propagator sqrt(m/(2 pi i hbar T)) exp(i m (xb-xa)^2 / (2 hbar T)), with
/// sqrt(1/i) = exp(-i pi/4). Positions may be complex, which continues the kernel analytically
/// off the real axis.
template <typename Position>
std::complex<double> analytic_free_kernel(double mass, double time, Position xa, Position xb, double hbar) {
  if (!(mass > 0.0) || !(time > 0.0) || !(hbar > 0.0)) {
    throw InvalidInput("analytic_free_kernel: mass, time and hbar must be positive");
  }
  using namespace std::complex_literals;
  const std::complex<double> dx = std::complex<double>(xb) - std::complex<double>(xa);
  const double modulus = std::sqrt(mass / (2.0 * std::numbers::pi * hbar * time));
  const std::complex<double> branch = std::polar(1.0, -std::numbers::pi / 4.0);
  return modulus * branch * std::exp(1i * mass * dx * dx / (2.0 * hbar * time));
}

/// Harmonic-oscillator (Mehler) propagator for U = m omega^2 x^2 / 2, valid for 0 < omega T < pi.
std::complex<double> harmonic_kernel(double mass, double omega, double time, double xa, double xb, double hbar);

struct LatticeGrid {
  double x_min = -6.0;
  double x_max = 6.0;
  std::size_t points = 3101;
  /// Width of the sin^2 window that switches the trapezoid weights off toward both edges.
  /// Without it the hard truncation of the oscillatory slice integrals dominates the error.
  double edge_taper = 2.0;
};

/// Time-sliced propagator with `slices` short-time kernels
///   K_eps(x', x) = sqrt(m/(2 pi i hbar eps)) exp(i [m (x'-x)^2/(2 eps) - eps (U(x') + U(x))/2] / hbar)
/// composed by trapezoidal integration over the slices-1 intermediate positions.
///
/// Throws DiagnosticError when the short-time phase advances more than pi per grid step across
/// the full grid width (aliasing), InvalidInput on a malformed grid.
std::complex<double> lattice_path_integral(const std::function<double(double)>& potential, double mass,
                                           double hbar, double time, double xa, double xb, std::size_t slices,
                                           const LatticeGrid& grid);

struct EnsembleKernelOptions {
  double t_span = 1.0;
  double hbar = 1.0;
  double amplitude = 1.0;
  Normalization normalization = Normalization::mean;
  PhaseScale scale = PhaseScale::hbar;
  unsigned threads = 1;
};

/// Samples the ensemble, takes S(j) = hbar omega(j) t_span, forms the phase factors and sums them.
KernelEstimate ensemble_kernel(const EnsembleConfig& config, const EnsembleKernelOptions& options);

}  // namespace geopath
