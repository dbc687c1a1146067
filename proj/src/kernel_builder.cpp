#include "geopath/kernel_builder.hpp"

#include <vector>

#include "geopath/deviation_dynamics.hpp"
#include "geopath/parallel.hpp"

namespace geopath {

using namespace std::complex_literals;

PhaseFactor phase_factor(double action, double scale, double amplitude, std::size_t field_index) {
  if (!(scale > 0.0)) throw InvalidInput("phase_factor: scale must be positive");
  if (!(amplitude >= 0.0)) throw InvalidInput("phase_factor: amplitude must be non-negative");
  const double phase = action / scale;
  return {field_index, amplitude, phase, std::polar(amplitude, phase)};
}

KernelEstimate kernel_sum(std::span<const PhaseFactor> phases, Normalization normalization) {
  if (phases.empty()) throw InvalidInput("kernel_sum: empty phase list");
  const auto count = static_cast<double>(phases.size());

  std::complex<double> sum = 0.0;
  for (const auto& p : phases) sum += p.value;
  const std::complex<double> mean = sum / count;

  double spread = 0.0;
  for (const auto& p : phases) spread += std::norm(p.value - mean);
  const double std_error = phases.size() > 1 ? std::sqrt(spread / (count - 1.0)) / std::sqrt(count) : 0.0;

  return {normalization == Normalization::mean ? mean : sum, phases.size(), std_error};
}

std::complex<double> harmonic_kernel(double mass, double omega, double time, double xa, double xb, double hbar) {
  if (!(mass > 0.0) || !(omega > 0.0) || !(time > 0.0) || !(hbar > 0.0)) {
    throw InvalidInput("harmonic_kernel: parameters must be positive");
  }
  const double s = std::sin(omega * time);
  if (!(omega * time < std::numbers::pi)) throw InvalidInput("harmonic_kernel: requires omega*T < pi");
  const double modulus = std::sqrt(mass * omega / (2.0 * std::numbers::pi * hbar * s));
  const double phase =
      mass * omega / (2.0 * hbar * s) * ((xa * xa + xb * xb) * std::cos(omega * time) - 2.0 * xa * xb);
  return modulus * std::polar(1.0, phase - std::numbers::pi / 4.0);
}

std::complex<double> lattice_path_integral(const std::function<double(double)>& potential, double mass,
                                           double hbar, double time, double xa, double xb, std::size_t slices,
                                           const LatticeGrid& grid) {
  if (!(mass > 0.0) || !(hbar > 0.0) || !(time > 0.0)) {
    throw InvalidInput("lattice_path_integral: mass, hbar and time must be positive");
  }
  if (slices < 1) throw InvalidInput("lattice_path_integral: need at least one slice");
  if (grid.points < 3 || !(grid.x_max > grid.x_min) || grid.edge_taper < 0.0) {
    throw InvalidInput("lattice_path_integral: grid needs >= 3 points on a non-empty interval");
  }

  const double eps = time / static_cast<double>(slices);
  const std::complex<double> prefactor =
      std::sqrt(mass / (2.0 * std::numbers::pi * hbar * eps)) * std::polar(1.0, -std::numbers::pi / 4.0);
  auto short_time = [&](double to, double from, double u_to, double u_from) {
    const double d = to - from;
    return prefactor * std::polar(1.0, (mass * d * d / (2.0 * eps) - eps * 0.5 * (u_to + u_from)) / hbar);
  };

  if (slices == 1) return short_time(xb, xa, potential(xb), potential(xa));

  const std::size_t n = grid.points;
  const double width = grid.x_max - grid.x_min;
  const double h = width / static_cast<double>(n - 1);
  const double phase_per_step = mass * width * h / (hbar * eps);
  if (phase_per_step > std::numbers::pi) {
    throw DiagnosticError("lattice_path_integral: grid too coarse, short-time phase advances " +
                          std::to_string(phase_per_step) + " rad per step across the grid (limit pi)");
  }

  std::vector<double> x(n), u(n), weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = grid.x_min + static_cast<double>(i) * h;
    u[i] = potential(x[i]);
    weight[i] = (i == 0 || i + 1 == n) ? 0.5 * h : h;
    if (grid.edge_taper > 0.0) {
      const double edge = std::min(x[i] - grid.x_min, grid.x_max - x[i]);
      if (edge < grid.edge_taper) {
        const double s = std::sin(0.5 * std::numbers::pi * edge / grid.edge_taper);
        weight[i] *= s * s;
      }
    }
  }

  // K_eps(x_i, x_k) = free(i - k) * g_i * g_k with g = exp(-i eps U / (2 hbar)); the free part is
  // Toeplitz, so only 2n-1 entries are stored.
  std::vector<std::complex<double>> free_part(2 * n - 1);
  for (std::size_t d = 0; d < 2 * n - 1; ++d) {
    const double sep = (static_cast<double>(d) - static_cast<double>(n - 1)) * h;
    free_part[d] = prefactor * std::polar(1.0, mass * sep * sep / (2.0 * eps * hbar));
  }
  std::vector<std::complex<double>> gate(n);
  for (std::size_t i = 0; i < n; ++i) gate[i] = std::polar(1.0, -eps * 0.5 * u[i] / hbar);

  const double ua = potential(xa);
  std::vector<std::complex<double>> amp(n), weighted(n);
  for (std::size_t i = 0; i < n; ++i) amp[i] = short_time(x[i], xa, u[i], ua);

  for (std::size_t slice = 2; slice < slices; ++slice) {
    for (std::size_t k = 0; k < n; ++k) weighted[k] = weight[k] * gate[k] * amp[k];
    for (std::size_t i = 0; i < n; ++i) {
      const std::complex<double>* row = free_part.data() + (n - 1 + i);
      double re = 0.0, im = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const std::complex<double> a = *(row - k);
        const std::complex<double> b = weighted[k];
        re += a.real() * b.real() - a.imag() * b.imag();
        im += a.real() * b.imag() + a.imag() * b.real();
      }
      amp[i] = gate[i] * std::complex<double>(re, im);
    }
  }

  const double ub = potential(xb);
  std::complex<double> result = 0.0;
  for (std::size_t k = 0; k < n; ++k) result += weight[k] * short_time(xb, x[k], ub, u[k]) * amp[k];
  return result;
}

KernelEstimate ensemble_kernel(const EnsembleConfig& config, const EnsembleKernelOptions& options) {
  if (!(options.hbar > 0.0)) throw InvalidInput("ensemble_kernel: hbar must be positive");
  const auto fields = sample_ensemble(config, options.threads);

  std::vector<double> actions(fields.size());
  parallel_for(fields.size(), options.threads,
               [&](std::size_t j) { actions[j] = accumulate_action(fields[j], options.hbar, options.t_span).action; });

  const double scale = options.scale == PhaseScale::hbar ? options.hbar : total_action(actions);
  std::vector<PhaseFactor> phases(fields.size());
  parallel_for(fields.size(), options.threads, [&](std::size_t j) {
    phases[j] = phase_factor(actions[j], scale, options.amplitude, fields[j].index);
  });
  return kernel_sum(phases, options.normalization);
}

}  // namespace geopath
