#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace geopath {

enum class Boundary { periodic, absorbing };

/// Complex amplitudes on a uniform 1D grid, x_i = x0 + i dx.
struct WaveField {
  Eigen::VectorXcd psi;
  Eigen::VectorXd potential;  ///< U(x_i), same length as psi
  double x0 = 0.0;
  double dx = 1.0;
  double mass = 1.0;
  double action_scale = 0.5;  ///< S0; the evolution uses 2 S0 where Schrodinger uses hbar
  double time = 0.0;

  Eigen::Index size() const noexcept { return psi.size(); }
  double position(Eigen::Index i) const noexcept { return x0 + static_cast<double>(i) * dx; }
  double effective_hbar() const noexcept { return 2.0 * action_scale; }
  /// sum |psi|^2 dx
  double norm() const;
  /// Throws InvalidInput unless size >= 8, dx, mass, S0 > 0, potential sized to match and all finite.
  void validate() const;
};

/// psi = a exp(iS/2S0) split into amplitude and a continuous action representative.
struct MadelungFields {
  Eigen::VectorXd amplitude;
  Eigen::VectorXd action;
};

/// psi_i = a_i exp(i S_i / (2 S0)) with zero potential.
WaveField build_geometric_wavefunction(const Eigen::VectorXd& amplitude, const Eigen::VectorXd& action,
                                       double action_scale, double x0, double dx, double mass);

/// a = |psi|, S = 2 S0 * phase unwrapped along the grid from the first point.
/// Throws DiagnosticError at the first point with |psi| <= threshold (a node).
MadelungFields madelung_decompose(const WaveField& field, double threshold = 1e-8);

/// First derivative: central differences inside, second-order one-sided at both ends.
Eigen::VectorXd gradient(const Eigen::VectorXd& f, double dx);
/// Second derivative: three-point stencil inside, second-order one-sided at both ends.
Eigen::VectorXd second_derivative(const Eigen::VectorXd& f, double dx);

/// dS/dt + (dS/dx)^2 / (2m) + U, pointwise.
Eigen::VectorXd hamilton_jacobi_residual(const Eigen::VectorXd& action, const Eigen::VectorXd& potential,
                                         double mass, const Eigen::VectorXd& action_rate, double dx);

/// da^2/dt + d/dx(a^2 (dS/dx) / m), pointwise.
Eigen::VectorXd continuity_residual(const Eigen::VectorXd& density, const Eigen::VectorXd& action, double mass,
                                    const Eigen::VectorXd& density_rate, double dx);

/// Q = -(2 S0)^2 / (2m) * a'' / a. Madelung splitting gives HJ residual + Q = 0.
Eigen::VectorXd quantum_potential(const Eigen::VectorXd& amplitude, double mass, double action_scale, double dx);

struct EvolveOptions {
  Boundary boundary = Boundary::periodic;
  /// Absorbing boundary: fraction of the grid at each end carrying the absorbing potential
  /// -i W0 ((d - edge)/width)^2.
  double absorb_fraction = 0.1;
  double absorb_strength = 1.0;  ///< W0, energy units
  /// Called with the current field every `snapshot_stride` steps (and at step 0) when set.
  std::size_t snapshot_stride = 0;
  std::function<void(const WaveField&, std::size_t step)> observer;
};

/// Throws ConfigError when dt max|U| / (2 S0) >= 0.5 or dt (2 S0) (pi/dx)^2 / (2m) >= 0.5.
void check_stability(const WaveField& field, double dt);

/// Advances i 2S0 dpsi/dt = -(4 S0^2 / 2m) psi'' + U psi by `steps` Crank-Nicolson steps
/// (trapezoidal rule on the generator). With periodic boundaries the update is unitary.
WaveField evolve(const WaveField& field, double dt, std::size_t steps, const EvolveOptions& options = {});

/// Standard Schrodinger evolution i hbar dpsi/dt = H psi; runs through evolve() with S0 = hbar/2.
Eigen::VectorXcd evolve_schrodinger(const Eigen::VectorXcd& psi, const Eigen::VectorXd& potential, double x0,
                                    double dx, double mass, double hbar, double dt, std::size_t steps,
                                    const EvolveOptions& options = {});

/// dpsi/dt = -i H psi / (2 S0) with the same discrete H the stepper uses.
Eigen::VectorXcd time_derivative(const WaveField& field, Boundary boundary = Boundary::periodic);

/// <x> and sqrt(<x^2> - <x>^2) under the density |psi|^2.
double position_mean(const WaveField& field);
double position_spread(const WaveField& field);

/// Gaussian packet with position spread `width`, center x_c and wavenumber k, unit norm.
WaveField gaussian_packet(Eigen::Index points, double x_min, double x_max, double center, double width,
                          double wavenumber, double mass, double action_scale);

}  // namespace geopath
