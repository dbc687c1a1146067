#include "geopath/wave_dynamics.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "geopath/errors.hpp"

namespace geopath {

using namespace std::complex_literals;
using SparseC = Eigen::SparseMatrix<std::complex<double>>;

double WaveField::norm() const { return psi.squaredNorm() * dx; }

void WaveField::validate() const {
  if (psi.size() < 8) throw InvalidInput("WaveField: grid needs at least 8 points");
  if (potential.size() != psi.size()) throw InvalidInput("WaveField: potential length differs from grid");
  if (!(dx > 0.0) || !(mass > 0.0) || !(action_scale > 0.0)) {
    throw InvalidInput("WaveField: dx, mass and S0 must be positive");
  }
  if (!psi.allFinite() || !potential.allFinite()) throw InvalidInput("WaveField: non-finite values");
}

WaveField build_geometric_wavefunction(const Eigen::VectorXd& amplitude, const Eigen::VectorXd& action,
                                       double action_scale, double x0, double dx, double mass) {
  if (amplitude.size() != action.size()) throw InvalidInput("build_geometric_wavefunction: length mismatch");
  if ((amplitude.array() < 0.0).any()) throw InvalidInput("build_geometric_wavefunction: negative amplitude");
  if (!(action_scale > 0.0)) throw InvalidInput("build_geometric_wavefunction: S0 must be positive");
  WaveField f;
  f.psi.resize(amplitude.size());
  for (Eigen::Index i = 0; i < amplitude.size(); ++i) {
    f.psi(i) = std::polar(amplitude(i), action(i) / (2.0 * action_scale));
  }
  f.potential = Eigen::VectorXd::Zero(amplitude.size());
  f.x0 = x0;
  f.dx = dx;
  f.mass = mass;
  f.action_scale = action_scale;
  return f;
}

MadelungFields madelung_decompose(const WaveField& field, double threshold) {
  const Eigen::Index n = field.size();
  MadelungFields m{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  double phase = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(field.psi(i));
    if (!(a > threshold)) {
      throw DiagnosticError("madelung_decompose: |psi| = " + std::to_string(a) + " at grid index " +
                            std::to_string(i) + " (x = " + std::to_string(field.position(i)) +
                            "), phase undefined at a node");
    }
    phase = i == 0 ? std::arg(field.psi(0)) : phase + std::arg(field.psi(i) / field.psi(i - 1));
    m.amplitude(i) = a;
    m.action(i) = 2.0 * field.action_scale * phase;
  }
  return m;
}

Eigen::VectorXd gradient(const Eigen::VectorXd& f, double dx) {
  const Eigen::Index n = f.size();
  if (n < 3) throw InvalidInput("gradient: need at least 3 points");
  Eigen::VectorXd g(n);
  g(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * dx);
  g(n - 1) = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * dx);
  g.segment(1, n - 2) = (f.tail(n - 2) - f.head(n - 2)) / (2.0 * dx);
  return g;
}

Eigen::VectorXd second_derivative(const Eigen::VectorXd& f, double dx) {
  const Eigen::Index n = f.size();
  if (n < 4) throw InvalidInput("second_derivative: need at least 4 points");
  const double h2 = dx * dx;
  Eigen::VectorXd d(n);
  d(0) = (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2;
  d(n - 1) = (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / h2;
  d.segment(1, n - 2) = (f.tail(n - 2) - 2.0 * f.segment(1, n - 2) + f.head(n - 2)) / h2;
  return d;
}

Eigen::VectorXd hamilton_jacobi_residual(const Eigen::VectorXd& action, const Eigen::VectorXd& potential,
                                         double mass, const Eigen::VectorXd& action_rate, double dx) {
  if (action.size() != potential.size() || action.size() != action_rate.size()) {
    throw InvalidInput("hamilton_jacobi_residual: length mismatch");
  }
  const Eigen::VectorXd ds = gradient(action, dx);
  return action_rate + ds.cwiseAbs2() / (2.0 * mass) + potential;
}

Eigen::VectorXd continuity_residual(const Eigen::VectorXd& density, const Eigen::VectorXd& action, double mass,
                                    const Eigen::VectorXd& density_rate, double dx) {
  if (density.size() != action.size() || density.size() != density_rate.size()) {
    throw InvalidInput("continuity_residual: length mismatch");
  }
  const Eigen::VectorXd flux = density.cwiseProduct(gradient(action, dx)) / mass;
  return density_rate + gradient(flux, dx);
}

Eigen::VectorXd quantum_potential(const Eigen::VectorXd& amplitude, double mass, double action_scale, double dx) {
  const double hbar = 2.0 * action_scale;
  return -(hbar * hbar / (2.0 * mass)) * second_derivative(amplitude, dx).cwiseQuotient(amplitude);
}

namespace {

/// H = -(hbar^2/2m) D2 + U - i W on the field's grid.
SparseC hamiltonian(const WaveField& field, Boundary boundary, const EvolveOptions* options) {
  const Eigen::Index n = field.size();
  const double hbar = field.effective_hbar();
  const double kinetic = hbar * hbar / (2.0 * field.mass * field.dx * field.dx);

  std::vector<Eigen::Triplet<std::complex<double>>> t;
  t.reserve(static_cast<std::size_t>(3 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::complex<double> diag = 2.0 * kinetic + field.potential(i);
    if (boundary == Boundary::absorbing && options != nullptr) {
      const double width = options->absorb_fraction * static_cast<double>(n - 1) * field.dx;
      const double edge = std::min(static_cast<double>(i), static_cast<double>(n - 1 - i)) * field.dx;
      if (width > 0.0 && edge < width) {
        const double r = (width - edge) / width;
        diag -= 1i * options->absorb_strength * r * r;
      }
    }
    t.emplace_back(i, i, diag);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -kinetic);
      t.emplace_back(i + 1, i, -kinetic);
    }
  }
  if (boundary == Boundary::periodic) {
    t.emplace_back(0, n - 1, -kinetic);
    t.emplace_back(n - 1, 0, -kinetic);
  }
  SparseC h(n, n);
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

}  // namespace

void check_stability(const WaveField& field, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive", "dt");
  const double hbar = field.effective_hbar();
  const double potential_bound = dt * field.potential.cwiseAbs().maxCoeff() / hbar;
  if (!(potential_bound < 0.5)) {
    throw ConfigError("dt*max|U|/(2 S0) = " + std::to_string(potential_bound) + " violates the bound 0.5", "dt");
  }
  const double k_max = std::numbers::pi / field.dx;
  const double kinetic_bound = dt * hbar * k_max * k_max / (2.0 * field.mass);
  if (!(kinetic_bound < 0.5)) {
    throw ConfigError("dt*(2 S0)*k_max^2/(2m) = " + std::to_string(kinetic_bound) + " violates the bound 0.5", "dt");
  }
}

WaveField evolve(const WaveField& field, double dt, std::size_t steps, const EvolveOptions& options) {
  field.validate();
  check_stability(field, dt);

  const Eigen::Index n = field.size();
  const SparseC h = hamiltonian(field, options.boundary, &options);
  SparseC identity(n, n);
  identity.setIdentity();
  const std::complex<double> half = 0.5i * dt / field.effective_hbar();
  const SparseC forward = identity - half * h;
  SparseC backward = identity + half * h;
  backward.makeCompressed();

  Eigen::SparseLU<SparseC> solver;
  solver.compute(backward);
  if (solver.info() != Eigen::Success) throw DiagnosticError("evolve: Crank-Nicolson factorization failed");

  WaveField out = field;
  const double t0 = field.time;
  const bool observe = options.observer && options.snapshot_stride > 0;
  if (observe) options.observer(out, 0);
  for (std::size_t s = 1; s <= steps; ++s) {
    const Eigen::VectorXcd rhs = forward * out.psi;
    out.psi = solver.solve(rhs);
    out.time = t0 + static_cast<double>(s) * dt;
    if (observe && s % options.snapshot_stride == 0) options.observer(out, s);
  }
  return out;
}

Eigen::VectorXcd evolve_schrodinger(const Eigen::VectorXcd& psi, const Eigen::VectorXd& potential, double x0,
                                    double dx, double mass, double hbar, double dt, std::size_t steps,
                                    const EvolveOptions& options) {
  WaveField f;
  f.psi = psi;
  f.potential = potential;
  f.x0 = x0;
  f.dx = dx;
  f.mass = mass;
  f.action_scale = 0.5 * hbar;
  return evolve(f, dt, steps, options).psi;
}

Eigen::VectorXcd time_derivative(const WaveField& field, Boundary boundary) {
  field.validate();
  const SparseC h = hamiltonian(field, boundary, nullptr);
  return (-1i / field.effective_hbar()) * (h * field.psi);
}

double position_mean(const WaveField& field) {
  double mass = 0.0, first = 0.0;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    const double rho = std::norm(field.psi(i));
    mass += rho;
    first += rho * field.position(i);
  }
  return first / mass;
}

double position_spread(const WaveField& field) {
  const double mean = position_mean(field);
  double mass = 0.0, second = 0.0;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    const double rho = std::norm(field.psi(i));
    const double d = field.position(i) - mean;
    mass += rho;
    second += rho * d * d;
  }
  return std::sqrt(second / mass);
}

WaveField gaussian_packet(Eigen::Index points, double x_min, double x_max, double center, double width,
                          double wavenumber, double mass, double action_scale) {
  if (points < 8 || !(x_max > x_min) || !(width > 0.0)) throw InvalidInput("gaussian_packet: bad grid or width");
  WaveField f;
  f.dx = (x_max - x_min) / static_cast<double>(points);
  f.x0 = x_min;
  f.mass = mass;
  f.action_scale = action_scale;
  f.potential = Eigen::VectorXd::Zero(points);
  f.psi.resize(points);
  for (Eigen::Index i = 0; i < points; ++i) {
    const double d = f.position(i) - center;
    f.psi(i) = std::polar(std::exp(-d * d / (4.0 * width * width)), wavenumber * f.position(i));
  }
  f.psi /= std::sqrt(f.norm());
  return f;
}

}  // namespace geopath
