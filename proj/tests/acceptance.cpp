// Acceptance suite: one PASS/FAIL line per criterion. Each criterion compares library output
// against an oracle computed here and checks its own wall-time budget.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geopath/background_ensemble.hpp"
#include "geopath/deviation_dynamics.hpp"
#include "geopath/harness.hpp"
#include "geopath/hilbert_geometry.hpp"
#include "geopath/interval_statistics.hpp"
#include "geopath/kernel_builder.hpp"
#include "geopath/random.hpp"
#include "geopath/wave_dynamics.hpp"

using namespace geopath;
using namespace std::complex_literals;
using C = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

// 1 ------------------------------------------------------------------------------------------

Verdict inner_product() {
  double recon = 0, sym = 0, anti = 0;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    CounterStream s(2718, "acceptance.pairs", k);
    const auto dim = static_cast<Eigen::Index>(2 + s.next_u64() % 15);
    ComplexState::Vector a(dim), b(dim);
    for (Eigen::Index i = 0; i < dim; ++i) a(i) = {s.normal(), s.normal()};
    for (Eigen::Index i = 0; i < dim; ++i) b(i) = {s.normal(), s.normal()};
    const ComplexState p(a), q(b);
    C direct = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) direct += std::conj(a(i)) * b(i);
    const auto pq = decompose_inner_product(p, q);
    const auto qp = decompose_inner_product(q, p);
    recon = std::max(recon, std::abs(pq.reconstruct() - direct));
    sym = std::max(sym, std::abs(pq.riemannian - qp.riemannian));
    anti = std::max(anti, std::abs(pq.symplectic + qp.symplectic));
  }
  return {recon < 1e-12 && sym < 1e-12 && anti < 1e-12,
          fmt("reconstruction %.2e, symmetry %.2e, antisymmetry %.2e (limit 1e-12)", recon, sym, anti)};
}

// 2 ------------------------------------------------------------------------------------------

double oscillator_error(double omega, double period, double dt) {
  FieldSample s;
  s.curvature_r1010 = omega * omega;
  s.omega = omega;
  DeviationState init;
  init.ell(1) = 1.0;
  init.ell_rate(1) = 0.5;
  const auto traj = integrate_deviation(s, init, Eigen::Vector4d(1, 0, 0, 0), 10.0 * period, dt);
  const double amplitude = std::hypot(1.0, 0.5 / omega);
  double worst = 0;
  for (const auto& p : traj.samples) {
    const double exact = std::cos(omega * p.tau) + 0.5 / omega * std::sin(omega * p.tau);
    worst = std::max(worst, std::abs(p.ell(1) - exact));
  }
  return worst / amplitude;
}

Verdict deviation() {
  const double omega = 2.0 * kPi, period = 1.0;
  const double fine = oscillator_error(omega, period, period / 1000.0);
  const double e1 = oscillator_error(omega, period, period / 100.0);
  const double e2 = oscillator_error(omega, period, period / 200.0);
  const double e3 = oscillator_error(omega, period, period / 400.0);
  const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  const bool ok = fine < 1e-6 && std::abs(p1 - 4.0) <= 0.2 && std::abs(p2 - 4.0) <= 0.2;
  return {ok, fmt("rel. error %.2e at T/1000 (limit 1e-6); exponents %.3f, %.3f (4.0 +- 0.2)", fine, p1, p2)};
}

// 3 ------------------------------------------------------------------------------------------

Verdict exp_residual() {
  EnsembleConfig cfg;
  cfg.count = 100;
  cfg.seed = 1618;
  cfg.light_speed = 1.0;
  double worst = 0;
  std::size_t k = 0;
  for (const auto& f : sample_ensemble(cfg)) {
    // Dispersion check done here as well: omega^2 must equal c^2 R.
    worst = std::max(worst, std::abs(f.omega * f.omega - f.curvature_r1010));
    CounterStream s(1618, "acceptance.points", k++);
    const Eigen::Vector4d x(0.0, s.normal(), s.normal(), s.normal());
    worst = std::max(worst, exp_solution_residual(f, x, s.uniform(), cfg.light_speed));
  }
  return {worst < 1e-12, fmt("max residual %.2e over 100 samples (limit 1e-12)", worst)};
}

// 4 ------------------------------------------------------------------------------------------

C free_oracle(double m, double t, double dx, double hbar) {
  return std::sqrt(C(m / (2.0 * kPi * hbar * t)) / 1i) * std::exp(1i * m * dx * dx / (2.0 * hbar * t));
}

C mehler_oracle(double m, double w, double t, double xa, double xb, double hbar) {
  const double s = std::sin(w * t);
  return std::sqrt(C(m * w / (2.0 * kPi * hbar * s)) / 1i) *
         std::exp(1i * (m * w / (2.0 * hbar * s)) * ((xa * xa + xb * xb) * std::cos(w * t) - 2.0 * xa * xb));
}

Verdict kernel_oracles() {
  const LatticeGrid grid;
  const double xa = 0.0, xb = 0.5;
  const C free_ref = free_oracle(1.0, 1.0, xb - xa, 1.0);
  const C free = lattice_path_integral([](double) { return 0.0; }, 1.0, 1.0, 1.0, xa, xb, 64, grid);
  const double e_free = std::abs(free - free_ref) / std::abs(free_ref);

  const C osc_ref = mehler_oracle(1.0, 1.0, 1.0, xa, xb, 1.0);
  const C osc = lattice_path_integral([](double x) { return 0.5 * x * x; }, 1.0, 1.0, 1.0, xa, xb, 64, grid);
  const double e_osc = std::abs(osc - osc_ref) / std::abs(osc_ref);

  const C one = lattice_path_integral([](double) { return 0.0; }, 1.0, 1.0, 0.05, xa, xb, 1, grid);
  const double e_one = std::abs(one - free_oracle(1.0, 0.05, xb - xa, 1.0));

  return {e_free < 0.02 && e_osc < 0.02 && e_one < 1e-8,
          fmt("N=64 free %.4f, harmonic %.4f (limit 0.02); N=1 %.2e (limit 1e-8)", e_free, e_osc, e_one)};
}

// 5 ------------------------------------------------------------------------------------------

Verdict kernel_scaling() {
  EnsembleConfig cfg;
  cfg.seed = 4669;
  cfg.curvature = HalfNormal{1.0};
  EnsembleKernelOptions opt;
  opt.t_span = 3.0;
  std::vector<double> counts{1e2, 1e3, 1e4, 1e5}, errors;
  for (double j : counts) {
    cfg.count = static_cast<std::size_t>(j);
    errors.push_back(ensemble_kernel(cfg, opt).std_error);
  }
  const double s = slope(counts, errors);
  return {std::abs(s + 0.5) <= 0.1, fmt("log-log slope %.3f (-0.5 +- 0.1)", s)};
}

// 6 ------------------------------------------------------------------------------------------

Verdict wave_solver() {
  // Norm conservation.
  const WaveField packet = gaussian_packet(512, -20.0, 20.0, -5.0, 1.0, 1.0, 1.0, 0.5);
  double previous = packet.norm(), drift = 0;
  EvolveOptions each;
  each.snapshot_stride = 1;
  each.observer = [&](const WaveField& f, std::size_t step) {
    if (step == 0) return;
    const double n = f.norm();
    drift = std::max(drift, std::abs(n - previous));
    previous = n;
  };
  evolve(packet, 5e-4, 10000, each);

  // Free spreading through one doubling of the width, with hbar -> 2 S0.
  const double s0 = 0.35, sigma0 = 1.0, mass = 1.0;
  const double hbar = 2.0 * s0;
  const double doubling = 2.0 * std::sqrt(3.0) * mass * sigma0 * sigma0 / hbar;
  const double dt = 2e-4;
  // Whole multiples of the sampling stride so the last sample lies past the doubling time.
  const auto steps = static_cast<std::size_t>(std::ceil(doubling / dt / 100.0)) * 100;
  const WaveField spread0 = gaussian_packet(1024, -30.0, 30.0, 0.0, sigma0, 0.0, mass, s0);
  double width_error = 0, final_ratio = 0;
  EvolveOptions watch;
  watch.snapshot_stride = 100;
  watch.observer = [&](const WaveField& f, std::size_t) {
    const double tau = hbar * f.time / (2.0 * mass * sigma0 * sigma0);
    const double exact = sigma0 * std::sqrt(1.0 + tau * tau);
    const double w = position_spread(f);
    width_error = std::max(width_error, std::abs(w - exact) / exact);
    final_ratio = exact / sigma0;
  };
  evolve(spread0, dt, steps, watch);

  // 2 S0 = hbar reproduces the standard evolution bit for bit.
  WaveField g = gaussian_packet(256, -10.0, 10.0, 1.0, 0.7, 2.0, 1.0, 0.5);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.potential(i) = 0.5 * g.position(i) * g.position(i);
  const WaveField geo = evolve(g, 5e-4, 1000);
  const Eigen::VectorXcd ref = evolve_schrodinger(g.psi, g.potential, g.x0, g.dx, 1.0, 1.0, 5e-4, 1000);
  bool bitwise = ref.size() == geo.psi.size();
  for (Eigen::Index i = 0; bitwise && i < ref.size(); ++i) {
    bitwise = ref(i).real() == geo.psi(i).real() && ref(i).imag() == geo.psi(i).imag();
  }

  return {drift <= 1e-10 && width_error <= 0.01 && final_ratio >= 2.0 && bitwise,
          fmt("norm drift %.2e/step (limit 1e-10); width error %.4f through sigma/sigma0 = %.3f (limit 0.01); "
              "bitwise %s",
              drift, width_error, final_ratio, bitwise ? "yes" : "no")};
}

// 7 ------------------------------------------------------------------------------------------

// Residuals of the Madelung equations for a smooth nodeless packet in a weak periodic potential.
// Time derivatives come from symmetric differences of the evolved field.
std::pair<double, double> madelung_at(Eigen::Index points) {
  const double length = 16.0, s0 = 0.5, mass = 1.0, dt = 2e-5;
  WaveField f;
  f.dx = length / static_cast<double>(points);
  f.x0 = 0.0;
  f.mass = mass;
  f.action_scale = s0;
  f.potential.resize(points);
  f.psi.resize(points);
  const double q = 2.0 * kPi / length;
  for (Eigen::Index i = 0; i < points; ++i) {
    const double x = f.position(i);
    f.potential(i) = 0.2 * std::cos(q * x);
    f.psi(i) = std::polar(1.0 + 0.4 * std::sin(q * x), 3.0 * q * x);
  }
  const WaveField before = evolve(f, dt, 199);
  const WaveField mid = evolve(before, dt, 1);
  const WaveField after = evolve(mid, dt, 1);

  const MadelungFields m = madelung_decompose(mid);
  const MadelungFields mb = madelung_decompose(before);
  const MadelungFields ma = madelung_decompose(after);
  const Eigen::VectorXd rho = m.amplitude.cwiseAbs2();
  const Eigen::VectorXd rho_rate = (ma.amplitude.cwiseAbs2() - mb.amplitude.cwiseAbs2()) / (2.0 * dt);
  Eigen::VectorXd action_rate(points);
  for (Eigen::Index i = 0; i < points; ++i) {
    // Phase change of psi over 2 dt, taken pointwise so no global unwrapping enters.
    action_rate(i) = 2.0 * s0 * std::arg(after.psi(i) / before.psi(i)) / (2.0 * dt);
  }
  const double cont = continuity_residual(rho, m.action, mass, rho_rate, f.dx).cwiseAbs().maxCoeff();
  const Eigen::VectorXd hj = hamilton_jacobi_residual(m.action, f.potential, mass, action_rate, f.dx);
  const double closure = (hj + quantum_potential(m.amplitude, mass, s0, f.dx)).cwiseAbs().maxCoeff();
  return {cont, closure};
}

Verdict madelung() {
  std::vector<double> h, cont, closure;
  for (Eigen::Index n : {128, 256, 512}) {
    const auto [c, q] = madelung_at(n);
    h.push_back(16.0 / static_cast<double>(n));
    cont.push_back(c);
    closure.push_back(q);
  }
  const double pc = slope(h, cont), pq = slope(h, closure);
  return {std::abs(pc - 2.0) <= 0.3 && std::abs(pq - 2.0) <= 0.3,
          fmt("continuity order %.3f (%.1e -> %.1e), HJ + Q order %.3f (%.1e -> %.1e), target 2.0 +- 0.3", pc,
              cont.front(), cont.back(), pq, closure.front(), closure.back())};
}

// 8 ------------------------------------------------------------------------------------------

Verdict statistics() {
  const double inv = 1.0 / std::sqrt(2.0 * kPi);
  const GaussianLaw il{1.0, LawKind::interval};
  const GaussianLaw vl{1.0, LawKind::velocity};
  const std::pair<double, double> values[] = {
      {interval_probability(0.0, il), 0.3989422804014327},
      {interval_probability(std::sqrt(2.0), il), 0.14676266317373993},
      {interval_probability(3.0, GaussianLaw{2.0, LawKind::interval}), 0.5 * inv * std::exp(-9.0 / 4.0)},
      {velocity_probability(1.0, vl), 0.24197072451914337},
      {velocity_probability(-2.0, GaussianLaw{0.5, LawKind::velocity}), 2.0 * inv * std::exp(-8.0)},
      {action_probability(2.0, 4.0, 1.0), inv * std::exp(-0.5)},
      {energy_probability(2.0, 1.0), 0.14676266317373993},
  };
  double point = 0;
  for (const auto& [got, want] : values) point = std::max(point, std::abs(got - want));

  bool props = true;
  for (double sigma : {0.5, 1.0, 3.0})
    for (const auto& o : property_suite(GaussianLaw{sigma, LawKind::interval}, IntervalMetric()))
      if (o.asserted) props = props && o.passed;

  int passes = 0;
  std::vector<double> draws(100000);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (std::size_t i = 0; i < draws.size(); ++i) draws[i] = 0.3 + 2.0 * CounterStream(seed, "acceptance.ks", i).normal();
    passes += velocity_sample_check(draws).ks_pass ? 1 : 0;
  }
  return {point < 1e-12 && props && passes >= 18,
          fmt("point error %.2e (limit 1e-12); properties %s; KS passes %d/20 (need 18)", point,
              props ? "pass" : "fail", passes)};
}

// 9 ------------------------------------------------------------------------------------------

Verdict determinism() {
  const auto tmp = std::filesystem::temp_directory_path() / "geopath_acceptance";
  auto run_with = [&](int threads) {
    nlohmann::json doc{{"seed", 99}, {"threads", threads}, {"output_path", (tmp / std::to_string(threads)).string()},
                       {"check", nlohmann::json::object()}};
    const auto outcome = execute(Experiment::check, resolve_config(Experiment::check, &doc));
    return std::pair{outcome.exit_code, outcome.record["outputs"].dump() + outcome.record["diagnostics"].dump()};
  };
  const auto [code1, serial] = run_with(1);
  const auto [code4, parallel] = run_with(4);
  std::filesystem::remove_all(tmp);
  const bool same = serial == parallel;
  return {same && code1 == exit_code::ok && code4 == exit_code::ok,
          fmt("outputs %s for 1 vs 4 threads (%zu bytes); exit codes %d, %d", same ? "identical" : "differ",
              serial.size(), code1, code4)};
}

struct Criterion {
  int id;
  const char* name;
  std::optional<double> budget_s;
  Verdict (*check)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "inner_product_decomposition", 1.0, inner_product},
      {2, "deviation_integrator", 10.0, deviation},
      {3, "exponential_solution_residual", 1.0, exp_residual},
      {4, "kernel_oracles", 60.0, kernel_oracles},
      {5, "monte_carlo_kernel_scaling", 30.0, kernel_scaling},
      {6, "wave_solver", 60.0, wave_solver},
      {7, "madelung_residuals", std::nullopt, madelung},
      {8, "statistics", 20.0, statistics},
      {9, "determinism", 300.0, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = !c.budget_s || wall < *c.budget_s;
    const bool ok = v.passed && in_time;
    failures += ok ? 0 : 1;
    std::string timing = c.budget_s ? fmt("%.2f s (budget %.0f s)", wall, *c.budget_s) : fmt("%.2f s", wall);
    std::printf("%s %d %s: %s; %s\n", ok ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
