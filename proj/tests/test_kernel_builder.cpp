#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "geopath/errors.hpp"
#include "geopath/kernel_builder.hpp"

using namespace geopath;
using namespace std::complex_literals;
using C = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Mehler kernel written from the textbook form, independent of the library's version.
C mehler(double m, double w, double t, double xa, double xb, double hbar) {
  const double s = std::sin(w * t);
  const C pref = std::sqrt(C(m * w / (2.0 * kPi * hbar * s)) / 1i);
  return pref * std::exp(1i * (m * w / (2.0 * hbar * s)) * ((xa * xa + xb * xb) * std::cos(w * t) - 2.0 * xa * xb));
}

// E[exp(i t sqrt(R))] for R half-normal with unit scale, by substituting R = s^2.
C half_normal_phase_mean(double t) {
  const int n = 200000;
  const double top = 8.0;
  const double h = top / n;
  C sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = i * h;
    const double r = s * s;
    const C f = 2.0 / std::sqrt(2.0 * kPi) * std::exp(-0.5 * r * r) * 2.0 * s * std::exp(1i * t * s);
    sum += (i == 0 || i == n ? 0.5 : 1.0) * f;
  }
  return sum * h;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_SUITE("kernel_builder") {
  TEST_CASE("phase factor examples") {
    const auto p = phase_factor(kPi, 1.0);
    CHECK(std::abs(p.value - C(-1.0, 0.0)) < 1e-15);
    CHECK(p.phase == kPi);
    CHECK(phase_factor(0.0, 2.0, 3.0).value == C(3.0, 0.0));
    CHECK(std::abs(phase_factor(1.0, 2.0).value - std::polar(1.0, 0.5)) < 1e-16);
    CHECK_THROWS_AS(phase_factor(1.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(phase_factor(1.0, 1.0, -1.0), InvalidInput);
  }

  TEST_CASE("kernel sum examples") {
    std::vector<PhaseFactor> phases{phase_factor(0.0, 1.0), phase_factor(kPi, 1.0)};
    const auto raw = kernel_sum(phases, Normalization::raw_sum);
    CHECK(std::abs(raw.value) < 1e-15);
    CHECK(raw.ensemble_size == 2);
    const auto mean = kernel_sum(phases, Normalization::mean);
    CHECK(std::abs(mean.value) < 1e-15);
    // |1 - 0|^2 + |-1 - 0|^2 = 2, sqrt(2/1)/sqrt(2) = 1
    CHECK(mean.std_error == doctest::Approx(1.0));
    CHECK(raw.std_error == mean.std_error);

    std::vector<PhaseFactor> one{phase_factor(0.3, 1.0)};
    CHECK(kernel_sum(one, Normalization::mean).std_error == 0.0);
    CHECK_THROWS_AS(kernel_sum(std::span<const PhaseFactor>{}, Normalization::mean), InvalidInput);
  }

  TEST_CASE("uniform phases cancel and the mean stays bounded") {
    for (std::size_t j : {100u, 1000u, 10000u}) {
      std::vector<PhaseFactor> phases;
      for (std::size_t i = 0; i < j; ++i) phases.push_back(phase_factor(2.0 * kPi * (i + 0.37) / j, 1.0));
      CHECK(std::abs(kernel_sum(phases, Normalization::mean).value) < 5.0 / std::sqrt(static_cast<double>(j)));
    }
    std::vector<PhaseFactor> varied;
    double cmax = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double c = 0.1 + 0.05 * i;
      cmax = std::max(cmax, c);
      varied.push_back(phase_factor(0.7 * i * i, 1.0, c));
    }
    CHECK(std::abs(kernel_sum(varied, Normalization::mean).value) <= cmax);
  }

  TEST_CASE("kernel sum is linear in the amplitudes") {
    std::vector<PhaseFactor> a, b, ab;
    for (int i = 0; i < 20; ++i) {
      a.push_back(phase_factor(0.3 * i, 1.0, 1.0 + i));
      b.push_back(phase_factor(0.3 * i, 1.0, 2.0));
      ab.push_back(phase_factor(0.3 * i, 1.0, 3.0 + i));
    }
    const C lhs = kernel_sum(ab, Normalization::raw_sum).value;
    const C rhs = kernel_sum(a, Normalization::raw_sum).value + kernel_sum(b, Normalization::raw_sum).value;
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }

  TEST_CASE("free kernel modulus and translation invariance") {
    const C k = analytic_free_kernel(1.0, 1.0, 0.0, 0.0, 1.0);
    CHECK(std::abs(k) == doctest::Approx(0.398942).epsilon(1e-6));
    CHECK(std::abs(std::arg(k) + kPi / 4) < 1e-15);
    CHECK(std::abs(analytic_free_kernel(1.0, 1.0, 2.0, 3.5, 1.0) - analytic_free_kernel(1.0, 1.0, -7.0, -5.5, 1.0)) <
          1e-14);
    CHECK_THROWS_AS(analytic_free_kernel(0.0, 1.0, 0.0, 0.0, 1.0), InvalidInput);
  }

  TEST_CASE("free kernel composes over intermediate times") {
    const double m = 1.3, hbar = 0.9, t1 = 0.4, t2 = 0.7, xa = -0.5, xb = 1.1;
    // Stationary point of the combined phase; the contour through it along exp(i pi/4) makes the
    // integrand a decaying Gaussian.
    const double xs = (xa * t2 + xb * t1) / (t1 + t2);
    const C dir = std::polar(1.0, kPi / 4);
    const int n = 4000;
    const double half = 12.0, h = 2.0 * half / n;
    C sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const C x = xs + dir * (-half + i * h);
      const C f = analytic_free_kernel(m, t2, x, C(xb), hbar) * analytic_free_kernel(m, t1, C(xa), x, hbar);
      sum += (i == 0 || i == n ? 0.5 : 1.0) * f;
    }
    const C composed = sum * h * dir;
    CHECK(std::abs(composed - analytic_free_kernel(m, t1 + t2, xa, xb, hbar)) < 1e-6);
  }

  TEST_CASE("harmonic kernel agrees with an independent Mehler formula") {
    for (double t : {0.2, 1.0, 2.5}) {
      CHECK(std::abs(harmonic_kernel(1.2, 1.1, t, 0.3, -0.8, 0.7) - mehler(1.2, 1.1, t, 0.3, -0.8, 0.7)) < 1e-12);
    }
    CHECK_THROWS_AS(harmonic_kernel(1.0, 1.0, 4.0, 0.0, 0.0, 1.0), InvalidInput);
  }

  TEST_CASE("single slice equals the short-time kernel") {
    const LatticeGrid grid;
    const auto free = [](double) { return 0.0; };
    const C k = lattice_path_integral(free, 1.0, 1.0, 0.1, 0.2, 0.5, 1, grid);
    CHECK(std::abs(k - analytic_free_kernel(1.0, 0.1, 0.2, 0.5, 1.0)) < 1e-8);
  }

  TEST_CASE("lattice path integral reproduces the free and harmonic kernels") {
    const LatticeGrid grid;
    const C free = lattice_path_integral([](double) { return 0.0; }, 1.0, 1.0, 1.0, 0.0, 0.5, 64, grid);
    const C free_exact = analytic_free_kernel(1.0, 1.0, 0.0, 0.5, 1.0);
    CHECK(std::abs(free - free_exact) / std::abs(free_exact) < 0.02);

    const C osc = lattice_path_integral([](double x) { return 0.5 * x * x; }, 1.0, 1.0, 1.0, 0.0, 0.5, 64, grid);
    const C osc_exact = mehler(1.0, 1.0, 1.0, 0.0, 0.5, 1.0);
    CHECK(std::abs(osc - osc_exact) / std::abs(osc_exact) < 0.02);
  }

  TEST_CASE("harmonic lattice error shrinks with more slices") {
    // On a wide window the slicing error dominates the edge truncation and falls roughly as 1/N^2.
    LatticeGrid grid;
    grid.x_min = -12.0;
    grid.x_max = 12.0;
    const C exact = mehler(1.0, 1.0, 1.0, 0.0, 0.5, 1.0);
    std::vector<double> errors;
    for (std::size_t slices : {4u, 8u, 16u}) {
      grid.points = static_cast<std::size_t>(1.1 * 24.0 * 24.0 * slices / kPi) + 1;
      const C k = lattice_path_integral([](double x) { return 0.5 * x * x; }, 1.0, 1.0, 1.0, 0.0, 0.5, slices, grid);
      errors.push_back(std::abs(k - exact) / std::abs(exact));
    }
    CHECK(errors[1] < errors[0] / 2.5);
    CHECK(errors[2] < errors[1] / 2.5);
  }

  TEST_CASE("lattice rejects aliased grids") {
    LatticeGrid coarse;
    coarse.points = 101;
    CHECK_THROWS_AS(lattice_path_integral([](double) { return 0.0; }, 1.0, 1.0, 1.0, 0.0, 0.5, 64, coarse),
                    DiagnosticError);
    LatticeGrid bad;
    bad.x_max = bad.x_min;
    CHECK_THROWS_AS(lattice_path_integral([](double) { return 0.0; }, 1.0, 1.0, 1.0, 0.0, 0.5, 4, bad), InvalidInput);
  }

  TEST_CASE("ensemble kernel with a sharp curvature") {
    EnsembleConfig cfg;
    cfg.count = 50;
    cfg.curvature = Delta{0.0};
    EnsembleKernelOptions opt;
    opt.t_span = 2.0;
    auto k = ensemble_kernel(cfg, opt);
    CHECK(k.value == C(1.0, 0.0));
    CHECK(k.std_error == 0.0);

    cfg.curvature = Delta{4.0};
    k = ensemble_kernel(cfg, opt);
    CHECK(std::abs(k.value - std::polar(1.0, 4.0)) < 1e-14);

    opt.normalization = Normalization::raw_sum;
    k = ensemble_kernel(cfg, opt);
    CHECK(std::abs(k.value - 50.0 * std::polar(1.0, 4.0)) < 1e-12);

    // S(j)/S_0 = 1/J for identical fields.
    opt.normalization = Normalization::mean;
    opt.scale = PhaseScale::total_action;
    k = ensemble_kernel(cfg, opt);
    CHECK(std::abs(k.value - std::polar(1.0, 1.0 / 50.0)) < 1e-14);
  }

  TEST_CASE("half-normal ensemble converges at the Monte Carlo rate") {
    EnsembleConfig cfg;
    cfg.seed = 31;
    cfg.curvature = HalfNormal{1.0};
    EnsembleKernelOptions opt;
    opt.t_span = 3.0;
    opt.threads = 2;
    const C target = half_normal_phase_mean(3.0);
    std::vector<double> counts, errors;
    for (std::size_t j : {100u, 1000u, 10000u, 100000u}) {
      cfg.count = j;
      const auto k = ensemble_kernel(cfg, opt);
      counts.push_back(static_cast<double>(j));
      errors.push_back(k.std_error);
      CHECK(std::abs(k.value - target) < 4.0 * k.std_error);
      CHECK(std::abs(k.value) <= 1.0);
    }
    CHECK(loglog_slope(counts, errors) == doctest::Approx(-0.5).epsilon(0.2));
  }

  TEST_CASE("ensemble kernel is independent of thread count") {
    EnsembleConfig cfg;
    cfg.count = 20000;
    cfg.seed = 8;
    EnsembleKernelOptions opt;
    opt.t_span = 1.7;
    const auto a = ensemble_kernel(cfg, opt);
    opt.threads = 5;
    const auto b = ensemble_kernel(cfg, opt);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
  }
}
