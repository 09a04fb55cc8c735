#include "doctest.h"

#include <algorithm>

#include "lldyn/correlator.hpp"
#include "lldyn/special.hpp"

using namespace lldyn;

namespace {

cplx expi(double p) { return {std::cos(p), std::sin(p)}; }

// free-gas field correlator of A exp(-lam^2/sigma^2)
cplx free_field_gaussian(double A, double sigma, double x, double t) {
  const cplx a(1.0 / (sigma * sigma), -t);
  return A * std::sqrt(pi / a) * std::exp(-x * x / (4.0 * a));
}

// Q from the quadrature definition of chi
cplx q_oracle(double x, double t, double nu) {
  if (t == 0.0) return -std::abs(x);
  const double rt = std::sqrt(std::abs(t)), y = (x - 2 * nu * t) / rt;
  return -std::abs(x - 2 * nu * t) + rt / pi * chi_quadrature(t > 0 ? -1 : 1, y);
}

// Field correlator by nested adaptive quadrature straight from the definition
// (Q itself is checked against chi_quadrature separately).
cplx field_oracle(const RootDensity& rho, double c, double x, double t) {
  QuadOptions inner;
  inner.abs_tol = 1e-12;
  inner.max_intervals = 20000;
  QuadOptions outer = inner;
  outer.abs_tol = 1e-10;
  auto phi = [&](double lam) {
    const std::vector<double> br{lam};
    return integrate(
               [&](double nu) {
                 const double d = lam - nu;
                 return rho(nu) * (cplx(0, 2 * c * d * (x - 2 * t * nu)) + 2 * c * c * damping_q(x, t, nu)) /
                        (d * d + c * c);
               },
               rho.support_min(), rho.support_max(), inner, br)
        .value;
  };
  return integrate([&](double lam) { return rho(lam) * expi(t * lam * lam - x * lam) * std::exp(phi(lam)); },
                   rho.support_min(), rho.support_max(), outer, rho.breakpoints())
      .value;
}

// Density correlator of a few atoms: the mu-integral is regularised by
// exp(-eta mu^2) and extrapolated to eta = 0 (Neville).
cplx density_atoms_oracle(const std::vector<double>& atoms, double L, double c, double x, double t) {
  std::vector<cplx> q;
  for (double nu : atoms) q.push_back(q_oracle(x, t, nu));
  auto psi = [&](double lam, double mu) {
    cplx s = 0.0;
    for (size_t j = 0; j < atoms.size(); ++j) {
      const double nu = atoms[j], a = lam - nu, b = mu - nu, c2 = c * c, dm = mu - lam;
      s += (cplx(0, 2 * c * dm * (c2 + a * b) * (x - 2 * nu * t)) + 2 * c2 * dm * dm * q[j]) /
           ((c2 + a * a) * (c2 + b * b)) / L;
    }
    return s;
  };
  auto smooth_hole = [&](double mu) {
    double s = 1.0;
    for (double nu : atoms) s += 2 * c / (c * c + (mu - nu) * (mu - nu)) / L;
    return s / two_pi;
  };
  cplx total = 0.0;
  for (double lam : atoms) {
    std::vector<double> eta;
    std::vector<cplx> vals;
    for (int k = 0; k < 6; ++k) {
      const double e = 0.04 / std::pow(2.0, k);
      const double W = std::sqrt(40.0 / e);
      std::vector<double> br;
      for (double u = -W; u < W; u += std::min(1.0, 2.0 / (1 + 2 * std::abs(t * u)))) br.push_back(u);
      QuadOptions opt;
      opt.abs_tol = 1e-13;
      opt.max_intervals = 400000;
      const auto r = integrate(
          [&](double mu) {
            return smooth_hole(mu) * std::exp(psi(lam, mu)) * expi(x * mu - t * mu * mu) * std::exp(-e * mu * mu);
          },
          -W, W, opt, br);
      eta.push_back(e);
      vals.push_back(r.value);
    }
    // Neville to eta = 0
    for (size_t m = 1; m < vals.size(); ++m)
      for (size_t i = vals.size() - 1; i >= m; --i) vals[i] = (eta[i - m] * vals[i] - eta[i] * vals[i - 1]) /
                                                           (eta[i - m] - eta[i]);
    cplx inner = vals.back();
    for (double mu : atoms) inner -= expi(x * mu - t * mu * mu) * std::exp(psi(lam, mu)) / L;
    total += expi(t * lam * lam - x * lam) * inner / L;
  }
  return total;
}

}  // namespace

TEST_CASE("field correlator at the origin is the density") {
  for (auto rho : {RootDensity::gaussian(0.05, 1.0), RootDensity::box(0.02, 1.5, 0.3)}) {
    const auto g = field_correlator(rho, 1.3, 0.0, 0.0);
    CHECK(std::abs(g.value - rho.total()) < 1e-12);
  }
}

TEST_CASE("field correlator matches nested quadrature") {
  const auto rho = RootDensity::gaussian_sum({{0.04, 0.8, -0.5}, {0.02, 0.4, 1.0}});
  for (auto [x, t] : std::vector<std::pair<double, double>>{{1.0, 0.5}, {-2.0, 1.0}, {0.7, 0.0}, {3.0, -2.0}}) {
    CAPTURE(x);
    CAPTURE(t);
    CHECK(std::abs(field_correlator(rho, 0.8, x, t).value - field_oracle(rho, 0.8, x, t)) < 1e-9);
  }
}

TEST_CASE("field correlator symmetries") {
  const auto rho = RootDensity::gaussian(0.05, 1.0);
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0})
    for (double t : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      CAPTURE(x);
      CAPTURE(t);
      const auto a = field_correlator(rho, 1.0, x, t).value;
      CHECK(std::abs(field_correlator(rho, 1.0, -x, -t).value - std::conj(a)) < 1e-10);
      // even profile
      CHECK(std::abs(field_correlator(rho, 1.0, -x, t).value - a) < 1e-10);
    }
}

TEST_CASE("field correlator reduces to the free gas as the density vanishes") {
  double prev = 0.0;
  for (double A : {1e-2, 1e-3, 1e-4}) {
    double worst = 0.0;
    for (auto [x, t] : std::vector<std::pair<double, double>>{{1.0, 0.5}, {-2.0, 1.5}, {0.0, 3.0}}) {
      const auto g = field_correlator(RootDensity::gaussian(A, 1.0), 1.0, x, t).value;
      const auto f = free_field_gaussian(A, 1.0, x, t);
      worst = std::max(worst, std::abs(g - f) / std::abs(f));
    }
    CAPTURE(A);
    // first-order correction in A; the prefactor is about 7.5 on these points
    CHECK(worst < 10 * A);
    if (prev > 0) CHECK(worst < prev / 5);
    prev = worst;
  }
}

TEST_CASE("field correlator is continuous at t = 0") {
  const auto rho = RootDensity::gaussian(0.05, 1.0);
  for (double x : {-1.5, 0.4, 2.0}) {
    const auto g0 = field_correlator(rho, 1.0, x, 0.0).value;
    CHECK(std::abs(field_correlator(rho, 1.0, x, 1e-6).value - g0) < 1e-4);
    CHECK(std::abs(field_correlator(rho, 1.0, x, -1e-6).value - g0) < 1e-4);
  }
}

TEST_CASE("damping") {
  const auto rho = RootDensity::gaussian(0.05, 1.0);
  SUBCASE("Q matches the quadrature form of chi") {
    for (double x : {-2.0, 0.0, 1.0})
      for (double t : {-1.0, 0.3, 2.0})
        for (double nu : {-1.0, 0.0, 0.5}) CHECK(std::abs(damping_q(x, t, nu) - q_oracle(x, t, nu)) < 1e-9);
  }
  SUBCASE("Re Q <= 0") {
    for (double x = -4; x <= 4; x += 0.5)
      for (double t = -3; t <= 3; t += 0.5)
        for (double nu = -2; nu <= 2; nu += 0.5) CHECK(damping_q(x, t, nu).real() <= 1e-14);
  }
  SUBCASE("equal-time damping grows with distance") {
    for (double lam : {-1.0, 0.0, 0.8}) {
      double prev = 1.0;
      for (double x = 0.0; x <= 5.0; x += 0.25) {
        const double re = field_exponent(rho, 1.0, x, 0.0, lam).real();
        CHECK(re <= prev);
        CHECK(std::abs(field_exponent(rho, 1.0, -x, 0.0, lam).real() - re) < 1e-14);
        prev = re;
      }
    }
  }
}

TEST_CASE("density exponent") {
  const auto rho = RootDensity::gaussian(0.05, 1.0);
  SUBCASE("vanishes on the diagonal") { CHECK(std::abs(density_exponent(rho, 1.0, 1.0, 0.5, 0.3, 0.3)) == 0.0); }
  SUBCASE("tends to the field exponent for large mu") {
    const cplx phi = field_exponent(rho, 1.0, 1.0, 0.5, 0.3);
    double prev = 1e300;
    for (double mu : {1e2, 1e3, 1e4}) {
      const double d = std::abs(density_exponent(rho, 1.0, 1.0, 0.5, 0.3, mu) - phi);
      CHECK(d < prev);
      prev = d;
    }
    CHECK(prev < 1e-3);
  }
  SUBCASE("integrand is continuous across mu = lambda") {
    for (double lam : {-0.5, 0.0, 1.2}) {
      const cplx at = density_integrand(rho, 1.0, 1.0, 0.5, lam, lam);
      CHECK(std::abs(density_integrand(rho, 1.0, 1.0, 0.5, lam, lam + 1e-9) - at) < 1e-8);
      CHECK(std::abs(density_integrand(rho, 1.0, 1.0, 0.5, lam, lam - 1e-9) - at) < 1e-8);
    }
  }
}

TEST_CASE("density correlator of a few atoms against a regularised integral") {
  const std::vector<double> atoms{-0.9, 0.2, 1.4};
  const double L = 12.0, c = 1.1;
  const auto rho = RootDensity::atoms(atoms, L);
  for (auto [x, t] : std::vector<std::pair<double, double>>{{1.0, 0.6}, {-1.5, -1.0}, {1.2, 0.0}}) {
    CAPTURE(x);
    CAPTURE(t);
    const auto s = density_correlator(rho, c, x, t).value;
    const auto o = density_atoms_oracle(atoms, L, c, x, t);
    CHECK(std::abs(s - o) < 1e-7);
  }
}

TEST_CASE("density correlator") {
  const auto rho = RootDensity::gaussian(0.05, 1.0);
  SUBCASE("conjugation symmetry") {
    for (auto [x, t] : std::vector<std::pair<double, double>>{{1.0, 0.5}, {0.5, 0.0}, {-2.0, 1.0}}) {
      const auto a = density_correlator(rho, 1.0, x, t).value;
      CHECK(std::abs(density_correlator(rho, 1.0, -x, -t).value - std::conj(a)) < 1e-8);
    }
  }
  SUBCASE("free limit") {
    // e^Psi -> 1 and rho_h -> 1/2pi as A -> 0
    const double A = 1e-4, x = 1.0, t = 0.5;
    const auto s = density_correlator(RootDensity::gaussian(A, 1.0), 1.0, x, t).value;
    const cplx f = free_field_gaussian(A, 1.0, x, t) / two_pi * std::sqrt(pi / t) * expi(-pi / 4 + x * x / (4 * t));
    CHECK(std::abs(s - f) < 20 * A * std::abs(f));
  }
  SUBCASE("origin needs a cutoff") {
    CHECK_THROWS_AS(density_correlator(rho, 1.0, 0.0, 0.0), Error);
    const double M = 6.0;
    const auto s = density_correlator(rho, 1.0, 0.0, 0.0, 1e-8, M).value;
    const HoleDensity h(rho, 1.0);
    QuadOptions opt;
    opt.abs_tol = 1e-12;
    const double holes = integrate([&](double mu) { return h(mu); }, -M, M, opt, rho.breakpoints()).value;
    CHECK(std::abs(s - rho.total() * holes) < 1e-9);
  }
  SUBCASE("a wide cutoff approaches the full line") {
    const auto full = density_correlator(rho, 1.0, 1.0, 0.5).value;
    const auto cut = density_correlator(rho, 1.0, 1.0, 0.5, 1e-8, 60.0).value;
    // the truncated Fresnel tail is O(1/(t M))
    CHECK(std::abs(full - cut) < 2.0 * rho.total() / (two_pi * 0.5 * 60.0));
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(density_correlator(rho, 1.0, 1.0, 0.5, 1e-9), Error);
    CHECK_THROWS_AS(density_correlator(rho, -1.0, 1.0, 0.5), Error);
    CHECK_THROWS_AS(density_correlator(rho, 1.0, 1.0, 0.5, 1e-8, -2.0), Error);
  }
}

TEST_CASE("phi diagnostic") {
  const auto rho = RootDensity::gaussian(0.05, 1.0);
  CHECK(phi_diagnostic(rho, 1.0, 0.4, 0.4) == 0.0);
  CHECK(phi_diagnostic(rho, 1.0, 0.0, 1.0) < 0.0);
  for (double nu = -3; nu <= 3; nu += 0.5)
    for (double lam = -3; lam <= 3; lam += 0.5)
      for (double mu = -3; mu <= 3; mu += 0.5) CHECK(phi_log_kernel(1.0, nu, lam, mu) <= 0.0);
  // series branch against the direct formula
  const double u_direct = 2 * std::log(std::abs(std::sin(1e-3) / 1e-3));
  const double lam = 0.0, nu = 0.0, mu = std::tan(1e-3);
  CHECK(phi_log_kernel(1.0, nu, lam, mu) == doctest::Approx(u_direct).epsilon(1e-9));
}

TEST_CASE("spectral grids") {
  const UniformGrid xg{-16.0, 16.0, 32}, tg{-8.0, 8.0, 32};
  SUBCASE("zero density") {
    const auto g = spectral_grid(RootDensity::zero(), 1.0, xg, tg, CorrelatorKind::field);
    for (const auto& v : g.values) CHECK(v == cplx(0.0));
  }
  SUBCASE("free peak sits on omega = k^2 and the transform is real") {
    const auto g = spectral_grid(RootDensity::gaussian(1e-3, 1.0), 1.0, xg, tg, CorrelatorKind::field);
    double vmax = 0.0;
    for (const auto& v : g.values) vmax = std::max(vmax, std::abs(v));
    for (const auto& v : g.values) CHECK(std::abs(v.imag()) < 1e-10 * vmax);
    const double dw = g.omega[1] - g.omega[0];
    for (size_t ik = 0; ik < g.k.size(); ++ik) {
      if (std::abs(g.k[ik]) > 1.5) continue;
      size_t best = 0;
      for (size_t iw = 0; iw < g.omega.size(); ++iw)
        if (g.at(ik, iw).real() > g.at(ik, best).real()) best = iw;
      CAPTURE(g.k[ik]);
      CHECK(std::abs(g.omega[best] - g.k[ik] * g.k[ik]) <= dw);
    }
    CHECK(g.metadata.at("window") == "hann");
  }
  SUBCASE("threads do not change values") {
    const auto rho = RootDensity::gaussian(0.05, 1.0);
    const UniformGrid x{-1.0, 1.0, 3}, t{0.25, 1.25, 3};
    const auto a = correlator_grid(rho, 1.0, x, t, CorrelatorKind::density, 1e-8, 1);
    const auto b = correlator_grid(rho, 1.0, x, t, CorrelatorKind::density, 1e-8, 3);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].value == b[i].value);
    CHECK(a[1].x == doctest::Approx(0.0));
    CHECK(a[3].t == doctest::Approx(0.75));
  }
  SUBCASE("mismatched samples") {
    CHECK_THROWS_AS(spectral_transform(std::vector<CorrelatorSample>(5), xg, tg), Error);
  }
}
