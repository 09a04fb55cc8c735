#include "doctest.h"

#include <vector>

#include "lldyn/quadrature.hpp"
#include "lldyn/special.hpp"

using namespace lldyn;

namespace {

cplx expi(double p) { return {std::cos(p), std::sin(p)}; }

// \int_0^x e^{-i s^2/4} ds by plain adaptive quadrature
cplx fresnel_oracle(double x) {
  QuadOptions o;
  o.abs_tol = 1e-14;
  o.max_intervals = 20000;
  return integrate([](double s) { return expi(-s * s / 4); }, 0.0, x, o).value;
}

// chi_+(0) = \int (e^{iu^2}-1)/u^2 du by truncated quadrature plus asymptotic tail
cplx chi0_direct() {
  const double U = 30.0;
  std::vector<double> br;
  for (int k = 1; two_pi * k < U * U; ++k) br.push_back(std::sqrt(two_pi * k));
  auto f = [](double u) -> cplx {
    if (u < 1e-4) return cplx(-u * u / 2, 1.0 - u * u * u * u / 6);  // series of (e^{iu^2}-1)/u^2
    return (expi(u * u) - 1.0) / (u * u);
  };
  QuadOptions o;
  o.abs_tol = 1e-13;
  o.max_intervals = 50000;
  const cplx body = integrate(f, 0.0, U, o, br).value;
  const cplx q(0.0, 2.0);
  const cplx tail = -expi(U * U) * (1.0 / (U * U * U * q) + 3.0 / (std::pow(U, 5) * q * q) +
                                    15.0 / (std::pow(U, 7) * q * q * q));
  return 2.0 * body + 2.0 * tail - 2.0 / U;
}

}  // namespace

TEST_CASE("fresnel integral matches quadrature on both sides of the switch") {
  for (double x : {0.3, 2.0, 5.0, 5.999999, 6.000001, 9.0, 20.0, -4.0, -13.0}) {
    CHECK(std::abs(fresnel_quarter(x) - fresnel_oracle(x)) < 1e-12);
  }
  CHECK(std::abs(fresnel_quarter(6.0 - 1e-13) - fresnel_quarter(6.0 + 1e-13)) < 1e-12);
}

TEST_CASE("chi_+(0) closed value") {
  const cplx expect = std::sqrt(two_pi) * cplx(-1.0, 1.0);
  CHECK(std::abs(chi(+1, 0.0) - expect) < 1e-14);
  CHECK(std::abs(chi_quadrature(+1, 0.0) - expect) < 1e-12);
  CHECK(std::abs(chi0_direct() - expect) < 1e-8);
}

TEST_CASE("chi closed form agrees with the quadrature oracle") {
  for (double x : {-7.0, -3.0, -0.5, 0.01, 0.1, 1.0, 2.5, 5.0, 5.999, 6.001, 8.0, 15.0, 50.0}) {
    CAPTURE(x);
    CHECK(std::abs(chi(+1, x) - chi_quadrature(+1, x)) < 1e-8);
    CHECK(std::abs(chi(-1, x) - chi_quadrature(-1, x)) < 1e-8);
  }
}

TEST_CASE("chi symmetries") {
  for (double x = -20; x <= 20; x += 0.37) {
    CHECK(std::abs(chi(-1, x) - std::conj(chi(+1, x))) < 1e-12);
    CHECK(std::abs(chi(+1, x) - chi(+1, -x)) < 1e-9);
    CHECK(std::abs(chi_smooth(+1, x) + pi * std::abs(x) - chi(+1, x)) < 1e-10);
  }
  for (double x : {0.0, 1.0, 5.0}) CHECK(std::abs(chi(-1, x) - std::conj(chi(+1, x))) < 1e-12);
}

TEST_CASE("chi decays at large argument") {
  CHECK(std::abs(chi(+1, 50.0)) < 0.2);
  double prev = std::abs(chi(+1, 5.0));
  for (double x : {10.0, 20.0, 30.0, 40.0, 50.0}) {
    const double v = std::abs(chi(+1, x));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("second-order lattice sum: trivial point") {
  CHECK(std::abs(lattice_sum2_closed({0.5, 0.0, 0.0, 10.0}) - pi * pi) < 1e-13);
  CHECK(std::abs(lattice_sum2_direct({0.5, 0.0, 0.0, 10.0}, 100000) - pi * pi) < 1e-12);
}

TEST_CASE("second-order lattice sum: closed vs direct") {
  const LatticeSumParams p{0.3, 1.0, 0.5, 200.0};
  const cplx gap = lattice_sum2_closed(p) - lattice_sum2_direct(p, 2000000);
  CHECK(std::abs(gap) <= 5.0 / (p.L * p.L));
  // tau = 0 closed form is exact
  const LatticeSumParams q{0.3, -1.5, 0.0, 100.0};
  CHECK(std::abs(lattice_sum2_closed(q) - lattice_sum2_direct(q, 1000000)) < 1e-9);
}

TEST_CASE("second-order lattice sum: conjugation and truncation") {
  const LatticeSumParams p{0.7, 2.0, -0.4, 150.0};
  const LatticeSumParams m{0.7, -2.0, 0.4, 150.0};
  CHECK(std::abs(lattice_sum2_direct(m, 20000) - std::conj(lattice_sum2_direct(p, 20000))) < 1e-11);
  CHECK(std::abs(lattice_sum2_closed(m) - std::conj(lattice_sum2_closed(p))) < 1e-12);
  const long n = 20000;
  CHECK(std::abs(lattice_sum2_direct(p, 2 * n) - lattice_sum2_direct(p, n)) < 2.0 / n);
}

TEST_CASE("second-order lattice sum: kink cancels at w = 0") {
  const double alpha = 0.3, tau = 0.5, L = 100.0, h = 1e-4;
  auto g = [&](double w) {
    return lattice_sum2_closed({alpha, w, tau, L}) -
           cplx(std::pow(pi / std::sin(pi * alpha), 2), pi * w / (L * std::tan(pi * alpha)));
  };
  const cplx right = (g(h) - g(0.0)) / h;
  const cplx left = (g(0.0) - g(-h)) / h;
  CHECK(std::abs(right - left) < 1e-5);
  // while -pi|w|/L on its own jumps in slope by 2 pi / L
  CHECK(2 * pi / L > 1e-2);
}

TEST_CASE("first-order lattice sum") {
  CHECK(std::abs(lattice_sum1_closed(0.5, pi / 2) - cplx(0.0, pi)) < 1e-14);
  CHECK(std::abs(lattice_sum1_direct(0.5, pi / 2, 1000000) - cplx(0.0, pi)) < 1e-6);
  for (double a : {0.2, 0.65})
    for (double W : {-2.0, 0.3, pi}) {
      CHECK(std::abs(lattice_sum1_closed(a, W) - lattice_sum1_closed(a + 1, W)) < 1e-12);
      CHECK(std::abs(lattice_sum1_direct(a, W, 1000000) - lattice_sum1_closed(a, W)) < 1e-6);
    }
  const double a = 0.3;
  const cplx avg = 0.5 * (lattice_sum1_closed(a, 1e-9) + lattice_sum1_closed(a, -1e-9));
  CHECK(std::abs(avg - lattice_sum1_midpoint(a)) < 1e-8);
  CHECK(std::abs(lattice_sum1_direct(a, 0.0, 1000000) - lattice_sum1_midpoint(a)) < 1e-6);
  CHECK_THROWS_AS(lattice_sum1_closed(a, 0.0), Error);
  CHECK_THROWS_AS(lattice_sum1_closed(2.0, 1.0), Error);
}
