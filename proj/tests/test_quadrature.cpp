#include "doctest.h"

#include <vector>

#include "lldyn/quadrature.hpp"

using namespace lldyn;

TEST_CASE("smooth integrals") {
  auto r = integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0);
  CHECK(std::abs(r.value - std::sqrt(pi)) < 1e-12);
  CHECK(r.converged);
  auto c = integrate([](double x) { return std::polar(1.0, 3 * x); }, 0.0, 2.0);
  CHECK(std::abs(c.value - (std::polar(1.0, 6.0) - 1.0) / cplx(0.0, 3.0)) < 1e-12);
}

TEST_CASE("reversed limits and kinks with breakpoints") {
  auto r = integrate([](double x) { return std::abs(x - 0.3); }, 1.0, -1.0);
  CHECK(std::abs(r.value + (0.7 * 0.7 + 1.3 * 1.3) / 2) < 1e-10);
  const std::vector<double> br{0.3};
  auto b = integrate([](double x) { return std::abs(x - 0.3); }, -1.0, 1.0, {}, br);
  CHECK(b.evaluations == 42);
  CHECK(std::abs(b.value - (0.7 * 0.7 + 1.3 * 1.3) / 2) < 1e-14);
}

TEST_CASE("failure is reported") {
  QuadOptions o;
  o.abs_tol = 1e-14;
  o.max_intervals = 3;
  auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, o);
  CHECK_FALSE(r.converged);
  CHECK_THROWS_AS(integrate_or_throw([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, o), Error);
}

TEST_CASE("compensated sum") {
  CompensatedSum<double> s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  s.add(-1.0);
  CHECK(std::abs(s.value() - 1e-13) < 1e-20);
}
