#include "doctest.h"

#include <random>

#include "lldyn/pfd.hpp"

using namespace lldyn;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<double> random_roots(std::mt19937_64& rng, int N) {
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  std::vector<double> lam;
  while (static_cast<int>(lam.size()) < N) {
    const double x = u(rng);
    bool far = true;
    for (double l : lam) far = far && std::abs(l - x) > 0.2;
    if (far) lam.push_back(x);
  }
  std::sort(lam.begin(), lam.end());
  return lam;
}

}  // namespace

TEST_CASE("closed leading coefficients") {
  const std::vector<double> one{0.3};
  CHECK(pfd_coeff_field_leading(one, 1.0, 0) == 1.0);
  CHECK(pfd_coeff_density_leading(one, 1.0, 0, 2.0) == 1.0);
  const std::vector<double> lam{-1.0, 1.0};
  CHECK(pfd_coeff_field_leading(lam, 2.0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(pfd_coeff_density_leading(lam, 2.0, 0, -1.0) == 0.0);
  CHECK_THROWS_AS(pfd_coeff_field_leading(lam, 2.0, 2), Error);
}

TEST_CASE("field residue matches the closed coefficient") {
  std::mt19937_64 rng(11);
  for (int N = 1; N <= 4; ++N)
    for (int trial = 0; trial < 4; ++trial) {
      const double c = 0.5 + 0.7 * trial;
      const auto lam = random_roots(rng, N);
      for (int a = 0; a < N; ++a) {
        const auto r = residue_probe(reduced_field(c), lam, a);
        CHECK(rel(r.value, pfd_coeff_field_leading(lam, c, a)) < 1e-6);
      }
    }
}

TEST_CASE("density residue matches the closed coefficient") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int N = 1; N <= 4; ++N)
    for (int trial = 0; trial < 4; ++trial) {
      const double c = 0.6 + 0.5 * trial;
      const auto lam = random_roots(rng, N);
      for (int a = 0; a < N; ++a) {
        double mu_a = u(rng);
        while (std::any_of(lam.begin(), lam.end(), [&](double l) { return std::abs(l - mu_a) < 0.1; }))
          mu_a = u(rng);
        const auto r = residue_probe(reduced_density(c), lam, a, mu_a);
        CHECK(rel(r.value, pfd_coeff_density_leading(lam, c, a, mu_a)) < 1e-6);
      }
    }
}

TEST_CASE("probe is independent of the approach direction") {
  const std::vector<double> lam{-1.1, 0.2, 0.9};
  const double c = 0.8;
  ProbeOptions o1, o2;
  o1.direction = {1.0, 1.0};
  o2.direction = {-0.3, 2.5};
  for (int a = 0; a < 3; ++a) {
    const double f1 = residue_probe(reduced_field(c), lam, a, std::nullopt, o1).value;
    const double f2 = residue_probe(reduced_field(c), lam, a, std::nullopt, o2).value;
    CHECK(rel(f1, f2) < 1e-6);
    const double d1 = residue_probe(reduced_density(c), lam, a, 1.7, o1).value;
    const double d2 = residue_probe(reduced_density(c), lam, a, 1.7, o2).value;
    CHECK(rel(d1, d2) < 1e-6);
  }
}

TEST_CASE("double pole: eps^2 F has a finite non-zero limit") {
  const std::vector<double> lam{-0.7, 0.5, 1.9};
  const auto F = reduced_field(1.1);
  // mu_0 -> lam_j with mu_1 held at a generic value
  for (int j = 0; j < 3; ++j) {
    std::vector<double> seq;
    for (double e : {1e-3, 1e-4, 1e-5}) {
      const std::vector<double> mu{lam[j] + e, 2.6};
      seq.push_back(e * e * F(lam, mu));
    }
    CHECK(seq[2] > 1e-6);
    CHECK(rel(seq[2], seq[1]) < 1e-2);
    CHECK(rel(seq[1], seq[0]) < 1e-1);
  }
}

TEST_CASE("wrong pole order is reported") {
  const std::vector<double> lam{-0.5, 0.8};
  ProbeOptions o;
  o.pole_order = 1;
  CHECK_THROWS_AS(residue_probe(reduced_field(1.0), lam, 0, std::nullopt, o), Error);
  CHECK_THROWS_AS(residue_probe(reduced_density(1.0), lam, 0, 2.0, o), Error);
  CHECK_THROWS_AS(residue_probe(reduced_density(1.0), lam, 0), Error);  // missing mu_a
  CHECK_THROWS_AS(residue_probe(reduced_field(1.0), lam, 0, 1.0), Error);
}

TEST_CASE("density coefficients that vanish") {
  std::mt19937_64 rng(13);
  for (int N = 2; N <= 4; ++N)
    for (int trial = 0; trial < 3; ++trial) {
      const double c = 0.7 + 0.6 * trial;
      const auto lam = random_roots(rng, N);
      const double scale = pfd_coeff_field_leading(lam, c, 0);  // typical O(1) coefficient
      for (int a = 0; a < N; ++a)
        for (auto cfg : {VanishingConfig::all_double, VanishingConfig::one_simple}) {
          const auto r = density_vanishing_probe(lam, c, cfg, a);
          CHECK(std::abs(r.value) < 1e-8 * scale);
          // genuine decay: each decade in eps shrinks the probe at least tenfold
          for (size_t k = 1; k < r.sequence.size(); ++k)
            CHECK(std::abs(r.sequence[k]) < 0.1 * std::abs(r.sequence[k - 1]));
        }
    }
}

TEST_CASE("combinatorial factor by exhaustive counting") {
  for (int N = 1; N <= 5; ++N)
    for (int n = 0; n <= 2; ++n)
      for (int m = 0; m <= 2; ++m)
        for (int p = 0; p <= 2; ++p) {
          const int used = (n + p + 1) + m + n;
          if (used > N || 2 * n + m + p > N - 1) continue;
          // first n+p+1 indices in I0, then I1, then I2
          std::vector<int> I0, I1, I2;
          int j = 0;
          for (int k = 0; k < n + p + 1; ++k) I0.push_back(j++);
          for (int k = 0; k < m; ++k) I1.push_back(j++);
          for (int k = 0; k < n; ++k) I2.push_back(j++);
          CAPTURE(N);
          CAPTURE(n);
          CAPTURE(m);
          CAPTURE(p);
          CHECK(count_pfd_assignments(N, I0, I1, I2) == pfd_multiplicity(N, n, p));
        }
  // the count does not depend on which indices fill the sets
  const std::vector<int> a0{4, 1}, a1{0}, a2{};
  CHECK(count_pfd_assignments(5, a0, a1, a2) == pfd_multiplicity(5, 0, 1));
  const std::vector<int> b0{2, 0}, b1{}, b2{3};
  CHECK(count_pfd_assignments(5, b0, b1, b2) == pfd_multiplicity(5, 1, 0));
  CHECK_THROWS_AS(count_pfd_assignments(3, std::vector<int>{0}, std::vector<int>{0}, std::vector<int>{}), Error);
}

TEST_CASE("verification table") {
  for (double c : {1.0, 2.3}) {
    const auto table = pfd_verify_suite(c, 3);
    CHECK(table.size() == 2 * 6 + 2 * 2 + 19);
    for (const auto& k : table) {
      CAPTURE(k.name);
      CHECK(k.pass);
    }
  }
  CHECK_THROWS_AS(pfd_verify_suite(1.0, 5), Error);
  CHECK_THROWS_AS(pfd_verify_suite(0.0, 2), Error);
}
