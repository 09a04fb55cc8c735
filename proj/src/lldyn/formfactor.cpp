#include "lldyn/formfactor.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace lldyn {

namespace {

// Amplitudes are evaluated in extended precision: for strongly suppressed
// matrix elements the determinant cancels by several digits.
using Real = long double;
using SmallMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16>;
constexpr int kMaxN = 16;

// Product accumulated as log-modulus, sign and quarter turns of i.
struct LogProduct {
  double log = 0.0;
  int quarter = 0;  // multiples of pi/2
  bool zero = false;

  void mul(Real x) {
    if (x == 0) {
      zero = true;
      return;
    }
    log += static_cast<double>(std::log(std::abs(x)));
    if (x < 0) quarter += 2;
  }
  void div(Real x) {
    if (x == 0) fail(Errc::domain, "form factor: coinciding rapidities across states");
    log -= static_cast<double>(std::log(std::abs(x)));
    if (x < 0) quarter += 2;
  }
  FormFactorValue value() const {
    if (zero) return {-std::numeric_limits<double>::infinity(), 0.0};
    int q = ((quarter % 4) + 4) % 4;
    double ph = q * (pi / 2);
    if (ph > pi) ph -= two_pi;
    return {log, ph};
  }
};

// Im V_j^+ with V_j^+ = prod_k (mu_k - lam_j + ic) / prod_k (lam_k - lam_j + ic)
Real im_v(std::span<const double> lam, std::span<const double> mu, double c, int j) {
  using C = std::complex<Real>;
  C v = 1;
  for (double m : mu) v *= C(Real(m) - lam[j], c);
  for (double l : lam) v /= C(Real(l) - lam[j], c);
  return v.imag();
}

Real kern(Real x, Real c) { return 2 * c / (c * c + x * x); }

std::vector<int> order_by_magnitude(const std::vector<Real>& imv) {
  std::vector<int> idx(imv.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int l, int r) { return std::abs(imv[l]) > std::abs(imv[r]); });
  return idx;
}

void pair_products(LogProduct& acc, std::span<const double> lam, std::span<const double> mu, double c) {
  const int N = static_cast<int>(lam.size()), M = static_cast<int>(mu.size());
  // prod |lam_i - lam_j| prod |mu_i - mu_j| over i<j
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) acc.mul(std::abs(lam[i] - lam[j]));
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j) acc.mul(std::abs(mu[i] - mu[j]));
  // / prod_{i,j} (mu_j - lam_i)
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < M; ++j) acc.div(Real(mu[j]) - lam[i]);
  // sqrt of the positive part of the radicand
  Real half = 0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) half += std::log(Real(lam[i] - lam[j]) * (lam[i] - lam[j]) + Real(c) * c);
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j) half -= std::log(Real(mu[i] - mu[j]) * (mu[i] - mu[j]) + Real(c) * c);
  acc.log += static_cast<double>(half / 2);
}

}  // namespace

FormFactorValue field_amplitude(std::span<const double> lam, std::span<const double> mu, double c,
                                int p, int s) {
  const int N = static_cast<int>(lam.size());
  require(N >= 1 && static_cast<int>(mu.size()) == N - 1, "field form factor: bra must have N-1 particles");
  require(N <= kMaxN, "field form factor: N too large");
  if (N == 1) return {0.0, 0.0};

  std::vector<Real> imv(N);
  for (int j = 0; j < N; ++j) imv[j] = im_v(lam, mu, c, j);
  if (p < 0 || s < 0) {
    const auto idx = order_by_magnitude(imv);
    p = idx[0];
    s = idx[1];
  }
  require(p != s && p < N && s < N, "field form factor: need distinct p, s in range");

  LogProduct acc;
  // i^{N+1} (-1)^{N(N-1)/2} i^{N-1} (2i)^{N-2}
  acc.quarter += (N + 1) + (N - 1) + (N - 2) + 2 * ((N * (N - 1) / 2) % 2);
  acc.log += (N - 2) * std::log(2.0);
  pair_products(acc, lam, mu, c);

  // rows j != p,s carry Im V_j multiplied through; rows p,s are 1 + U
  SmallMatrix A(N, N);
  for (int j = 0; j < N; ++j) {
    Real pr = 1;
    for (double m : mu) pr *= Real(m) - lam[j];
    for (int m = 0; m < N; ++m)
      if (m != j) pr /= Real(lam[m]) - lam[j];
    const bool special = j == p || j == s;
    for (int k = 0; k < N; ++k) {
      const Real br = kern(Real(lam[j]) - lam[k], c) -
                      kern(Real(lam[p]) - lam[k], c) * kern(Real(lam[s]) - lam[j], c);
      const Real u = br * pr / 2;
      A(j, k) = special ? Real(j == k) + u / imv[j] : imv[j] * Real(j == k) + u;
    }
  }
  acc.mul(A.partialPivLu().determinant());
  return acc.value();
}

FormFactorValue density_amplitude(std::span<const double> lam, std::span<const double> mu, double c,
                                  int p) {
  const int N = static_cast<int>(lam.size());
  require(N >= 1 && static_cast<int>(mu.size()) == N, "density form factor: equal particle numbers required");
  require(N <= kMaxN, "density form factor: N too large");

  std::vector<Real> imv(N);
  for (int j = 0; j < N; ++j) imv[j] = im_v(lam, mu, c, j);
  if (p < 0) p = order_by_magnitude(imv)[0];
  require(p < N, "density form factor: p out of range");

  LogProduct acc;
  // i^{N+1} (-1)^{N(N-1)/2} (2i)^{N-1}
  acc.quarter += (N + 1) + (N - 1) + 2 * ((N * (N - 1) / 2) % 2);
  acc.log += (N - 1) * std::log(2.0);
  Real dsum = 0;
  for (int j = 0; j < N; ++j) dsum += Real(lam[j]) - mu[j];
  acc.mul(dsum);
  pair_products(acc, lam, mu, c);

  SmallMatrix A(N, N);
  for (int j = 0; j < N; ++j) {
    Real pr = 1;
    for (int m = 0; m < N; ++m)
      if (m != j) pr *= (Real(mu[m]) - lam[j]) / (Real(lam[m]) - lam[j]);
    for (int k = 0; k < N; ++k) {
      const Real br = kern(Real(lam[j]) - lam[k], c) - kern(Real(lam[p]) - lam[k], c);
      const Real u = (Real(mu[j]) - lam[j]) * br * pr / 2;
      A(j, k) = j == p ? Real(j == k) + u / imv[j] : imv[j] * Real(j == k) + u;
    }
  }
  acc.mul(A.partialPivLu().determinant());
  return acc.value();
}

FormFactorValue field_ff(std::span<const double> lam, std::span<const double> mu, double c, double L,
                         int p, int s) {
  FormFactorValue r = field_amplitude(lam, mu, c, p, s);
  const std::vector<double> l(lam.begin(), lam.end()), m(mu.begin(), mu.end());
  r.log_magnitude -= (lam.size() - 0.5) * std::log(L) +
                     0.5 * (std::log(gaudin_det(L, c, l)) + std::log(gaudin_det(L, c, m)));
  return r;
}

FormFactorValue field_ff(const BetheState& bra, const BetheState& ket, int p, int s) {
  require(bra.N() + 1 == ket.N(), "field form factor: bra must have one particle fewer than ket");
  require(bra.L() == ket.L() && bra.c() == ket.c(), "field form factor: states differ in L or c");
  return field_ff(ket.roots(), bra.roots(), ket.c(), ket.L(), p, s);
}

FormFactorValue density_ff(std::span<const double> lam, std::span<const double> mu, double c, double L,
                           int p) {
  FormFactorValue r = density_amplitude(lam, mu, c, p);
  const std::vector<double> l(lam.begin(), lam.end()), m(mu.begin(), mu.end());
  r.log_magnitude -= lam.size() * std::log(L) +
                     0.5 * (std::log(gaudin_det(L, c, l)) + std::log(gaudin_det(L, c, m)));
  return r;
}

FormFactorValue density_ff(const BetheState& bra, const BetheState& ket, int p) {
  require(bra.N() == ket.N(), "density form factor: particle-number mismatch");
  require(bra.L() == ket.L() && bra.c() == ket.c(), "density form factor: states differ in L or c");
  if (bra.numbers() == ket.numbers())
    fail(Errc::invalid_argument, "density form factor: identical states, use density_ff_diagonal");
  // translation invariance: distinct states of equal momentum have <mu|sigma|lam> = 0 exactly
  const auto& db = bra.numbers().doubled();
  const auto& dk = ket.numbers().doubled();
  if (std::accumulate(db.begin(), db.end(), 0L) == std::accumulate(dk.begin(), dk.end(), 0L))
    return {-std::numeric_limits<double>::infinity(), 0.0};
  return density_ff(ket.roots(), bra.roots(), ket.c(), ket.L(), p);
}

double density_ff_diagonal(const BetheState& s) { return s.N() / s.L(); }

namespace {

void check_hole(const BetheState& ket, int a, size_t nshifts) {
  if (a < 0 || a >= ket.N()) fail(Errc::invalid_argument, "hole index out of range");
  require(nshifts == static_cast<size_t>(ket.N() - 1), "need one shift per particle other than the hole");
}

}  // namespace

std::vector<double> lowdensity_field_roots(const BetheState& ket, int a, std::span<const long> shifts) {
  check_hole(ket, a, shifts.size());
  const auto& lam = ket.roots();
  std::vector<double> mu;
  for (int j = 0, k = 0; j < ket.N(); ++j) {
    if (j == a) continue;
    mu.push_back(lam[j] + two_pi / ket.L() * (shifts[k++] + alpha_shift(lam[j], lam[a], ket.c())));
  }
  return mu;
}

std::vector<double> lowdensity_density_roots(const BetheState& ket, int a, double mu_a,
                                             std::span<const long> shifts) {
  check_hole(ket, a, shifts.size());
  const auto& lam = ket.roots();
  std::vector<double> mu;
  for (int j = 0, k = 0; j < ket.N(); ++j) {
    if (j == a) {
      mu.push_back(mu_a);
      continue;
    }
    mu.push_back(lam[j] + two_pi / ket.L() *
                              (shifts[k++] + alpha_shift(lam[j], lam[a], ket.c()) -
                               alpha_shift(lam[j], mu_a, ket.c())));
  }
  return mu;
}

BetheNumbers lowdensity_field_numbers(const BetheState& ket, int a, std::span<const long> shifts) {
  check_hole(ket, a, shifts.size());
  std::vector<long> d;
  for (int j = 0, k = 0; j < ket.N(); ++j)
    if (j != a) d.push_back(ket.numbers().doubled()[j] + 2 * shifts[k++] + 1);
  return BetheNumbers(std::move(d));
}

FormFactorValue field_ff_lowdensity(const BetheState& ket, int a, std::span<const long> shifts) {
  const auto mu = lowdensity_field_roots(ket, a, shifts);
  const auto& lam = ket.roots();
  const double L = ket.L(), c = ket.c();
  LogProduct acc;
  acc.quarter -= ket.N();  // (-i)^N
  acc.log -= 0.5 * std::log(L);
  for (int j = 0, k = 0; j < ket.N(); ++j) {
    if (j == a) continue;
    acc.mul(lam[j] > lam[a] ? 1.0 : -1.0);
    acc.mul(2 * c / std::hypot(lam[j] - lam[a], c));
    acc.div(L * (mu[k++] - lam[j]));
  }
  return acc.value();
}

FormFactorValue density_ff_lowdensity(const BetheState& ket, int a, double mu_a,
                                      std::span<const long> shifts) {
  const auto mu = lowdensity_density_roots(ket, a, mu_a, shifts);
  const auto& lam = ket.roots();
  const double L = ket.L(), c = ket.c();
  LogProduct acc;
  acc.log -= std::log(L);
  for (int j = 0; j < ket.N(); ++j) {
    if (j == a) continue;
    acc.mul(c / std::hypot(lam[j] - lam[a], c));
    acc.mul(c / std::hypot(lam[j] - mu_a, c));
    acc.mul(2 * (mu_a - lam[a]));
    acc.div(c * L * (mu[j] - lam[j]));
  }
  return acc.value();
}

}  // namespace lldyn
