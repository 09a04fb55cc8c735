#include "lldyn/pfd.hpp"

#include <algorithm>

#include "lldyn/formfactor.hpp"

namespace lldyn {

ReducedFormFactor reduced_field(double c) {
  require(c > 0, "c must be positive");
  return {OperatorKind::field, c, [c](std::span<const double> lam, std::span<const double> mu) {
            require(mu.size() + 1 == lam.size(), "field: need |mu| = |lam| - 1");
            return field_amplitude(lam, mu, c).modulus2();
          }};
}

ReducedFormFactor reduced_density(double c) {
  require(c > 0, "c must be positive");
  return {OperatorKind::density, c, [c](std::span<const double> lam, std::span<const double> mu) {
            require(mu.size() == lam.size(), "density: need |mu| = |lam|");
            return density_amplitude(lam, mu, c).modulus2();
          }};
}

double pfd_coeff_field_leading(std::span<const double> lam, double c, int a) {
  const int N = static_cast<int>(lam.size());
  require(a >= 0 && a < N, "pfd: index a out of range");
  double v = 1.0;
  for (int i = 0; i < N; ++i)
    if (i != a) v *= 4 * c * c / ((lam[i] - lam[a]) * (lam[i] - lam[a]) + c * c);
  return v;
}

double pfd_coeff_field_leading(const BetheState& state, int a) {
  return pfd_coeff_field_leading(state.roots(), state.c(), a);
}

double pfd_coeff_density_leading(std::span<const double> lam, double c, int a, double mu_a) {
  const int N = static_cast<int>(lam.size());
  require(a >= 0 && a < N, "pfd: index a out of range");
  const double d2 = (lam[a] - mu_a) * (lam[a] - mu_a);
  double v = 1.0;
  for (int j = 0; j < N; ++j) {
    if (j == a) continue;
    const double x = lam[j] - lam[a], y = lam[j] - mu_a;
    v *= 4 * c * c * d2 / ((x * x + c * c) * (y * y + c * c));
  }
  return v;
}

double pfd_coeff_density_leading(const BetheState& state, int a, double mu_a) {
  return pfd_coeff_density_leading(state.roots(), state.c(), a, mu_a);
}

namespace {

std::vector<double> default_direction(int n) {
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.37 * i);
  return d;
}

std::vector<double> direction_for(const ProbeOptions& opt, int n) {
  if (opt.direction.empty()) return default_direction(n);
  require(static_cast<int>(opt.direction.size()) == n, "pfd: direction has the wrong length");
  for (double d : opt.direction) require(d != 0.0 && std::isfinite(d), "pfd: direction entries must be non-zero");
  return opt.direction;
}

void check_options(const ProbeOptions& opt) {
  require(opt.eps0 > 0 && opt.ratio > 1, "pfd: need eps0 > 0 and ratio > 1");
  require(opt.levels >= 2 && opt.order >= 0 && opt.order < opt.levels, "pfd: need 0 <= order < levels");
}

// Richardson on g(eps) = A + a1 eps + a2 eps^2 + ..., eps_k = eps0 / ratio^k.
ProbeResult extrapolate(const std::vector<double>& g, const std::vector<double>& eps,
                        const ProbeOptions& opt) {
  const int K = static_cast<int>(g.size());
  for (int k = 2; k < K; ++k) {
    const double r1 = std::abs(g[k] / g[k - 1]), r0 = std::abs(g[k - 1] / g[k - 2]);
    if (std::isfinite(r1) && r1 > opt.ratio / 2 && r0 > opt.ratio / 2)
      fail(Errc::not_converged, "residue probe diverges: pole of higher order than assumed");
  }
  for (double v : g)
    if (!std::isfinite(v)) fail(Errc::not_converged, "residue probe produced a non-finite value");
  std::vector<std::vector<double>> R(K, std::vector<double>(opt.order + 1, 0.0));
  for (int k = 0; k < K; ++k) {
    R[k][0] = g[k];
    double rm = 1.0;
    for (int m = 1; m <= std::min(k, opt.order); ++m) {
      rm *= opt.ratio;
      R[k][m] = (rm * R[k][m - 1] - R[k - 1][m - 1]) / (rm - 1);
    }
  }
  ProbeResult out;
  const int M = std::min(K - 1, opt.order);
  out.value = R[K - 1][M];
  out.error_estimate = std::abs(R[K - 1][M] - (M > 0 ? R[K - 1][M - 1] : R[K - 2][0]));
  if (K - 2 >= M) out.error_estimate = std::max(out.error_estimate, std::abs(R[K - 1][M] - R[K - 2][M]));
  out.sequence = g;
  out.eps = eps;
  return out;
}

std::vector<double> eps_sequence(const ProbeOptions& opt) {
  std::vector<double> e(opt.levels);
  for (int k = 0; k < opt.levels; ++k) e[k] = opt.eps0 / std::pow(opt.ratio, k);
  return e;
}

}  // namespace

ProbeResult residue_probe(const ReducedFormFactor& rf, std::span<const double> lam, int a,
                          std::optional<double> mu_a, const ProbeOptions& opt) {
  check_options(opt);
  const int N = static_cast<int>(lam.size());
  require(N >= 1 && N <= 4, "residue probe: need 1 <= N <= 4");
  require(a >= 0 && a < N, "residue probe: index a out of range");
  const bool density = rf.kind == OperatorKind::density;
  require(density == mu_a.has_value(), "residue probe: mu_a is required for the density and only for it");
  const auto d = direction_for(opt, N - 1);
  const auto eps = eps_sequence(opt);
  std::vector<double> g;
  for (double e : eps) {
    std::vector<double> mu;
    double weight = 1.0;
    for (int i = 0, k = 0; i < N; ++i) {
      if (i == a) {
        if (density) mu.push_back(*mu_a);
        continue;
      }
      const double off = e * d[k++];
      mu.push_back(lam[i] + off);
      weight *= std::pow(off, opt.pole_order);
    }
    g.push_back(weight * rf(lam, mu));
  }
  return extrapolate(g, eps, opt);
}

ProbeResult residue_probe(const ReducedFormFactor& rf, const BetheState& state, int a,
                          std::optional<double> mu_a, const ProbeOptions& opt) {
  require(std::abs(rf.c - state.c()) <= 1e-14 * state.c(), "residue probe: coupling mismatch");
  return residue_probe(rf, state.roots(), a, mu_a, opt);
}

ProbeResult density_vanishing_probe(std::span<const double> lam, double c, VanishingConfig cfg, int a,
                                    const ProbeOptions& opt) {
  check_options(opt);
  const int N = static_cast<int>(lam.size());
  require(N >= 1 && N <= 4, "vanishing probe: need 1 <= N <= 4");
  require(a >= 0 && a < N, "vanishing probe: index a out of range");
  const auto rf = reduced_density(c);
  const auto d = direction_for(opt, N);
  const auto eps = eps_sequence(opt);
  // G(mu) = prod_i (mu_i - lam_i)^2 F(lam, mu), regular at mu = lam
  auto G = [&](const std::vector<double>& mu) {
    double w = 1.0;
    for (int i = 0; i < N; ++i) w *= (mu[i] - lam[i]) * (mu[i] - lam[i]);
    return w * rf(lam, mu);
  };
  std::vector<double> g;
  for (double e : eps) {
    std::vector<double> mu(N);
    for (int i = 0; i < N; ++i) mu[i] = lam[i] + e * d[i];
    if (cfg == VanishingConfig::all_double) {
      g.push_back(G(mu));
    } else {
      // d/dmu_a G at the probe point, central difference of width eps|d_a|/2
      const double h = 0.5 * e * std::abs(d[a]);
      auto up = mu, dn = mu;
      up[a] += h;
      dn[a] -= h;
      g.push_back((G(up) - G(dn)) / (2 * h));
    }
  }
  return extrapolate(g, eps, opt);
}

long pfd_multiplicity(int N, int n, int p) {
  require(N >= 1 && n >= 0 && p >= 0, "pfd multiplicity: bad arguments");
  long f = 1;
  for (int k = 2; k <= N - 1; ++k) f *= k;
  long den = 1L << n;
  for (int k = 2; k <= p; ++k) den *= k;
  return f / den;
}

long count_pfd_assignments(int N, std::span<const int> I0, std::span<const int> I1, std::span<const int> I2) {
  require(N >= 1 && N <= 7, "pfd counting: need 1 <= N <= 7");
  std::vector<int> want(N, 3);  // 0, 1, 2, or 3 for attained from nu = 2
  auto mark = [&](std::span<const int> s, int tag) {
    for (int j : s) {
      require(j >= 0 && j < N && want[j] == 3, "pfd counting: sets must be disjoint subsets of {0..N-1}");
      want[j] = tag;
    }
  };
  mark(I0, 0);
  mark(I1, 1);
  mark(I2, 2);
  const int M = N - 1;
  // each point i carries a code: 0 -> nu = 0; 1 + 2j -> nu = 1, f = j; 2 + 2j -> nu = 2, f = j
  const int base = 1 + 2 * N;
  long total = 1;
  for (int i = 0; i < M; ++i) total *= base;
  long count = 0;
  std::vector<int> ones(N), twos(N);
  for (long code = 0; code < total; ++code) {
    std::fill(ones.begin(), ones.end(), 0);
    std::fill(twos.begin(), twos.end(), 0);
    long r = code;
    for (int i = 0; i < M; ++i, r /= base) {
      const int v = static_cast<int>(r % base);
      if (v == 0) continue;
      const int j = (v - 1) / 2;
      ((v - 1) % 2 == 0 ? ones : twos)[j]++;
    }
    bool ok = true;
    for (int j = 0; j < N && ok; ++j) {
      // a nu = 2 point shares its image with nobody; at most two preimages overall
      if (twos[j] > 1 || (twos[j] == 1 && ones[j] > 0) || ones[j] > 2) ok = false;
      const int tag = twos[j] == 1 ? 3 : ones[j];
      if (tag != want[j]) ok = false;
    }
    if (ok) ++count;
  }
  return count;
}

}  // namespace lldyn

namespace lldyn {

std::vector<PfdCheck> pfd_verify_suite(double c, int n_max) {
  require(c > 0 && std::isfinite(c), "pfd verify: c must be positive");
  require(n_max >= 1 && n_max <= 4, "pfd verify: n_max must be in 1..4");
  const std::vector<std::vector<double>> roots{
      {0.3}, {-0.7, 0.45}, {-1.1, 0.2, 0.95}, {-1.6, -0.35, 0.5, 1.3}};
  std::vector<PfdCheck> out;
  auto residue = [&](const std::string& name, double probe, double closed) {
    PfdCheck k{name, probe, closed, std::abs(probe - closed) / std::abs(closed), 1e-6, false};
    k.pass = k.error <= k.threshold;
    out.push_back(k);
  };
  const auto field = reduced_field(c), density = reduced_density(c);
  for (int N = 1; N <= n_max; ++N) {
    const auto& lam = roots[N - 1];
    for (int a = 0; a < N; ++a) {
      const std::string tag = "N=" + std::to_string(N) + ",a=" + std::to_string(a);
      residue("field residue " + tag, residue_probe(field, lam, a).value, pfd_coeff_field_leading(lam, c, a));
      const double mu_a = lam[a] + 0.63;
      residue("density residue " + tag, residue_probe(density, lam, a, mu_a).value,
              pfd_coeff_density_leading(lam, c, a, mu_a));
    }
  }
  for (int N = 2; N <= n_max; ++N) {
    const auto& lam = roots[N - 1];
    const double scale = pfd_coeff_field_leading(lam, c, 0);
    for (auto cfg : {VanishingConfig::all_double, VanishingConfig::one_simple}) {
      const auto r = density_vanishing_probe(lam, c, cfg, 0);
      PfdCheck k{std::string(cfg == VanishingConfig::all_double ? "density vanishing all-double"
                                                                 : "density vanishing one-simple") +
                     " N=" + std::to_string(N),
                 r.value, 0.0, std::abs(r.value) / scale, 1e-8, false};
      k.pass = k.error <= k.threshold;
      out.push_back(k);
    }
  }
  for (int N = 1; N <= 5; ++N)
    for (int n = 0; n <= 2; ++n)
      for (int p = 0; p <= 2; ++p) {
        if (2 * n + p > N - 1 || (n + p + 1) + n > N) continue;
        std::vector<int> I0, I1, I2;
        int j = 0;
        for (int k = 0; k < n + p + 1; ++k) I0.push_back(j++);
        for (int k = 0; k < n; ++k) I2.push_back(j++);
        const double got = static_cast<double>(count_pfd_assignments(N, I0, I1, I2));
        const double want = static_cast<double>(pfd_multiplicity(N, n, p));
        PfdCheck k{"multiplicity N=" + std::to_string(N) + ",n=" + std::to_string(n) + ",p=" + std::to_string(p), got,
                   want, std::abs(got - want), 0.0, false};
        k.pass = got == want;
        out.push_back(k);
      }
  return out;
}

}  // namespace lldyn
