#include "lldyn/special.hpp"

#include <vector>

#include "lldyn/quadrature.hpp"

namespace lldyn {

namespace {

constexpr double kSwitch = 6.0;  // series below, continued fraction above
const double sqrt_pi = std::sqrt(pi);
const cplx e_ipi4 = std::polar(1.0, pi / 4);

cplx expi(double phase) { return {std::cos(phase), std::sin(phase)}; }

// F(x) by its power series in x^2; fine for |x| < kSwitch.
cplx fresnel_series(double x) {
  const cplx q(0.0, -x * x / 4);
  cplx a = 1.0;  // q^n / n!
  cplx sum = x;
  for (int n = 1; n < 400; ++n) {
    a *= q / static_cast<double>(n);
    const cplx term = x * a / static_cast<double>(2 * n + 1);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum) && n > x * x / 4) break;
  }
  return sum;
}

// G(a) = \int_a^\infty e^{-i s^2/4} ds for a > 0, via the Laplace continued
// fraction of erfc(z), z = e^{i pi/4} a/2, evaluated with modified Lentz.
cplx fresnel_tail(double a) {
  const cplx z = e_ipi4 * (a / 2);
  const double tiny = 1e-300;
  cplx f = z, C = z, D = 0.0;
  for (int j = 1; j < 5000; ++j) {
    const double aj = j / 2.0;
    D = z + aj * D;
    if (std::abs(D) == 0.0) D = tiny;
    C = z + aj / C;
    if (std::abs(C) == 0.0) C = tiny;
    D = 1.0 / D;
    const cplx delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::conj(e_ipi4) * expi(-a * a / 4) / f;
}

cplx chi_plus_smooth(double x) {
  const double a = std::abs(x);
  if (a < kSwitch) {
    const cplx chi0 = std::sqrt(two_pi) * cplx(-1.0, 1.0);
    return chi0 - sqrt_pi * e_ipi4 * a * fresnel_series(a) +
           cplx(0.0, 2.0) * sqrt_pi * e_ipi4 * (expi(-a * a / 4) - 1.0);
  }
  // complementary form; avoids the O(a) cancellation of the direct one
  const cplx full = sqrt_pi * e_ipi4 * (a * fresnel_tail(a) + cplx(0.0, 2.0) * expi(-a * a / 4));
  return full - pi * a;
}

void check_alpha(double alpha) {
  if (!std::isfinite(alpha) || std::abs(alpha - std::round(alpha)) < 1e-14)
    fail(Errc::domain, "lattice sum: alpha must be non-integer");
}

// sum_{m>=0} e^{i phi0} r^m / (M+m)^k, two-term expansion in 1/M.
cplx geometric_tail(double phi0, cplx r, double M, int k) {
  const cplx om = 1.0 - r;
  if (k == 1) return expi(phi0) * (1.0 / (M * om) - r / (M * M * om * om));
  return expi(phi0) * (1.0 / (M * M * om) - 2.0 * r / (M * M * M * om * om));
}

long double wrap_phase(long double phi) {
  constexpr long double tp = 6.283185307179586476925286766559L;
  return phi - tp * std::floor(phi / tp);
}

// sum over n in [n0, n1] of e^{i(W v + T v^2)}/v^k, v = n + alpha.
// Exact phases are re-anchored in extended precision every block.
cplx block_sum(double alpha, double W, double T, long n0, long n1, int k) {
  constexpr long block = 1024;
  CompensatedSum<cplx> total;
  for (long b = n0; b <= n1; b += block) {
    const long e = std::min(n1, b + block - 1);
    const long double v0 = static_cast<long double>(b) + alpha;
    const long double ph = wrap_phase(static_cast<long double>(W) * v0 +
                                      static_cast<long double>(T) * v0 * v0);
    cplx z = expi(static_cast<double>(ph));
    cplx step = expi(static_cast<double>(wrap_phase(W + T * (2 * v0 + 1))));
    const cplx curv = expi(2 * T);
    cplx part = 0.0;
    for (long n = b; n <= e; ++n) {
      const double v = static_cast<double>(n) + alpha;
      part += z / (k == 1 ? v : v * v);
      z *= step;
      step *= curv;
    }
    total.add(part);
  }
  return total.value();
}

double phase_at(double W, double T, double v) {
  return static_cast<double>(wrap_phase(static_cast<long double>(W) * v +
                                        static_cast<long double>(T) * v * v));
}

}  // namespace

cplx fresnel_quarter(double x) {
  const double a = std::abs(x);
  cplx v = a < kSwitch ? fresnel_series(a) : sqrt_pi * std::conj(e_ipi4) - fresnel_tail(a);
  return x < 0 ? -v : v;
}

cplx chi_smooth(int sign, double x) {
  const cplx v = chi_plus_smooth(x);
  return sign >= 0 ? v : std::conj(v);
}

cplx chi(int sign, double x) { return chi_smooth(sign, x) + pi * std::abs(x); }

cplx chi_quadrature(int sign, double x, double tol) {
  // chi_+(x) = 2 i sqrt(pi) e^{i pi/4} \int_0^1 exp(-i x^2/(4 r^2)) dr,
  // integrated in w = 1/r up to a cutoff, then an asymptotic tail.
  cplx I = 1.0;
  if (x != 0.0) {
    const double a = x * x / 4;
    const double W = std::max(1.0, std::sqrt(2000.0 / a));
    std::vector<double> breaks;
    const double cycles = a * (W * W - 1) / two_pi;
    for (int k = 1; k < cycles && k < 20000; ++k) breaks.push_back(std::sqrt(1 + two_pi * k / a));
    auto f = [a](double w) { return expi(-a * w * w) / (w * w); };
    QuadOptions opt;
    opt.abs_tol = tol / 10;
    opt.max_intervals = 100000;
    const cplx body = W > 1.0 ? integrate_or_throw(f, 1.0, W, opt, breaks).value : cplx(0.0);
    const cplx q = cplx(0.0, 2 * a);
    const double W2 = W * W;
    const cplx tail = expi(-a * W2) * (1.0 / (W * W2 * q) - 3.0 / (W * W2 * W2 * q * q) +
                                       15.0 / (W * W2 * W2 * W2 * q * q * q) -
                                       105.0 / (W * W2 * W2 * W2 * W2 * q * q * q * q));
    I = body + tail;
  }
  const cplx v = cplx(0.0, 2.0) * sqrt_pi * e_ipi4 * I;
  return sign >= 0 ? v : std::conj(v);
}

cplx lattice_sum2_closed(const LatticeSumParams& p) {
  check_alpha(p.alpha);
  if (!(p.L > 0)) fail(Errc::domain, "lattice sum: L must be positive");
  const double W = p.w / p.L;
  if (!(std::abs(W) < pi)) fail(Errc::domain, "lattice sum: |w/L| must be < pi");
  const double s = std::sin(pi * p.alpha);
  const double lead = (pi / s) * (pi / s);
  if (p.tau == 0.0) {
    if (W == 0.0) return lead;
    const double sg = W > 0 ? 1.0 : -1.0;
    return lead + cplx(0.0, pi / s) * W * expi(pi * p.alpha * sg);
  }
  const double rt = std::sqrt(std::abs(p.tau));
  return lead + cplx(0.0, pi * p.w / (p.L * std::tan(pi * p.alpha))) +
         (rt / p.L) * chi_smooth(p.tau > 0 ? 1 : -1, p.w / rt);
}

cplx lattice_sum2_direct(const LatticeSumParams& p, long n_max) {
  check_alpha(p.alpha);
  if (n_max < 1) fail(Errc::domain, "lattice sum: n_max must be positive");
  const double W = p.w / p.L, T = p.tau / (p.L * p.L);
  if (W == 0.0 && T == 0.0) {
    // non-oscillatory: midpoint rule for the two tails
    const cplx body = block_sum(p.alpha, 0, 0, -n_max, n_max, 2);
    return body + 1.0 / (n_max + 0.5 + p.alpha) + 1.0 / (n_max + 0.5 - p.alpha);
  }
  // push the cutoff away from a stationary (aliased) endpoint
  long N = n_max;
  auto resolvable = [&](long n) {
    for (double s : {1.0, -1.0}) {
      const double v0 = s * (n + 1) + p.alpha, v1 = s * (n + 2) + p.alpha;
      const cplx r = expi(phase_at(W, T, v1) - phase_at(W, T, v0));
      if (std::abs(1.0 - r) * std::abs(v0) < 10.0) return false;
    }
    return true;
  };
  while (!resolvable(N)) {
    if (N > 64 * n_max) fail(Errc::domain, "lattice sum: tail not resolvable, change n_max");
    N += N / 16 + 1;
  }
  cplx total = block_sum(p.alpha, W, T, -N, N, 2);
  for (double s : {1.0, -1.0}) {
    const double v0 = s * (N + 1) + p.alpha, v1 = s * (N + 2) + p.alpha;
    const double ph0 = phase_at(W, T, v0);
    const cplx r = expi(phase_at(W, T, v1) - ph0);
    total += geometric_tail(ph0, r, std::abs(v0), 2);
  }
  return total;
}

cplx lattice_sum1_closed(double alpha, double W) {
  check_alpha(alpha);
  if (!(W != 0.0 && std::abs(W) <= pi)) fail(Errc::domain, "first-order lattice sum: need 0 < |W| <= pi");
  return (pi / std::sin(pi * alpha)) * expi(pi * alpha * (W > 0 ? 1.0 : -1.0));
}

double lattice_sum1_midpoint(double alpha) {
  check_alpha(alpha);
  return pi / std::tan(pi * alpha);
}

cplx lattice_sum1_direct(double alpha, double W, long n_max) {
  check_alpha(alpha);
  if (n_max < 1) fail(Errc::domain, "lattice sum: n_max must be positive");
  if (W == 0.0) {
    // pair n with -n: 1/(n+a) + 1/(a-n) = 2a/(a^2-n^2)
    CompensatedSum<double> s;
    for (long n = n_max; n >= 1; --n) {
      const double nd = static_cast<double>(n);
      s.add(2 * alpha / (alpha * alpha - nd * nd));
    }
    s.add(1.0 / alpha);
    s.add(-2 * alpha / (n_max + 0.5));
    return s.value();
  }
  cplx total = block_sum(alpha, W, 0.0, -n_max, n_max, 1);
  const double vp = n_max + 1 + alpha, vm = -(n_max + 1) + alpha;
  total += geometric_tail(W * vp, expi(W), vp, 1);
  total -= geometric_tail(W * vm, expi(-W), -vm, 1);
  return total;
}

}  // namespace lldyn
