#include "lldyn/correlator.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

#include "lldyn/chebyshev.hpp"
#include "lldyn/special.hpp"

namespace lldyn {

namespace {

cplx expi(double phase) { return {std::cos(phase), std::sin(phase)}; }

// 20-point Gauss-Legendre nodes and weights on [-1,1] (positive half).
constexpr std::array<double, 10> gl20_x = {
    0.0765265211334973337546404, 0.2277858511416450780804962, 0.3737060887154195606725482,
    0.5108670019508270980043641, 0.6360536807265150254528367, 0.7463319064601507926143051,
    0.8391169718222188233945291, 0.9122344282513259058677524, 0.9639719272779137912676661,
    0.9931285991850949247861224};
constexpr std::array<double, 10> gl20_w = {
    0.1527533871307258506980843, 0.1491729864726037467878287, 0.1420961093183820513292983,
    0.1316886384491766268984945, 0.1181945319615184173123774, 0.1019301198172404350367501,
    0.0832767415767047487247581, 0.0626720483341090635695065, 0.0406014298003869413310400,
    0.0176140071391521183118620};

// Quadrature rule for integrals against rho(nu): atoms, or composite
// Gauss-Legendre panels short enough to resolve Lorentzians of width c.
// Q(nu) is stored at the nodes.
struct NuRule {
  std::vector<double> nu, w;  // w includes rho(nu)
  std::vector<cplx> q;
};

std::vector<double> rule_edges(const RootDensity& rho, double h, int refine) {
  std::vector<double> pts{rho.support_min()};
  for (double b : rho.breakpoints())
    if (b > rho.support_min() && b < rho.support_max()) pts.push_back(b);
  pts.push_back(rho.support_max());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  h /= (1 << refine);
  std::vector<double> edges{pts[0]};
  for (size_t i = 1; i < pts.size(); ++i) {
    const double len = pts[i] - pts[i - 1];
    const int m = std::max(1, static_cast<int>(std::ceil(len / h)));
    for (int k = 1; k <= m; ++k) edges.push_back(pts[i - 1] + len * k / m);
  }
  return edges;
}

NuRule make_rule_nodes(const RootDensity& rho, double c, int refine, double feature) {
  NuRule r;
  if (rho.is_zero()) return r;
  if (rho.is_atomic()) {
    r.nu = rho.atom_positions();
    r.w.assign(r.nu.size(), rho.atom_weight());
    return r;
  }
  auto edges = rule_edges(rho, std::min(c, feature), refine);
  for (size_t i = 1; i < edges.size(); ++i) {
    const double m = 0.5 * (edges[i] + edges[i - 1]), hl = 0.5 * (edges[i] - edges[i - 1]);
    for (int j = 0; j < 10; ++j)
      for (double s : {-1.0, 1.0}) {
        const double x = m + s * hl * gl20_x[j];
        const double v = rho(x);
        if (v == 0.0) continue;
        r.nu.push_back(x);
        r.w.push_back(hl * gl20_w[j] * v);
      }
  }
  return r;
}

class Evaluator {
 public:
  Evaluator(const RootDensity& rho, double c, double x, double t) : rho_(rho), c_(c), x_(x), t_(t) {
    require(c > 0 && std::isfinite(c), "correlator: c must be positive");
    require(std::isfinite(x) && std::isfinite(t), "correlator: x and t must be finite");
    build();
  }

  // Phi(lambda), the field exponent (also the mu -> infinity limit of Psi)
  cplx phi(double lam) const {
    CompensatedSum<cplx> s;
    const double c2 = c_ * c_;
    for (size_t j = 0; j < rule_.nu.size(); ++j) {
      const double nu = rule_.nu[j], d = lam - nu;
      const cplx num = cplx(0.0, 2 * c_ * d * (x_ - 2 * t_ * nu)) + 2 * c2 * rule_.q[j];
      s.add(rule_.w[j] * num / (d * d + c2));
    }
    return s.value();
  }

  cplx psi(double lam, double mu) const {
    if (mu == lam) return 0.0;
    CompensatedSum<cplx> s;
    const double c2 = c_ * c_, dm = mu - lam;
    for (size_t j = 0; j < rule_.nu.size(); ++j) {
      const double nu = rule_.nu[j], a = lam - nu, b = mu - nu;
      const double den = (c2 + a * a) * (c2 + b * b);
      const cplx num = cplx(0.0, 2 * c_ * dm * (c2 + a * b) * (x_ - 2 * nu * t_)) + 2 * c2 * dm * dm * rule_.q[j];
      s.add(rule_.w[j] * num / den);
    }
    return s.value();
  }

  // s(mu) = 1/2pi + (1/2pi) int K(mu - nu) rho(nu)
  double smooth_hole(double mu) const {
    CompensatedSum<double> s;
    for (size_t j = 0; j < rule_.nu.size(); ++j) s.add(rule_.w[j] * kernel(mu - rule_.nu[j], c_));
    return (1.0 + s.value()) / two_pi;
  }

  const NuRule& rule() const { return rule_; }

 private:
  const RootDensity& rho_;
  double c_, x_, t_;
  NuRule rule_;

  void fill_q() {
    rule_.q.resize(rule_.nu.size());
    for (size_t j = 0; j < rule_.nu.size(); ++j) rule_.q[j] = damping_q(x_, t_, rule_.nu[j]);
  }

  // Panels are refined until the fixed rule reproduces adaptive quadrature
  // of the exponents at a few probe points.
  void build() {
    if (rho_.is_zero() || rho_.is_atomic()) {
      rule_ = make_rule_nodes(rho_, c_, 0, 1.0);
      fill_q();
      return;
    }
    const double feature = rho_.feature_scale();
    const double lo = rho_.support_min(), hi = rho_.support_max();
    const std::vector<double> probes{lo, 0.37 * lo + 0.63 * hi, 0.5 * (lo + hi), hi + c_};
    for (int refine = 0; refine < 5; ++refine) {
      rule_ = make_rule_nodes(rho_, c_, refine, feature);
      fill_q();
      double worst = 0.0, scale = 1e-300;
      for (double lam : probes) {
        QuadOptions opt;
        opt.abs_tol = 1e-14;
        opt.max_intervals = 20000;
        const std::vector<double> extra{lam, lam + 0.71 * c_};
        const cplx ref_phi = rho_.integrate([&](double nu) {
                                   const double d = lam - nu;
                                   return (cplx(0.0, 2 * c_ * d * (x_ - 2 * t_ * nu)) + 2 * c_ * c_ * damping_q(x_, t_, nu)) /
                                          (d * d + c_ * c_);
                                 }, opt, extra).value;
        const double mu = lam + 0.71 * c_;
        const cplx ref_psi = rho_.integrate([&](double nu) {
                                   const double a = lam - nu, b = mu - nu, c2 = c_ * c_, dm = mu - lam;
                                   return (cplx(0.0, 2 * c_ * dm * (c2 + a * b) * (x_ - 2 * nu * t_)) +
                                           2 * c2 * dm * dm * damping_q(x_, t_, nu)) /
                                          ((c2 + a * a) * (c2 + b * b));
                                 }, opt, extra).value;
        worst = std::max({worst, std::abs(phi(lam) - ref_phi), std::abs(psi(lam, mu) - ref_psi)});
        scale = std::max({scale, std::abs(ref_phi), std::abs(ref_psi)});
      }
      if (worst <= 1e-13 + 1e-12 * scale) return;
    }
    fail(Errc::quadrature, "correlator: fixed nu-rule failed to reproduce adaptive quadrature");
  }
};

// Breakpoints splitting [a,b] so that the phase A u^2 + B u advances by at
// most 2 pi per panel.
std::vector<double> phase_breaks(double a, double b, double A, double B, std::vector<double> base = {}) {
  std::vector<double> out = std::move(base);
  if (A != 0.0) {
    const double us = -B / (2 * A);
    if (us > a && us < b) out.push_back(us);
  }
  double u = a;
  for (int n = 0; n < 200000 && u < b; ++n) {
    auto slope = [&](double v) { return std::abs(2 * A * v + B); };
    double step = two_pi / std::max(slope(u), two_pi / (b - a));
    step = std::min(step, two_pi / std::max(slope(std::min(u + step, b)), two_pi / (b - a)));
    u += step;
    if (u < b) out.push_back(u);
  }
  return out;
}

QuadOptions quad(double tol, int max_intervals = 50000) {
  QuadOptions o;
  o.abs_tol = tol;
  o.max_intervals = max_intervals;
  return o;
}

void check_tol(double tol) {
  require(tol >= 1e-8 * (1 - 1e-12) && std::isfinite(tol), "correlator: tol must be >= 1e-8");
}

}  // namespace

cplx damping_q(double x, double t, double nu) {
  if (t == 0.0) return -std::abs(x);
  const double rt = std::sqrt(std::abs(t));
  return rt / pi * chi_smooth(t > 0 ? -1 : 1, (x - 2 * nu * t) / rt);
}

cplx field_exponent(const RootDensity& rho, double c, double x, double t, double lambda, double) {
  return Evaluator(rho, c, x, t).phi(lambda);
}

cplx density_exponent(const RootDensity& rho, double c, double x, double t, double lambda, double mu, double) {
  return Evaluator(rho, c, x, t).psi(lambda, mu);
}

cplx density_integrand(const RootDensity& rho, double c, double x, double t, double lambda, double mu) {
  Evaluator ev(rho, c, x, t);
  const double rho_h = ev.smooth_hole(mu) - rho(mu);
  return expi(t * (lambda * lambda - mu * mu) + x * (mu - lambda)) * rho(lambda) * rho_h *
         std::exp(ev.psi(lambda, mu));
}

CorrelatorSample field_correlator(const RootDensity& rho, double c, double x, double t, double tol) {
  check_tol(tol);
  CorrelatorSample out{x, t, 0.0, 0.0};
  if (rho.is_zero()) return out;
  Evaluator ev(rho, c, x, t);
  auto f = [&](double lam) { return expi(t * lam * lam - x * lam) * std::exp(ev.phi(lam)); };
  if (rho.is_atomic()) {
    out.value = rho.integrate(f).value;
    return out;
  }
  const auto br = phase_breaks(rho.support_min(), rho.support_max(), t, -x, rho.breakpoints());
  const auto r = integrate([&](double lam) { return rho(lam) * f(lam); }, rho.support_min(), rho.support_max(),
                           quad(0.5 * tol), br);
  if (!r.converged) fail(Errc::quadrature, "field correlator: outer quadrature missed tolerance");
  out.value = r.value;
  out.quad_error = r.error;
  return out;
}

namespace {

// int_{-inf}^{inf} rho_h(mu) e^{i(x mu - t mu^2)} e^{Psi(lam, mu)} d mu, or over [-cut, cut]
class DensityInner {
 public:
  DensityInner(const RootDensity& rho, const Evaluator& ev, double c, double x, double t, double tol,
               std::optional<double> cut)
      : rho_(rho), ev_(ev), c_(c), x_(x), t_(t), tol_(tol), cut_(cut) {
    const double reach = std::max(std::abs(rho.support_min()), std::abs(rho.support_max()));
    if (cut_) {
      require(*cut_ > 0, "density correlator: mu cutoff must be positive");
      M_ = *cut_;
    } else {
      if (x == 0.0 && t == 0.0)
        fail(Errc::domain, "density correlator: the hole-density integral diverges at x = t = 0; set a mu cutoff");
      M_ = reach + 10 * c;
      if (t != 0.0) {
        M_ = std::max({M_, std::abs(x / t) + 1.0, std::sqrt(40.0 / std::abs(t))});
      } else {
        M_ = std::max(M_, 40.0 / std::abs(x));
      }
    }
  }

  double error() const { return err_; }

  cplx operator()(double lam) {
    const cplx ephi = std::exp(ev_.phi(lam));
    const double tol = tol_;
    auto theta = [&](double mu) { return x_ * mu - t_ * mu * mu; };
    // R(mu) = s(mu) e^{Psi} - e^{Phi}/2pi decays like 1/mu; for a cutoff the
    // subtraction is skipped
    const cplx sub = cut_ ? cplx(0.0) : ephi / two_pi;
    auto R = [&](double mu) { return ev_.smooth_hole(mu) * std::exp(ev_.psi(lam, mu)) - sub; };
    cplx total = 0.0;
    double err = 0.0;
    std::vector<double> seeds{rho_.support_min(), rho_.support_max(), lam, 0.0};
    if (t_ != 0.0) seeds.push_back(x_ / (2 * t_));
    const double tolR = std::max(tol / (8 * M_), 1e-14);
    PiecewiseChebyshev<cplx> P(R, -M_, M_, tolR, seeds);
    if (!P.converged()) fail(Errc::quadrature, "density correlator: mu interpolant did not converge");
    const auto br = phase_breaks(-M_, M_, -t_, x_, P.edges());
    const auto mid = integrate([&](double mu) { return P(mu) * expi(theta(mu)); }, -M_, M_, quad(tol / 4), br);
    if (!mid.converged) fail(Errc::quadrature, "density correlator: mu quadrature missed tolerance");
    total += mid.value;
    err += mid.error + tolR * 2 * M_;
    if (!cut_) {
      if (t_ != 0.0) {
        const double sg = t_ > 0 ? 1.0 : -1.0;
        total += sub * std::sqrt(pi / std::abs(t_)) * expi(-sg * pi / 4 + x_ * x_ / (4 * t_));
      }
      for (int side : {1, -1}) total += tail(R, side, tol / 8, err);
    }
    // particles are not holes
    auto occupied = [&](double mu) { return expi(theta(mu)) * std::exp(ev_.psi(lam, mu)); };
    if (rho_.is_atomic()) {
      CompensatedSum<cplx> s;
      for (double mu : rho_.atom_positions())
        if (!cut_ || std::abs(mu) <= *cut_) s.add(rho_.atom_weight() * occupied(mu));
      total -= s.value();
    } else {
      const double a = cut_ ? std::max(rho_.support_min(), -*cut_) : rho_.support_min();
      const double b = cut_ ? std::min(rho_.support_max(), *cut_) : rho_.support_max();
      if (b > a) {
        std::vector<double> bb = rho_.breakpoints();
        bb.push_back(lam);
        const auto br2 = phase_breaks(a, b, -t_, x_, bb);
        const auto r = integrate([&](double mu) { return rho_(mu) * occupied(mu); }, a, b, quad(tol / 4), br2);
        if (!r.converged) fail(Errc::quadrature, "density correlator: particle term missed tolerance");
        total -= r.value;
        err += r.error;
      }
    }
    err_ = std::max(err_, err);
    return total;
  }

 private:
  const RootDensity& rho_;
  const Evaluator& ev_;
  double c_, x_, t_, tol_;
  std::optional<double> cut_;
  double M_ = 0.0;
  double err_ = 0.0;

  // int over |mu| > M on one side by repeated integration by parts, with
  // mu = side M / w and derivatives from Chebyshev data in w on [0,1].
  template <class F>
  cplx tail(F& R, int side, double tol, double& err) {
    const double sM = side * M_;
    cplx prev = 0.0;
    bool have_prev = false;
    for (int n : {16, 32, 64, 128}) {
      std::vector<double> w(n + 1);
      std::vector<cplx> g(n + 1);
      for (int j = 0; j <= n; ++j) {
        w[j] = 0.5 * (1 + std::cos(pi * j / n));
        g[j] = w[j] == 0.0 ? cplx(0.0) : R(sM / w[j]);
      }
      CompensatedSum<cplx> series;
      double last = std::numeric_limits<double>::infinity();
      bool ok = false;
      for (int k = 0; k < 40; ++k) {
        std::vector<cplx> h(n + 1);
        for (int j = 0; j <= n; ++j)
          h[j] = t_ == 0.0 ? g[j] / cplx(0.0, x_) : g[j] * w[j] / cplx(0.0, x_ * w[j] - 2 * t_ * sM);
        const cplx term = (k % 2 == 0 ? 1.0 : -1.0) * h[0];
        series.add(term);
        const double mag = std::abs(term);
        if (mag < tol) {
          ok = true;
          break;
        }
        if (mag > last) break;  // asymptotic series has turned
        last = mag;
        const auto dh = lobatto_derivative(h);
        for (int j = 0; j <= n; ++j) g[j] = -(w[j] * w[j] / sM) * dh[j];
      }
      if (!ok) continue;
      const double th = x_ * sM - t_ * sM * sM;
      const cplx val = (side > 0 ? -1.0 : 1.0) * expi(th) * series.value();
      if (have_prev && std::abs(val - prev) < tol) {
        err += std::abs(val - prev);
        return val;
      }
      prev = val;
      have_prev = true;
    }
    fail(Errc::quadrature, "density correlator: tail expansion did not converge");
  }
};

}  // namespace

CorrelatorSample density_correlator(const RootDensity& rho, double c, double x, double t, double tol,
                                    std::optional<double> mu_cutoff) {
  check_tol(tol);
  CorrelatorSample out{x, t, 0.0, 0.0};
  if (rho.is_zero()) return out;
  Evaluator ev(rho, c, x, t);
  const double D = rho.total();
  const double inner_tol = tol / (10 * std::max(D, 1e-2));
  DensityInner inner(rho, ev, c, x, t, inner_tol, mu_cutoff);
  auto f = [&](double lam) { return expi(t * lam * lam - x * lam) * inner(lam); };
  if (rho.is_atomic()) {
    out.value = rho.integrate(f).value;
    out.quad_error = D * inner.error();
    return out;
  }
  const auto br = phase_breaks(rho.support_min(), rho.support_max(), t, -x, rho.breakpoints());
  const auto r = integrate([&](double lam) { return rho(lam) * f(lam); }, rho.support_min(), rho.support_max(),
                           quad(0.5 * tol, 4000), br);
  if (!r.converged) fail(Errc::quadrature, "density correlator: outer quadrature missed tolerance");
  out.value = r.value;
  out.quad_error = r.error + D * inner.error();
  return out;
}

double phi_log_kernel(double c, double nu, double lambda, double mu) {
  const double u = std::atan2((mu - lambda) / c, 1 + (mu - nu) * (lambda - nu) / (c * c));
  if (std::abs(u) < 1e-4) {
    const double u2 = u * u;
    return 2 * std::log1p(-u2 / 6 + u2 * u2 / 120);
  }
  return 2 * std::log(std::abs(std::sin(u) / u));
}

double phi_diagnostic(const RootDensity& rho, double c, double lambda, double mu) {
  require(c > 0, "phi: c must be positive");
  if (lambda == mu) return 0.0;
  QuadOptions opt;
  opt.abs_tol = 1e-13;
  opt.max_intervals = 20000;
  const std::vector<double> extra{lambda, mu};
  const auto r = rho.integrate([&](double nu) { return phi_log_kernel(c, nu, lambda, mu); }, opt, extra);
  if (!r.converged) fail(Errc::quadrature, "phi: quadrature missed tolerance");
  return r.value;
}

std::vector<CorrelatorSample> correlator_grid(const RootDensity& rho, double c, const UniformGrid& xg,
                                              const UniformGrid& tg, CorrelatorKind kind, double tol, int threads,
                                              std::optional<double> mu_cutoff) {
  require(xg.n >= 1 && tg.n >= 1, "grid: need at least one point per axis");
  const size_t total = static_cast<size_t>(xg.n) * tg.n;
  std::vector<CorrelatorSample> out(total);
  std::vector<std::string> errors(total);
  std::vector<Errc> codes(total, Errc::quadrature);
  auto work = [&](size_t first, size_t stride) {
    for (size_t i = first; i < total; i += stride) {
      const double x = xg.at(static_cast<int>(i % xg.n)), t = tg.at(static_cast<int>(i / xg.n));
      try {
        out[i] = kind == CorrelatorKind::field ? field_correlator(rho, c, x, t, tol)
                                               : density_correlator(rho, c, x, t, tol, mu_cutoff);
      } catch (const Error& e) {
        errors[i] = e.what();
        codes[i] = e.code();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(total)));
  if (nt == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nt; ++k) pool.emplace_back(work, k, nt);
    for (auto& th : pool) th.join();
  }
  for (size_t i = 0; i < total; ++i)
    if (!errors[i].empty()) fail(codes[i], errors[i]);
  return out;
}

SpectralGrid spectral_transform(const std::vector<CorrelatorSample>& samples, const UniformGrid& xg,
                                const UniformGrid& tg) {
  require(samples.size() == static_cast<size_t>(xg.n) * tg.n, "spectral: sample count does not match the grid");
  require(xg.n >= 2 && tg.n >= 2, "spectral: need at least two points per axis");
  SpectralGrid g;
  const double dx = xg.step(), dt = tg.step();
  const double X = 0.5 * (xg.max - xg.min), T = 0.5 * (tg.max - tg.min);
  const double xc = 0.5 * (xg.max + xg.min), tc = 0.5 * (tg.max + tg.min);
  auto hann = [](double u, double half) { return 0.5 * (1 + std::cos(pi * u / half)); };
  for (int m = 0; m < xg.n; ++m) g.k.push_back(two_pi * (m - xg.n / 2) / (xg.n * dx));
  for (int m = 0; m < tg.n; ++m) g.omega.push_back(two_pi * (m - tg.n / 2) / (tg.n * dt));
  // separable transform: first over x, then over t
  std::vector<cplx> partial(static_cast<size_t>(g.k.size()) * tg.n);
  for (int it = 0; it < tg.n; ++it)
    for (size_t ik = 0; ik < g.k.size(); ++ik) {
      CompensatedSum<cplx> s;
      for (int ix = 0; ix < xg.n; ++ix) {
        const double x = xg.at(ix);
        s.add(hann(x - xc, X) * expi(g.k[ik] * x) * samples[static_cast<size_t>(it) * xg.n + ix].value);
      }
      partial[static_cast<size_t>(it) * g.k.size() + ik] = dx * s.value();
    }
  g.values.resize(g.k.size() * g.omega.size());
  for (size_t iw = 0; iw < g.omega.size(); ++iw)
    for (size_t ik = 0; ik < g.k.size(); ++ik) {
      CompensatedSum<cplx> s;
      for (int it = 0; it < tg.n; ++it) {
        const double t = tg.at(it);
        s.add(hann(t - tc, T) * expi(-g.omega[iw] * t) * partial[static_cast<size_t>(it) * g.k.size() + ik]);
      }
      g.values[iw * g.k.size() + ik] = dt * s.value();
    }
  g.metadata["window"] = "hann";
  g.metadata["convention"] = "sum dx dt h(x) h(t) exp(i k x - i omega t) G(x,t)";
  g.metadata["x_grid"] = std::to_string(xg.min) + ":" + std::to_string(xg.max) + ":" + std::to_string(xg.n);
  g.metadata["t_grid"] = std::to_string(tg.min) + ":" + std::to_string(tg.max) + ":" + std::to_string(tg.n);
  return g;
}

SpectralGrid spectral_grid(const RootDensity& rho, double c, const UniformGrid& x, const UniformGrid& t,
                           CorrelatorKind kind, double tol, int threads, std::optional<double> mu_cutoff) {
  auto g = spectral_transform(correlator_grid(rho, c, x, t, kind, tol, threads, mu_cutoff), x, t);
  std::ostringstream os;
  os.precision(17);
  os << c;
  g.metadata["density"] = rho.describe();
  g.metadata["c"] = os.str();
  g.metadata["kind"] = kind == CorrelatorKind::field ? "field" : "density";
  g.metadata["tol"] = std::to_string(tol);
  if (mu_cutoff) g.metadata["mu_cutoff"] = std::to_string(*mu_cutoff);
  return g;
}

}  // namespace lldyn
