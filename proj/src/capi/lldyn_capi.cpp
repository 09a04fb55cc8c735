#include "lldyn/lldyn.h"

#include <cstring>
#include <new>
#include <string>

#include "lldyn/correlator.hpp"
#include "lldyn/formfactor.hpp"
#include "lldyn/oracle.hpp"
#include "lldyn/pfd.hpp"
#include "lldyn/special.hpp"

struct lldyn_state {
  lldyn::BetheState s;
};

struct lldyn_density {
  lldyn::RootDensity rho;
};

namespace {

thread_local std::string g_last_error;

lldyn_status to_status(lldyn::Errc e) {
  switch (e) {
    case lldyn::Errc::invalid_argument:
      return LLDYN_INVALID_ARGUMENT;
    case lldyn::Errc::not_converged:
      return LLDYN_NOT_CONVERGED;
    case lldyn::Errc::quadrature:
      return LLDYN_QUADRATURE;
    case lldyn::Errc::domain:
      return LLDYN_DOMAIN;
    case lldyn::Errc::io:
      return LLDYN_IO;
    case lldyn::Errc::window_too_small:
      return LLDYN_WINDOW_TOO_SMALL;
  }
  return LLDYN_INTERNAL;
}

lldyn_status set_error(lldyn_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
lldyn_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const lldyn::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(LLDYN_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(LLDYN_INTERNAL, e.what());
  } catch (...) {
    return set_error(LLDYN_INTERNAL, "unknown error");
  }
}

#define LLDYN_REQUIRE_PTR(p) \
  if (!(p)) return set_error(LLDYN_INVALID_ARGUMENT, "null pointer argument: " #p)

lldyn_status copy_string(const std::string& text, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buf) return LLDYN_OK;
  if (cap < text.size() + 1) return set_error(LLDYN_BUFFER_TOO_SMALL, "buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return LLDYN_OK;
}

lldyn::LehmannConfig to_cfg(const lldyn_lehmann_config* c) {
  lldyn::LehmannConfig cfg;
  if (c) {
    cfg.number_window = c->number_window;
    cfg.cross_limit = c->cross_limit;
    cfg.max_states = c->max_states;
    cfg.tol = c->tol;
    cfg.threads = c->threads;
  }
  return cfg;
}

lldyn::UniformGrid to_grid(lldyn_grid g) { return {g.min, g.max, g.n}; }

std::optional<double> cutoff(double m) { return m > 0 ? std::optional<double>(m) : std::nullopt; }

lldyn::CorrelatorKind to_kind(lldyn_kind k) {
  if (k == LLDYN_FIELD) return lldyn::CorrelatorKind::field;
  if (k == LLDYN_DENSITY) return lldyn::CorrelatorKind::density;
  throw lldyn::Error(lldyn::Errc::invalid_argument, "unknown correlator kind");
}

void fill(const lldyn::CorrelatorSample& s, lldyn_sample* out) {
  *out = {s.x, s.t, s.value.real(), s.value.imag(), s.quad_error};
}

}  // namespace

extern "C" {

const char* lldyn_version(void) { return "0.1.0"; }

const char* lldyn_last_error(void) { return g_last_error.c_str(); }

const char* lldyn_status_name(lldyn_status s) {
  switch (s) {
    case LLDYN_OK:
      return "ok";
    case LLDYN_INVALID_ARGUMENT:
      return "invalid_argument";
    case LLDYN_NOT_CONVERGED:
      return "not_converged";
    case LLDYN_QUADRATURE:
      return "quadrature";
    case LLDYN_DOMAIN:
      return "domain";
    case LLDYN_IO:
      return "io";
    case LLDYN_WINDOW_TOO_SMALL:
      return "window_too_small";
    case LLDYN_BUFFER_TOO_SMALL:
      return "buffer_too_small";
    case LLDYN_INTERNAL:
      return "internal";
  }
  return "unknown";
}

lldyn_status lldyn_bethe_solve(double L, double c, int N, const long* doubled_numbers, double tol,
                               lldyn_state** out) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(out);
    if (N > 0) LLDYN_REQUIRE_PTR(doubled_numbers);
    if (N < 0) return set_error(LLDYN_INVALID_ARGUMENT, "N must be >= 0");
    lldyn::SolverOptions opt;
    if (tol > 0) opt.tol = tol;
    const lldyn::BetheNumbers numbers(std::vector<long>(doubled_numbers, doubled_numbers + N));
    *out = new lldyn_state{lldyn::solve_bethe(lldyn::ModelParams{L, c, N}, numbers, opt)};
    return LLDYN_OK;
  });
}

lldyn_status lldyn_state_from_json(const char* text, lldyn_state** out) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(text);
    LLDYN_REQUIRE_PTR(out);
    *out = new lldyn_state{lldyn::BetheState::from_json(text)};
    return LLDYN_OK;
  });
}

void lldyn_state_free(lldyn_state* s) { delete s; }

int lldyn_state_n(const lldyn_state* s) { return s ? s->s.N() : -1; }
double lldyn_state_length(const lldyn_state* s) { return s ? s->s.L() : 0.0; }
double lldyn_state_coupling(const lldyn_state* s) { return s ? s->s.c() : 0.0; }
double lldyn_state_residual(const lldyn_state* s) { return s ? s->s.residual() : 0.0; }

lldyn_status lldyn_state_roots(const lldyn_state* s, double* out, size_t cap) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(s);
    LLDYN_REQUIRE_PTR(out);
    const auto& r = s->s.roots();
    if (cap < r.size()) return set_error(LLDYN_BUFFER_TOO_SMALL, "buffer too small");
    std::copy(r.begin(), r.end(), out);
    return LLDYN_OK;
  });
}

lldyn_status lldyn_state_numbers(const lldyn_state* s, long* out, size_t cap) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(s);
    LLDYN_REQUIRE_PTR(out);
    const auto& d = s->s.numbers().doubled();
    if (cap < d.size()) return set_error(LLDYN_BUFFER_TOO_SMALL, "buffer too small");
    std::copy(d.begin(), d.end(), out);
    return LLDYN_OK;
  });
}

lldyn_status lldyn_state_energy_momentum(const lldyn_state* s, double* E, double* P) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(s);
    const auto em = lldyn::energy_momentum(s->s);
    if (E) *E = em.E;
    if (P) *P = em.P;
    return LLDYN_OK;
  });
}

lldyn_status lldyn_state_gaudin_det(const lldyn_state* s, double* out) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(s);
    LLDYN_REQUIRE_PTR(out);
    *out = lldyn::gaudin_det(s->s);
    return LLDYN_OK;
  });
}

lldyn_status lldyn_state_to_json(const lldyn_state* s, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(s);
    return copy_string(s->s.to_json(), buf, cap, needed);
  });
}

lldyn_status lldyn_field_ff(const lldyn_state* bra, const lldyn_state* ket, int p, int s, double* log_modulus,
                            double* phase) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(bra);
    LLDYN_REQUIRE_PTR(ket);
    const auto v = lldyn::field_ff(bra->s, ket->s, p, s);
    if (log_modulus) *log_modulus = v.log_magnitude;
    if (phase) *phase = v.phase;
    return LLDYN_OK;
  });
}

lldyn_status lldyn_density_ff(const lldyn_state* bra, const lldyn_state* ket, int p, double* log_modulus,
                              double* phase) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(bra);
    LLDYN_REQUIRE_PTR(ket);
    const auto v = lldyn::density_ff(bra->s, ket->s, p);
    if (log_modulus) *log_modulus = v.log_magnitude;
    if (phase) *phase = v.phase;
    return LLDYN_OK;
  });
}

lldyn_status lldyn_pfd_verify(double c, int n_max, lldyn_pfd_check* out, size_t cap, size_t* count) {
  return guarded([&] {
    const auto table = lldyn::pfd_verify_suite(c, n_max);
    if (count) *count = table.size();
    if (!out) return LLDYN_OK;
    if (cap < table.size()) return set_error(LLDYN_BUFFER_TOO_SMALL, "buffer too small");
    for (size_t i = 0; i < table.size(); ++i) {
      lldyn_pfd_check& o = out[i];
      std::memset(o.name, 0, sizeof o.name);
      std::strncpy(o.name, table[i].name.c_str(), sizeof o.name - 1);
      o.value = table[i].value;
      o.reference = table[i].reference;
      o.error = table[i].error;
      o.threshold = table[i].threshold;
      o.pass = table[i].pass ? 1 : 0;
    }
    return LLDYN_OK;
  });
}

lldyn_status lldyn_pfd_residue(lldyn_kind kind, const double* lam, int N, double c, int a, double mu_a,
                               double* value, double* error_estimate, double* closed_form) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(lam);
    if (N < 1) return set_error(LLDYN_INVALID_ARGUMENT, "N must be >= 1");
    const std::span<const double> l(lam, static_cast<size_t>(N));
    lldyn::ProbeResult r;
    double closed = 0.0;
    if (to_kind(kind) == lldyn::CorrelatorKind::field) {
      r = lldyn::residue_probe(lldyn::reduced_field(c), l, a);
      closed = lldyn::pfd_coeff_field_leading(l, c, a);
    } else {
      r = lldyn::residue_probe(lldyn::reduced_density(c), l, a, mu_a);
      closed = lldyn::pfd_coeff_density_leading(l, c, a, mu_a);
    }
    if (value) *value = r.value;
    if (error_estimate) *error_estimate = r.error_estimate;
    if (closed_form) *closed_form = closed;
    return LLDYN_OK;
  });
}

lldyn_status lldyn_chi(int sign, double x, double* re, double* im) {
  return guarded([&] {
    const auto v = lldyn::chi(sign, x);
    if (re) *re = v.real();
    if (im) *im = v.imag();
    return LLDYN_OK;
  });
}

lldyn_status lldyn_lattice_sum2(double alpha, double w, double tau, double L, long n_direct, double* closed_re,
                                double* closed_im, double* direct_re, double* direct_im) {
  return guarded([&] {
    const lldyn::LatticeSumParams p{alpha, w, tau, L};
    const auto cl = lldyn::lattice_sum2_closed(p);
    if (closed_re) *closed_re = cl.real();
    if (closed_im) *closed_im = cl.imag();
    if (n_direct > 0) {
      const auto d = lldyn::lattice_sum2_direct(p, n_direct);
      if (direct_re) *direct_re = d.real();
      if (direct_im) *direct_im = d.imag();
    }
    return LLDYN_OK;
  });
}

lldyn_status lldyn_lattice_sum1(double alpha, double W, long n_direct, double* closed_re, double* closed_im,
                                double* direct_re, double* direct_im) {
  return guarded([&] {
    const lldyn::cplx cl = W == 0.0 ? lldyn::cplx(lldyn::lattice_sum1_midpoint(alpha), 0.0)
                                    : lldyn::lattice_sum1_closed(alpha, W);
    if (closed_re) *closed_re = cl.real();
    if (closed_im) *closed_im = cl.imag();
    if (n_direct > 0) {
      const auto d = lldyn::lattice_sum1_direct(alpha, W, n_direct);
      if (direct_re) *direct_re = d.real();
      if (direct_im) *direct_im = d.imag();
    }
    return LLDYN_OK;
  });
}

lldyn_status lldyn_density_parse(const char* spec, lldyn_density** out) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(spec);
    LLDYN_REQUIRE_PTR(out);
    *out = new lldyn_density{lldyn::RootDensity::parse(spec)};
    return LLDYN_OK;
  });
}

lldyn_status lldyn_density_from_state(const lldyn_state* s, lldyn_density** out) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(s);
    LLDYN_REQUIRE_PTR(out);
    *out = new lldyn_density{lldyn::RootDensity::from_state(s->s)};
    return LLDYN_OK;
  });
}

void lldyn_density_free(lldyn_density* d) { delete d; }

lldyn_status lldyn_density_eval(const lldyn_density* d, double lambda, double* rho) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    LLDYN_REQUIRE_PTR(rho);
    *rho = d->rho(lambda);
    return LLDYN_OK;
  });
}

lldyn_status lldyn_density_hole(const lldyn_density* d, double c, double lambda, double* rho_h) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    LLDYN_REQUIRE_PTR(rho_h);
    *rho_h = lldyn::hole_density(d->rho, c)(lambda);
    return LLDYN_OK;
  });
}

lldyn_status lldyn_density_total(const lldyn_density* d, double* D) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    LLDYN_REQUIRE_PTR(D);
    *D = d->rho.total();
    return LLDYN_OK;
  });
}

lldyn_status lldyn_density_support(const lldyn_density* d, double* lo, double* hi) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    if (lo) *lo = d->rho.support_min();
    if (hi) *hi = d->rho.support_max();
    return LLDYN_OK;
  });
}

lldyn_status lldyn_density_describe(const lldyn_density* d, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    return copy_string(d->rho.describe(), buf, cap, needed);
  });
}

lldyn_status lldyn_dilute_numbers(const lldyn_density* d, double L, double c, long* doubled, size_t cap, int* N) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    const auto b = lldyn::dilute_sampler(d->rho, L, c);
    if (N) *N = b.size();
    if (!doubled) return LLDYN_OK;
    if (cap < static_cast<size_t>(b.size())) return set_error(LLDYN_BUFFER_TOO_SMALL, "buffer too small");
    std::copy(b.doubled().begin(), b.doubled().end(), doubled);
    return LLDYN_OK;
  });
}

lldyn_status lldyn_field_correlator(const lldyn_density* d, double c, double x, double t, double tol,
                                    lldyn_sample* out) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    LLDYN_REQUIRE_PTR(out);
    fill(lldyn::field_correlator(d->rho, c, x, t, tol), out);
    return LLDYN_OK;
  });
}

lldyn_status lldyn_density_correlator(const lldyn_density* d, double c, double x, double t, double tol,
                                      double mu_cutoff, lldyn_sample* out) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    LLDYN_REQUIRE_PTR(out);
    fill(lldyn::density_correlator(d->rho, c, x, t, tol, cutoff(mu_cutoff)), out);
    return LLDYN_OK;
  });
}

lldyn_status lldyn_phi(const lldyn_density* d, double c, double lambda, double mu, double* out) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    LLDYN_REQUIRE_PTR(out);
    *out = lldyn::phi_diagnostic(d->rho, c, lambda, mu);
    return LLDYN_OK;
  });
}

lldyn_status lldyn_correlator_grid(const lldyn_density* d, double c, lldyn_grid x, lldyn_grid t, lldyn_kind kind,
                                   double tol, int threads, double mu_cutoff, lldyn_sample* out) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    LLDYN_REQUIRE_PTR(out);
    const auto v =
        lldyn::correlator_grid(d->rho, c, to_grid(x), to_grid(t), to_kind(kind), tol, threads, cutoff(mu_cutoff));
    for (size_t i = 0; i < v.size(); ++i) fill(v[i], out + i);
    return LLDYN_OK;
  });
}

lldyn_status lldyn_spectral_grid(const lldyn_density* d, double c, lldyn_grid x, lldyn_grid t, lldyn_kind kind,
                                 double tol, int threads, double mu_cutoff, double* k, double* omega, double* re,
                                 double* im) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(d);
    LLDYN_REQUIRE_PTR(k);
    LLDYN_REQUIRE_PTR(omega);
    LLDYN_REQUIRE_PTR(re);
    LLDYN_REQUIRE_PTR(im);
    const auto g =
        lldyn::spectral_grid(d->rho, c, to_grid(x), to_grid(t), to_kind(kind), tol, threads, cutoff(mu_cutoff));
    std::copy(g.k.begin(), g.k.end(), k);
    std::copy(g.omega.begin(), g.omega.end(), omega);
    for (size_t i = 0; i < g.values.size(); ++i) {
      re[i] = g.values[i].real();
      im[i] = g.values[i].imag();
    }
    return LLDYN_OK;
  });
}

void lldyn_lehmann_config_default(lldyn_lehmann_config* cfg) {
  if (!cfg) return;
  const lldyn::LehmannConfig d;
  *cfg = {d.number_window, d.cross_limit, d.max_states, d.tol, d.threads};
}

lldyn_status lldyn_lehmann(const lldyn_state* s, lldyn_kind kind, const double* x, const double* t, size_t npoints,
                           const lldyn_lehmann_config* cfg, double* re, double* im, lldyn_lehmann_info* info) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(s);
    LLDYN_REQUIRE_PTR(x);
    LLDYN_REQUIRE_PTR(t);
    LLDYN_REQUIRE_PTR(re);
    LLDYN_REQUIRE_PTR(im);
    std::vector<lldyn::LehmannPoint> pts;
    for (size_t i = 0; i < npoints; ++i) pts.push_back({x[i], t[i]});
    const auto r = to_kind(kind) == lldyn::CorrelatorKind::field ? lldyn::lehmann_field(s->s, pts, to_cfg(cfg))
                                                                 : lldyn::lehmann_density(s->s, pts, to_cfg(cfg));
    for (size_t i = 0; i < npoints; ++i) {
      re[i] = r.values[i].real();
      im[i] = r.values[i].imag();
    }
    if (info) *info = {r.saturation, r.window_stability, r.states, r.window};
    return LLDYN_OK;
  });
}

lldyn_status lldyn_convergence_study(const lldyn_density* shape, int N, const double* D, size_t nD, double c,
                                     double x, double t, lldyn_kind kind, const lldyn_lehmann_config* cfg,
                                     lldyn_study_row* rows, lldyn_study_summary* summary) {
  return guarded([&] {
    LLDYN_REQUIRE_PTR(shape);
    LLDYN_REQUIRE_PTR(D);
    LLDYN_REQUIRE_PTR(rows);
    const auto r = lldyn::lowdensity_convergence_study(shape->rho, N, std::vector<double>(D, D + nD), c, x, t,
                                                       to_kind(kind), to_cfg(cfg));
    for (size_t i = 0; i < r.rows.size(); ++i) {
      const auto& w = r.rows[i];
      rows[i] = {w.D,
                 w.N,
                 w.L,
                 w.x,
                 w.t,
                 w.formula.real(),
                 w.formula.imag(),
                 w.oracle.real(),
                 w.oracle.imag(),
                 w.rel_err,
                 w.rel_err_with_d2,
                 w.saturation,
                 w.window_stability};
    }
    if (summary) *summary = {r.exponent, r.exponent_with_d2, r.monotone ? 1 : 0, r.monotone_with_d2 ? 1 : 0};
    return LLDYN_OK;
  });
}

}  // extern "C"
