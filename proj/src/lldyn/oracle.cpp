#include "lldyn/oracle.hpp"

#include <algorithm>
#include <map>
#include <thread>

#include "lldyn/formfactor.hpp"

namespace lldyn {

namespace {

constexpr size_t kBlock = 2048;

struct Candidate {
  std::vector<long> doubled;  // sorted doubled Bethe numbers
  long weight;                // prod (1 + |n_j|) of the canonical representation
};

bool lex_less(const Candidate& a, const Candidate& b) {
  if (a.weight != b.weight) return a.weight < b.weight;
  return a.doubled < b.doubled;
}

// Generates intermediate states around the averaging state. Each state is
// produced once: only from its canonical origin (smallest weight, then
// smallest (a, k)).
class Enumerator {
 public:
  Enumerator(const BetheNumbers& ket, CorrelatorKind kind, long window, long cross)
      : I_(ket.doubled()), N_(ket.size()), kind_(kind), W2_(2 * window), P_(cross) {}

  template <class Visit>
  void run(Visit&& visit) {
    for (int a = 0; a < N_; ++a) {
      base_.clear();
      for (int j = 0; j < N_; ++j)
        if (j != a) base_.push_back(kind_ == CorrelatorKind::field ? I_[j] + 1 : I_[j]);
      n_.assign(base_.size(), 0);
      recurse(a, 0, 1, visit);
    }
  }

 private:
  std::vector<long> I_;
  int N_;
  CorrelatorKind kind_;
  long W2_, P_;
  std::vector<long> base_, n_;

  // weight of representing J (sorted) from origin a with moved element k (density)
  long weight_of(const std::vector<long>& J, int a, int k) const {
    long w = 1;
    for (int j = 0, m = 0; j < N_; ++j) {
      if (j == a) continue;
      if (m == k && kind_ == CorrelatorKind::density) ++m;
      const long base = kind_ == CorrelatorKind::field ? I_[j] + 1 : I_[j];
      const long d = std::abs(J[m] - base) / 2;
      w *= 1 + d;
      if (w > P_) return P_ + 1;
      ++m;
    }
    return w;
  }

  bool canonical(const std::vector<long>& J, int a, int k, long w) const {
    const int nk = kind_ == CorrelatorKind::density ? N_ : 1;
    for (int a2 = 0; a2 < N_; ++a2)
      for (int k2 = 0; k2 < nk; ++k2) {
        if (a2 == a && k2 == k) continue;
        const long w2 = weight_of(J, a2, k2);
        if (w2 < w || (w2 == w && std::make_pair(a2, k2) < std::make_pair(a, k))) return false;
      }
    return true;
  }

  template <class Visit>
  void recurse(int a, size_t depth, long w, Visit& visit) {
    if (depth == base_.size()) {
      emit(a, w, visit);
      return;
    }
    for (long m = 0;; ++m) {
      const long wm = w * (1 + m);
      if (wm > P_) break;
      for (int sign = 0; sign < (m == 0 ? 1 : 2); ++sign) {
        const long s = sign ? -m : m;
        n_[depth] = s;
        const long J = base_[depth] + 2 * s;
        if (std::abs(J) > W2_) continue;
        if (depth > 0 && J <= base_[depth - 1] + 2 * n_[depth - 1]) continue;
        recurse(a, depth + 1, wm, visit);
      }
    }
  }

  template <class Visit>
  void emit(int a, long w, Visit& visit) {
    std::vector<long> others(base_.size());
    for (size_t j = 0; j < base_.size(); ++j) others[j] = base_[j] + 2 * n_[j];
    if (kind_ == CorrelatorKind::field) {
      if (canonical(others, a, 0, w)) visit(Candidate{others, w});
      return;
    }
    // the moved particle takes every free number of the right parity in the window
    const long parity = ((I_[a] % 2) + 2) % 2;
    long start = -W2_;
    if (((start % 2) + 2) % 2 != parity) ++start;
    std::vector<long> J(N_);
    for (long Ja = start; Ja <= W2_; Ja += 2) {
      if (std::binary_search(others.begin(), others.end(), Ja)) continue;
      const int k = static_cast<int>(std::lower_bound(others.begin(), others.end(), Ja) - others.begin());
      std::copy(others.begin(), others.begin() + k, J.begin());
      J[k] = Ja;
      std::copy(others.begin() + k, others.end(), J.begin() + k + 1);
      if (J == I_) continue;
      if (canonical(J, a, k, w)) visit(Candidate{J, w});
    }
  }
};

std::vector<Candidate> enumerate_states(const BetheState& state, CorrelatorKind kind, long window, long cross,
                                        long max_states) {
  // first pass: histogram of weights, to place the cap deterministically
  std::map<long, long> hist;
  Enumerator(state.numbers(), kind, window, cross).run([&](const Candidate& c) { ++hist[c.weight]; });
  long keep_below = cross + 1, budget_at_edge = 0, running = 0;
  for (auto [w, n] : hist) {
    if (running + n > max_states) {
      keep_below = w;
      budget_at_edge = max_states - running;
      break;
    }
    running += n;
  }
  std::vector<Candidate> out, edge;
  Enumerator(state.numbers(), kind, window, cross).run([&](const Candidate& c) {
    if (c.weight < keep_below)
      out.push_back(c);
    else if (c.weight == keep_below)
      edge.push_back(c);
  });
  std::sort(edge.begin(), edge.end(), lex_less);
  edge.resize(std::min<size_t>(edge.size(), static_cast<size_t>(std::max(0L, budget_at_edge))));
  out.insert(out.end(), edge.begin(), edge.end());
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

long default_window(const BetheState& s) {
  double K = 0.0;
  for (double l : s.roots()) K = std::max(K, std::abs(l));
  K += 8 * std::max(s.c(), 1.0);
  return static_cast<long>(std::ceil(s.L() * K / two_pi));
}

struct Sums {
  std::vector<CompensatedSum<cplx>> full, half;  // per point; half: weight <= cross/2
  CompensatedSum<double> norm;
};

// Deterministic blocked reduction: block results are combined in block order,
// independent of the number of workers.
LehmannResult lehmann_sum(const BetheState& state, const std::vector<LehmannPoint>& points,
                          const LehmannConfig& cfg, CorrelatorKind kind) {
  const int N = state.N();
  require(N >= 1, "lehmann: need at least one particle");
  require(kind == CorrelatorKind::field ? N <= 6 : N <= 5, "lehmann: too many particles for enumeration");
  require(cfg.cross_limit >= 0 && cfg.max_states >= 1, "lehmann: cross_limit must be >= 0, max_states >= 1");
  const long cross = cfg.cross_limit > 0 ? cfg.cross_limit : (kind == CorrelatorKind::field ? 1000 : 100);
  require(cfg.number_window >= 0, "lehmann: number_window must be >= 0");
  require(!points.empty(), "lehmann: no points requested");
  const long window = cfg.number_window > 0 ? cfg.number_window : default_window(state);
  for (long d : state.numbers().doubled())
    require(std::abs(d) <= 2 * window, "lehmann: averaging state lies outside the number window");
  const auto states = enumerate_states(state, kind, window, cross, cfg.max_states);
  const double L = state.L(), c = state.c();
  const auto em = energy_momentum(state);
  const int Nb = kind == CorrelatorKind::field ? N - 1 : N;
  const long half_limit = cross / 2;

  const size_t nblocks = (states.size() + kBlock - 1) / kBlock;
  std::vector<Sums> blocks(nblocks);
  std::vector<std::string> errors(nblocks);
  auto work = [&](size_t first, size_t stride) {
    for (size_t b = first; b < nblocks; b += stride) {
      Sums& s = blocks[b];
      s.full.assign(points.size(), {});
      s.half.assign(points.size(), {});
      try {
        for (size_t i = b * kBlock; i < std::min(states.size(), (b + 1) * kBlock); ++i) {
          const auto bra = solve_bethe(ModelParams{L, c, Nb}, BetheNumbers(states[i].doubled));
          const double f = kind == CorrelatorKind::field ? field_ff(bra, state).modulus2()
                                                         : density_ff(bra, state).modulus2();
          const auto e = energy_momentum(bra);
          s.norm.add(f);
          for (size_t p = 0; p < points.size(); ++p) {
            const double ph = points[p].t * (em.E - e.E) + points[p].x * (e.P - em.P);
            const cplx term = f * cplx(std::cos(ph), std::sin(ph));
            s.full[p].add(term);
            if (states[i].weight <= half_limit) s.half[p].add(term);
          }
        }
      } catch (const Error& e) {
        errors[b] = e.what();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(cfg.threads, static_cast<int>(std::max<size_t>(nblocks, 1))));
  if (nt == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nt; ++k) pool.emplace_back(work, k, nt);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) fail(Errc::not_converged, "lehmann: intermediate state failed: " + e);

  LehmannResult out;
  out.states = static_cast<long>(states.size());
  out.window = window;
  CompensatedSum<double> norm;
  std::vector<CompensatedSum<cplx>> full(points.size()), half(points.size());
  for (const auto& b : blocks) {
    norm.add(b.norm.value());
    for (size_t p = 0; p < points.size(); ++p) {
      full[p].add(b.full[p].value());
      half[p].add(b.half[p].value());
    }
  }
  const double diag = kind == CorrelatorKind::density ? (N / L) * (N / L) : 0.0;
  for (size_t p = 0; p < points.size(); ++p) {
    const cplx v = full[p].value();
    const double scale = std::max(std::abs(v), 1e-300);
    out.window_stability = std::max(out.window_stability, std::abs(v - half[p].value()) / scale);
    out.values.push_back(v + diag);
  }
  out.saturation = kind == CorrelatorKind::field ? norm.value() / (N / L) : 0.0;
  return out;
}

}  // namespace

LehmannResult lehmann_field(const BetheState& state, const std::vector<LehmannPoint>& points,
                            const LehmannConfig& cfg) {
  auto r = lehmann_sum(state, points, cfg, CorrelatorKind::field);
  if (r.saturation < 1 - cfg.tol)
    fail(Errc::window_too_small, "lehmann field: sum rule saturated to " + std::to_string(r.saturation) +
                                     " only; enlarge number_window or cross_limit");
  return r;
}

cplx lehmann_field(const BetheState& state, double x, double t, const LehmannConfig& cfg) {
  return lehmann_field(state, std::vector<LehmannPoint>{{x, t}}, cfg).values[0];
}

LehmannResult lehmann_density(const BetheState& state, const std::vector<LehmannPoint>& points,
                              const LehmannConfig& cfg) {
  auto r = lehmann_sum(state, points, cfg, CorrelatorKind::density);
  if (r.window_stability > cfg.tol)
    fail(Errc::window_too_small, "lehmann density: halving cross_limit moves the result by " +
                                     std::to_string(r.window_stability) + " (relative)");
  return r;
}

cplx lehmann_density(const BetheState& state, double x, double t, const LehmannConfig& cfg) {
  return lehmann_density(state, std::vector<LehmannPoint>{{x, t}}, cfg).values[0];
}

double window_cutoff(long window, double L) { return two_pi * (window + 0.5) / L; }

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

StudyResult lowdensity_convergence_study(const RootDensity& shape, int N, const std::vector<double>& D_list,
                                         double c, double x, double t, CorrelatorKind kind,
                                         const LehmannConfig& cfg) {
  require(N >= 1, "study: N must be >= 1");
  require(D_list.size() >= 2, "study: need at least two densities");
  require(!shape.is_atomic() && !shape.is_zero() && shape.total() > 0, "study: shape must be a positive profile");
  for (size_t i = 0; i < D_list.size(); ++i) {
    require(D_list[i] > 0, "study: densities must be positive");
    if (i) require(D_list[i] < D_list[i - 1], "study: densities must decrease");
  }
  StudyResult out;
  std::vector<double> logD, logE, logE2;
  for (double D : D_list) {
    const double L = N / D;
    const auto rho = shape.scaled(D / shape.total());
    const auto numbers = dilute_sampler(rho, L, c);
    if (numbers.size() != N) fail(Errc::domain, "study: sampler produced a different particle number");
    const auto state = solve_bethe(ModelParams{L, c, N}, numbers);
    const auto atoms = RootDensity::from_state(state);
    StudyRow row;
    row.D = D;
    row.N = N;
    row.L = L;
    row.x = x;
    row.t = t;
    if (kind == CorrelatorKind::field) {
      const auto o = lehmann_field(state, {{x, t}}, cfg);
      row.oracle = o.values[0];
      row.saturation = o.saturation;
      row.window_stability = o.window_stability;
      row.formula = field_correlator(atoms, c, x, t).value;
      row.rel_err = std::abs(row.formula - row.oracle) / std::abs(row.oracle);
      row.rel_err_with_d2 = row.rel_err;
    } else {
      const auto o = lehmann_density(state, {{x, t}}, cfg);
      row.oracle = o.values[0];
      row.window_stability = o.window_stability;
      row.formula = density_correlator(atoms, c, x, t, 1e-8, window_cutoff(o.window, L)).value;
      row.rel_err = std::abs(row.formula - row.oracle) / std::abs(row.oracle);
      row.rel_err_with_d2 = std::abs(row.formula + D * D - row.oracle) / std::abs(row.oracle);
    }
    logD.push_back(std::log(D));
    logE.push_back(std::log(row.rel_err));
    logE2.push_back(std::log(row.rel_err_with_d2));
    out.rows.push_back(row);
  }
  out.exponent = fit_slope(logD, logE);
  out.exponent_with_d2 = fit_slope(logD, logE2);
  out.monotone = out.monotone_with_d2 = true;
  for (size_t i = 1; i < out.rows.size(); ++i) {
    if (!(out.rows[i].rel_err < out.rows[i - 1].rel_err)) out.monotone = false;
    if (!(out.rows[i].rel_err_with_d2 < out.rows[i - 1].rel_err_with_d2)) out.monotone_with_d2 = false;
  }
  return out;
}

}  // namespace lldyn
