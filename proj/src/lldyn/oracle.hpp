#pragma once

// Finite-size Lehmann sums over exact Bethe eigenstates, and the
// oracle-versus-formula study along a family of dilute states.

#include <vector>

#include "lldyn/bethe.hpp"
#include "lldyn/correlator.hpp"
#include "lldyn/rootdensity.hpp"

namespace lldyn {

//! Intermediate states are Bethe-number sets with all |J| <= number_window.
//! Within the window they are generated around the averaging state: particle a
//! is removed (field) or moved anywhere (density), and the others are shifted
//! by n_j with prod_j (1 + |n_j|) <= cross_limit. If more than max_states
//! remain, the ones with the smallest product are kept (ties broken
//! lexicographically).
struct LehmannConfig {
  long number_window = 0;  // 0: ceil(L K / 2pi), K = max|lambda| + 8 max(c, 1)
  long cross_limit = 0;  // 0: 1000 for the field, 100 for the density
  long max_states = 4'000'000;
  double tol = 0.01;  // field: required saturation 1 - tol; density: window-halving stability
  int threads = 1;
};

struct LehmannPoint {
  double x = 0.0;
  double t = 0.0;
};

struct LehmannResult {
  std::vector<cplx> values;  // one per requested point
  //! field: sum |FF|^2 / (N/L); 0 for the density (its same-point sum rule diverges)
  double saturation = 0.0;
  //! max over points of the relative change of the sum when cross_limit is halved
  double window_stability = 0.0;
  long states = 0;
  long window = 0;
};

//! <psi^dag(x,t) psi(0,0)> = sum_mu |<mu|psi|lam>|^2 e^{it(E_lam - E_mu) + ix(P_mu - P_lam)}.
//! Throws window_too_small if the saturation is below 1 - tol.
LehmannResult lehmann_field(const BetheState& state, const std::vector<LehmannPoint>& points,
                            const LehmannConfig& cfg = {});
cplx lehmann_field(const BetheState& state, double x, double t, const LehmannConfig& cfg = {});

//! <sigma(x,t) sigma(0,0)> including the diagonal (N/L)^2. Throws window_too_small
//! if halving cross_limit changes the sum over mu != lambda by more than tol (relative).
LehmannResult lehmann_density(const BetheState& state, const std::vector<LehmannPoint>& points,
                              const LehmannConfig& cfg = {});
cplx lehmann_density(const BetheState& state, double x, double t, const LehmannConfig& cfg = {});

//! mu-cutoff that matches an intermediate-state window W at length L: 2 pi (W + 1/2) / L.
double window_cutoff(long window, double L);

struct StudyRow {
  double D = 0.0;
  int N = 0;
  double L = 0.0;
  double x = 0.0;
  double t = 0.0;
  cplx formula{};
  cplx oracle{};
  double rel_err = 0.0;
  double saturation = 0.0;
  //! density only: error with (N/L)^2 added to the formula
  double rel_err_with_d2 = 0.0;
  double window_stability = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  double exponent = 0.0;  // least-squares slope of log rel_err against log D
  bool monotone = false;  // rel_err strictly decreasing along D_list
  double exponent_with_d2 = 0.0;
  bool monotone_with_d2 = false;
};

//! For each D (decreasing): L = N/D, the dilute state of shape scaled to total D,
//! the exact Lehmann sum, and the low-density formula on the empirical measure
//! (1/L) sum_j delta(nu - lambda_j). The density study compares against the
//! formula with the matching mu-cutoff.
StudyResult lowdensity_convergence_study(const RootDensity& shape, int N, const std::vector<double>& D_list,
                                         double c, double x, double t, CorrelatorKind kind,
                                         const LehmannConfig& cfg = {});

}  // namespace lldyn
