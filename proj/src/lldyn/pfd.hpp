#pragma once

// Leading partial-fraction coefficients of the reduced form factors and a
// numerical residue probe used to check them.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lldyn/bethe.hpp"

namespace lldyn {

enum class OperatorKind { field, density };

//! F(lam, mu) = |FF|^2 N_lam N_mu L^{2N-1} (field, |mu| = N-1)
//! or |FF|^2 N_lam N_mu L^{2N} (density, |mu| = N). Independent of L.
struct ReducedFormFactor {
  OperatorKind kind;
  double c;
  std::function<double(std::span<const double>, std::span<const double>)> evaluator;

  double operator()(std::span<const double> lam, std::span<const double> mu) const {
    return evaluator(lam, mu);
  }
};

ReducedFormFactor reduced_field(double c);
ReducedFormFactor reduced_density(double c);

//! A({a},0,0|0) = prod_{i != a} 4c^2 / ((lam_i - lam_a)^2 + c^2); a is zero-based.
double pfd_coeff_field_leading(const BetheState& state, int a);
double pfd_coeff_field_leading(std::span<const double> lam, double c, int a);

//! A({a},0,0|mu_a) = prod_{j != a} 4c^2 (lam_a - mu_a)^2 / ([(lam_j - lam_a)^2 + c^2][(lam_j - mu_a)^2 + c^2])
double pfd_coeff_density_leading(const BetheState& state, int a, double mu_a);
double pfd_coeff_density_leading(std::span<const double> lam, double c, int a, double mu_a);

struct ProbeOptions {
  double eps0 = 1e-2;  // largest offset
  int levels = 4;      // eps0, eps0/ratio, ...
  double ratio = 10.0;
  int order = 3;       // Richardson columns
  int pole_order = 2;  // power of each offset multiplied into F
  //! Approach direction per paired root (mu_i = lam_i + eps d_i); empty selects a default.
  std::vector<double> direction;
};

struct ProbeResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::vector<double> sequence;  // raw g(eps_k)
  std::vector<double> eps;
};

//! Numerical limit of prod_{i != a} (mu_i - lam_i)^2 F(lam, mu) with mu_i -> lam_i.
//! For the density a value mu_a is kept fixed at slot a. Throws Errc::not_converged
//! when the sequence grows geometrically (pole of higher order than assumed).
ProbeResult residue_probe(const ReducedFormFactor& rf, std::span<const double> lam, int a,
                          std::optional<double> mu_a = std::nullopt, const ProbeOptions& opt = {});
ProbeResult residue_probe(const ReducedFormFactor& rf, const BetheState& state, int a,
                          std::optional<double> mu_a = std::nullopt, const ProbeOptions& opt = {});

enum class VanishingConfig {
  all_double,  // A(0,0,0|0): every mu_i paired with lam_i, nu_i = 2
  one_simple,  // A(0,{a},0|0): mu_a has nu_a = 1, the rest nu = 2
};

//! Density coefficients that should vanish, probed as eps -> 0.
ProbeResult density_vanishing_probe(std::span<const double> lam, double c, VanishingConfig cfg, int a = 0,
                                    const ProbeOptions& opt = {});

//! Number of admissible (nu, f) on N-1 points producing the given sets
//! I0 (not attained), I1 (attained once from nu = 1), I2 (attained twice from nu = 1).
//! Exhaustive enumeration; N <= 7.
long count_pfd_assignments(int N, std::span<const int> I0, std::span<const int> I1, std::span<const int> I2);

//! (N-1)! / (2^n p!)
long pfd_multiplicity(int N, int n, int p);

struct PfdCheck {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double error = 0.0;      // relative for residues, absolute (scaled) for vanishing probes
  double threshold = 0.0;
  bool pass = false;
};

//! Fixed table of checks: field and density residues against the closed
//! coefficients (N = 1..n_max, every a), vanishing density coefficients
//! (N = 2..n_max), and the combinatorial factor for N <= 5.
std::vector<PfdCheck> pfd_verify_suite(double c = 1.0, int n_max = 3);

}  // namespace lldyn
