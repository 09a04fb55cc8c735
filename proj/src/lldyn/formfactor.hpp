#pragma once

#include <span>
#include <vector>

#include "lldyn/bethe.hpp"

namespace lldyn {

//! Complex number stored as (log |z|, arg z); arg in (-pi, pi].
struct FormFactorValue {
  double log_magnitude = 0.0;
  double phase = 0.0;

  double modulus() const { return std::exp(log_magnitude); }
  double modulus2() const { return std::exp(2 * log_magnitude); }
  cplx value() const { return std::polar(modulus(), phase); }
};

//! Unnormalised amplitude R with FF = R / (L^{N-1/2} sqrt(N_lam N_mu)) (field)
//! or FF = R / (L^N sqrt(N_lam N_mu)) (density). |R|^2 is L-independent.
//! p, s < 0 selects the internal indices automatically.
FormFactorValue field_amplitude(std::span<const double> lam, std::span<const double> mu, double c,
                                int p = -1, int s = -1);
FormFactorValue density_amplitude(std::span<const double> lam, std::span<const double> mu, double c,
                                  int p = -1);

//! <mu|psi(0)|lam> / sqrt(<lam|lam><mu|mu>)
FormFactorValue field_ff(const BetheState& bra, const BetheState& ket, int p = -1, int s = -1);
FormFactorValue field_ff(std::span<const double> lam, std::span<const double> mu, double c, double L,
                         int p = -1, int s = -1);

//! <mu|sigma(0)|lam> / sqrt(...), bra != ket. Exactly zero (log_magnitude -inf) at equal momentum.
FormFactorValue density_ff(const BetheState& bra, const BetheState& ket, int p = -1);
FormFactorValue density_ff(std::span<const double> lam, std::span<const double> mu, double c, double L,
                           int p = -1);

//! <lam|sigma(0)|lam>/<lam|lam> = N/L
double density_ff_diagonal(const BetheState& s);

//! alpha_i(nu) = 1/2 + atan((lambda_i - nu)/c)/pi
inline double alpha_shift(double lambda_i, double nu, double c) {
  return 0.5 + std::atan((lambda_i - nu) / c) / pi;
}

//! Bra roots of the dilute one-hole configuration: mu_j = lambda_j + (2pi/L)(n_j + alpha_j(lambda_a)),
//! j != a (shifts indexed over j != a in increasing order; a is zero-based).
std::vector<double> lowdensity_field_roots(const BetheState& ket, int a, std::span<const long> shifts);
//! mu_j = lambda_j + (2pi/L)(p_j + alpha_j(lambda_a) - alpha_j(mu_a)), j != a; mu_a inserted.
std::vector<double> lowdensity_density_roots(const BetheState& ket, int a, double mu_a,
                                             std::span<const long> shifts);

//! Exact bra Bethe numbers matching the low-density configuration: J_j = I_j + n_j + 1/2.
BetheNumbers lowdensity_field_numbers(const BetheState& ket, int a, std::span<const long> shifts);

FormFactorValue field_ff_lowdensity(const BetheState& ket, int a, std::span<const long> shifts);
FormFactorValue density_ff_lowdensity(const BetheState& ket, int a, double mu_a,
                                      std::span<const long> shifts);

}  // namespace lldyn
