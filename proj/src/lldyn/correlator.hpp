#pragma once

// Low-density field and density two-point functions, the phi diagnostic,
// and windowed Fourier transforms of correlator grids.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lldyn/rootdensity.hpp"

namespace lldyn {

struct CorrelatorSample {
  double x = 0.0;
  double t = 0.0;
  cplx value{};
  double quad_error = 0.0;
};

//! <psi^dag(x,t) psi(0,0)> at leading order in the density.
//! Convention: e^{it(E_lam - E_mu) + ix(P_mu - P_lam)}, so a free particle contributes e^{it lam^2 - ix lam}.
//! tol is absolute, >= 1e-8.
CorrelatorSample field_correlator(const RootDensity& rho, double c, double x, double t, double tol = 1e-8);

//! <sigma(x,t) sigma(0,0)> at leading order in the density, without the disconnected D^2.
//! Without a cutoff the mu-integral over the hole density is taken over the real line
//! (conditionally convergent; x = t = 0 diverges and is rejected). With mu_cutoff = M
//! it runs over [-M, M].
CorrelatorSample density_correlator(const RootDensity& rho, double c, double x, double t, double tol = 1e-8,
                                    std::optional<double> mu_cutoff = std::nullopt);

//! Full (lambda, mu) integrand of the density correlator:
//! e^{it(lam^2 - mu^2) + ix(mu - lam)} rho(lam) rho_h(mu) e^{Psi(lam, mu)}.
cplx density_integrand(const RootDensity& rho, double c, double x, double t, double lambda, double mu);

//! Exponent Psi(lam, mu) of the density correlator and Phi(lam) of the field correlator.
cplx density_exponent(const RootDensity& rho, double c, double x, double t, double lambda, double mu,
                      double tol = 1e-12);
cplx field_exponent(const RootDensity& rho, double c, double x, double t, double lambda, double tol = 1e-12);

//! Q(nu) = -|x - 2 nu t| + (sqrt|t|/pi) chi_{-sgn t}((x - 2 nu t)/sqrt|t|); -|x| at t = 0.
cplx damping_q(double x, double t, double nu);

//! log[(sin u / u)^2], u = arctan((mu-nu)/c) - arctan((lam-nu)/c); always <= 0.
double phi_log_kernel(double c, double nu, double lambda, double mu);
//! phi(lam, mu) = int rho(nu) phi_log_kernel d nu
double phi_diagnostic(const RootDensity& rho, double c, double lambda, double mu);

enum class CorrelatorKind { field, density };

struct UniformGrid {
  double min = 0.0;
  double max = 0.0;
  int n = 1;
  double at(int i) const { return n == 1 ? min : min + (max - min) * i / (n - 1); }
  double step() const { return n == 1 ? 0.0 : (max - min) / (n - 1); }
};

//! Correlator on the tensor grid, x fastest. Points are independent; with
//! threads > 1 they are distributed over workers without changing any value.
std::vector<CorrelatorSample> correlator_grid(const RootDensity& rho, double c, const UniformGrid& x,
                                              const UniformGrid& t, CorrelatorKind kind, double tol = 1e-8,
                                              int threads = 1, std::optional<double> mu_cutoff = std::nullopt);

struct SpectralGrid {
  std::vector<double> k;
  std::vector<double> omega;
  std::vector<cplx> values;  // values[iw * k.size() + ik]
  std::map<std::string, std::string> metadata;

  cplx at(size_t ik, size_t iw) const { return values[iw * k.size() + ik]; }
};

//! A(k, w) = sum_{x,t} dx dt h(x) h(t) e^{ikx - iwt} G(x,t) with Hann windows h,
//! on the centred DFT frequencies of the grids.
SpectralGrid spectral_grid(const RootDensity& rho, double c, const UniformGrid& x, const UniformGrid& t,
                           CorrelatorKind kind, double tol = 1e-8, int threads = 1,
                           std::optional<double> mu_cutoff = std::nullopt);
SpectralGrid spectral_transform(const std::vector<CorrelatorSample>& samples, const UniformGrid& x,
                                const UniformGrid& t);

}  // namespace lldyn
