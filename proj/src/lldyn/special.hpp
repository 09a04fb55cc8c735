#pragma once

#include "lldyn/common.hpp"

namespace lldyn {

//! F(x) = \int_0^x e^{-i s^2/4} ds
cplx fresnel_quarter(double x);

//! chi_sign(x) = \int e^{ixu} (e^{sign*i u^2} - 1)/u^2 du, sign = +1 or -1.
cplx chi(int sign, double x);

//! chi_sign(x) - pi|x|. Entire in x; this is the combination the correlators need.
cplx chi_smooth(int sign, double x);

//! Independent quadrature evaluation of chi, used as an oracle.
cplx chi_quadrature(int sign, double x, double tol = 1e-11);

struct LatticeSumParams {
  double alpha = 0.5;
  double w = 0.0;
  double tau = 0.0;
  double L = 1.0;
};

//! Large-L closed form of sum_n e^{i(w/L)(n+a) + i(tau/L^2)(n+a)^2}/(n+a)^2.
cplx lattice_sum2_closed(const LatticeSumParams& p);

//! Symmetric truncated sum |n| <= n_max plus an endpoint tail estimate.
cplx lattice_sum2_direct(const LatticeSumParams& p, long n_max);

//! sum_n e^{iW(n+a)}/(n+a) for 0 < |W| <= pi.
cplx lattice_sum1_closed(double alpha, double W);

//! Value of the first-order sum at W = 0 (midpoint of the jump).
double lattice_sum1_midpoint(double alpha);

//! Symmetric truncated first-order sum with tail estimate; W = 0 allowed.
cplx lattice_sum1_direct(double alpha, double W, long n_max);

}  // namespace lldyn
