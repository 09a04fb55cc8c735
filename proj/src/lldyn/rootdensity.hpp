#pragma once

// Root densities rho(lambda), the associated hole density, and finite-L
// dilute states sampled from a profile.

#include <memory>
#include <string>
#include <vector>

#include "lldyn/bethe.hpp"
#include "lldyn/quadrature.hpp"

namespace lldyn {

struct GaussianTerm {
  double amplitude;  // A in A exp(-((lambda - center)/sigma)^2)
  double sigma;
  double center = 0.0;
};

class RootDensity {
 public:
  enum class Kind { zero, gaussian_sum, box, tabulated, atomic };

  RootDensity();  // zero density

  static RootDensity zero();
  static RootDensity gaussian(double amplitude, double sigma, double center = 0.0);
  static RootDensity gaussian_sum(std::vector<GaussianTerm> terms);
  //! height on [center - half_width, center + half_width]
  static RootDensity box(double height, double half_width, double center = 0.0);
  //! Monotone cubic (PCHIP) through the samples, zero outside the grid.
  static RootDensity tabulated(std::vector<double> grid, std::vector<double> values);
  //! Empirical measure (1/L) sum_j delta(lambda - lambda_j).
  static RootDensity atoms(std::vector<double> positions, double L);
  static RootDensity from_state(const BetheState& s);
  static RootDensity from_csv(const std::string& path);
  //! "family:gaussian,A=..,sigma=..[,center=..]", "family:box,h=..,a=..[,center=..]",
  //! "family:gaussian_sum,A=a1;a2,sigma=s1;s2[,center=c1;c2]", "family:zero",
  //! "state:<json file>", or a CSV path with columns lambda,rho.
  static RootDensity parse(const std::string& spec);

  Kind kind() const { return kind_; }
  bool is_atomic() const { return kind_ == Kind::atomic; }
  bool is_zero() const { return kind_ == Kind::zero; }

  //! Pointwise value; 0 for the atomic measure.
  double operator()(double lambda) const;
  //! Support [lo, hi]; rho is treated as 0 outside.
  double support_min() const { return lo_; }
  double support_max() const { return hi_; }
  //! Points where rho is not smooth or peaks (quadrature seeds).
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& atom_positions() const { return atoms_; }
  double atom_weight() const { return atom_weight_; }
  //! Shortest length over which rho changes appreciably (narrowest sigma, box width, grid span).
  double feature_scale() const;

  //! int rho(lambda) f(lambda) d lambda; extra points seed the partition.
  template <class F>
  auto integrate(F&& f, const QuadOptions& opt = {}, std::span<const double> extra = {}) const
      -> QuadResult<decltype(f(0.0))> {
    using T = decltype(f(0.0));
    QuadResult<T> out;
    if (kind_ == Kind::zero) return out;
    if (kind_ == Kind::atomic) {
      CompensatedSum<T> s;
      for (double x : atoms_) s.add(atom_weight_ * f(x));
      out.value = s.value();
      out.evaluations = static_cast<int>(atoms_.size());
      return out;
    }
    auto g = [&](double x) { return (*this)(x) * f(x); };
    if (extra.empty()) return lldyn::integrate(g, lo_, hi_, opt, breaks_);
    std::vector<double> br(breaks_);
    br.insert(br.end(), extra.begin(), extra.end());
    return lldyn::integrate(g, lo_, hi_, opt, br);
  }

  //! factor * rho (not defined for the atomic measure)
  RootDensity scaled(double factor) const;

  //! D = int rho
  double total() const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::zero;
  std::vector<GaussianTerm> terms_;
  double height_ = 0.0;
  std::vector<double> grid_, values_, slopes_;
  std::vector<double> atoms_;
  double atom_weight_ = 0.0;
  double lo_ = 0.0, hi_ = 0.0;
  std::vector<double> breaks_;
  std::string describe_ = "zero";

  void finish();
};

//! D = int rho
double particle_density(const RootDensity& rho);

//! rho_h(lambda) = s(lambda) - rho(lambda), s = 1/2pi + (1/2pi) int K(lambda - mu) rho(mu) d mu.
class HoleDensity {
 public:
  HoleDensity(RootDensity rho, double c, double tol = 1e-12);

  double smooth_part(double lambda) const;
  //! Pointwise; for an atomic rho only the smooth part is defined pointwise.
  double operator()(double lambda) const { return smooth_part(lambda) - rho_(lambda); }
  const RootDensity& root_density() const { return rho_; }
  double c() const { return c_; }

 private:
  RootDensity rho_;
  double c_;
  double tol_;
};

HoleDensity hole_density(const RootDensity& rho, double c);

//! Bethe numbers of a dilute N-particle state with N = round(D L): the k-th
//! root targets the (k - 1/2)/N quantile of rho; numbers come from the
//! finite-N counting function at the targets, rounded to the allowed parity.
BetheNumbers dilute_sampler(const RootDensity& rho, double L, double c);

}  // namespace lldyn
