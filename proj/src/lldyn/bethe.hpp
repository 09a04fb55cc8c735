#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lldyn/common.hpp"

namespace lldyn {

struct ModelParams {
  double L = 1.0;
  double c = 1.0;
  int N = 0;
};

//! Bethe numbers stored doubled (2 I_k): even for odd N, odd for even N.
class BetheNumbers {
 public:
  BetheNumbers() = default;
  explicit BetheNumbers(std::vector<long> doubled);
  static BetheNumbers from_values(const std::vector<double>& values);

  int size() const { return static_cast<int>(doubled_.size()); }
  const std::vector<long>& doubled() const { return doubled_; }
  double value(int k) const { return 0.5 * static_cast<double>(doubled_[k]); }
  std::vector<double> values() const;
  bool operator==(const BetheNumbers&) const = default;

 private:
  std::vector<long> doubled_;
};

using Matrix = Eigen::MatrixXd;

struct SolverOptions {
  double tol = 1e-12;
  int max_iter = 100;
};

class BetheState {
 public:
  BetheState() = default;
  BetheState(ModelParams p, BetheNumbers numbers, std::vector<double> roots, double residual);

  const ModelParams& params() const { return params_; }
  const BetheNumbers& numbers() const { return numbers_; }
  const std::vector<double>& roots() const { return roots_; }
  double residual() const { return residual_; }
  int N() const { return params_.N; }
  double L() const { return params_.L; }
  double c() const { return params_.c; }

  std::string to_json() const;
  static BetheState from_json(const std::string& text);

 private:
  ModelParams params_;
  BetheNumbers numbers_;
  std::vector<double> roots_;
  double residual_ = 0.0;
};

//! K(x) = 2c/(c^2+x^2)
inline double kernel(double x, double c) { return 2 * c / (c * c + x * x); }

//! r_k = lambda_k + (2/L) sum_j atan((lambda_k-lambda_j)/c) - 2 pi I_k / L.
//! Its Jacobian is the Gaudin matrix.
std::vector<double> bethe_residual_map(double L, double c, const BetheNumbers& numbers,
                                       const std::vector<double>& roots);

//! max_k |lambda_k/2pi - I_k/L + (1/(pi L)) sum_j atan((lambda_k-lambda_j)/c)|
double bethe_residual(double L, double c, const BetheNumbers& numbers,
                      const std::vector<double>& roots);

BetheState solve_bethe(const ModelParams& params, const BetheNumbers& numbers,
                       const SolverOptions& opt = {});

Matrix gaudin_matrix(double L, double c, const std::vector<double>& roots);
inline Matrix gaudin_matrix(const BetheState& s) { return gaudin_matrix(s.L(), s.c(), s.roots()); }

double gaudin_det(double L, double c, const std::vector<double>& roots);
inline double gaudin_det(const BetheState& s) { return gaudin_det(s.L(), s.c(), s.roots()); }

struct EnergyMomentum {
  double E = 0.0;
  double P = 0.0;
};
EnergyMomentum energy_momentum(const BetheState& s);
EnergyMomentum energy_momentum(const std::vector<double>& roots);

}  // namespace lldyn
