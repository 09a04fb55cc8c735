#include "lldyn/bethe.hpp"

#include <algorithm>

#include "json.hpp"

namespace lldyn {

BetheNumbers::BetheNumbers(std::vector<long> doubled) : doubled_(std::move(doubled)) {
  const long parity = doubled_.size() % 2 == 1 ? 0 : 1;
  for (size_t k = 0; k < doubled_.size(); ++k) {
    if (k > 0 && doubled_[k] <= doubled_[k - 1])
      fail(Errc::invalid_argument, "Bethe numbers must be strictly increasing");
    if (std::abs(doubled_[k]) % 2 != parity)
      fail(Errc::invalid_argument,
           "Bethe number parity mismatch: integers for odd N, half-odd integers for even N");
  }
}

BetheNumbers BetheNumbers::from_values(const std::vector<double>& values) {
  std::vector<long> d;
  d.reserve(values.size());
  for (double v : values) {
    const double twice = 2 * v;
    if (std::abs(twice - std::round(twice)) > 1e-9)
      fail(Errc::invalid_argument, "Bethe numbers must be integers or half-odd integers");
    d.push_back(std::lround(twice));
  }
  return BetheNumbers(std::move(d));
}

std::vector<double> BetheNumbers::values() const {
  std::vector<double> v(doubled_.size());
  for (size_t k = 0; k < v.size(); ++k) v[k] = value(static_cast<int>(k));
  return v;
}

BetheState::BetheState(ModelParams p, BetheNumbers numbers, std::vector<double> roots, double residual)
    : params_(p), numbers_(std::move(numbers)), roots_(std::move(roots)), residual_(residual) {}

std::vector<double> bethe_residual_map(double L, double c, const BetheNumbers& numbers,
                                       const std::vector<double>& roots) {
  const int N = numbers.size();
  std::vector<double> r(N);
  for (int k = 0; k < N; ++k) {
    double s = 0;
    for (int j = 0; j < N; ++j) s += std::atan((roots[k] - roots[j]) / c);
    r[k] = roots[k] + 2 * s / L - two_pi * numbers.value(k) / L;
  }
  return r;
}

double bethe_residual(double L, double c, const BetheNumbers& numbers,
                      const std::vector<double>& roots) {
  double m = 0;
  for (double v : bethe_residual_map(L, c, numbers, roots)) m = std::max(m, std::abs(v) / two_pi);
  return m;
}

Matrix gaudin_matrix(double L, double c, const std::vector<double>& roots) {
  const int N = static_cast<int>(roots.size());
  Matrix G(N, N);
  for (int i = 0; i < N; ++i) {
    double diag = 1.0;
    for (int k = 0; k < N; ++k)
      if (k != i) diag += kernel(roots[i] - roots[k], c) / L;
    for (int j = 0; j < N; ++j) G(i, j) = i == j ? diag : -kernel(roots[i] - roots[j], c) / L;
  }
  return G;
}

double gaudin_det(double L, double c, const std::vector<double>& roots) {
  if (roots.empty()) return 1.0;
  return gaudin_matrix(L, c, roots).partialPivLu().determinant();
}

BetheState solve_bethe(const ModelParams& params, const BetheNumbers& numbers,
                       const SolverOptions& opt) {
  require(params.L > 0 && std::isfinite(params.L), "L must be positive");
  require(params.c > 0 && std::isfinite(params.c), "c must be positive");
  require(params.N == numbers.size(), "particle number does not match the Bethe numbers");
  const int N = params.N;
  const double L = params.L, c = params.c;
  std::vector<double> lam(N);
  for (int k = 0; k < N; ++k) lam[k] = two_pi * numbers.value(k) / L;
  if (N == 0) return BetheState(params, numbers, lam, 0.0);

  auto resid = [&](const std::vector<double>& x, std::vector<double>& r) {
    r = bethe_residual_map(L, c, numbers, x);
    double m = 0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m / two_pi;
  };
  std::vector<double> r, trial(N), rt;
  double res = resid(lam, r);
  // one polishing step past the tolerance: quadratic convergence makes it cheap
  int polish = 1;
  for (int it = 0; it < opt.max_iter && (res > opt.tol || polish-- > 0); ++it) {
    const Matrix G = gaudin_matrix(L, c, lam);
    Eigen::VectorXd rhs(N);
    for (int k = 0; k < N; ++k) rhs[k] = -r[k];
    const Eigen::VectorXd delta = G.partialPivLu().solve(rhs);
    double step = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h, step *= 0.5) {
      for (int k = 0; k < N; ++k) trial[k] = lam[k] + step * delta[k];
      const double rtrial = resid(trial, rt);
      if (rtrial < res) {
        lam.swap(trial);
        r.swap(rt);
        res = rtrial;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(res <= opt.tol))
    fail(Errc::not_converged,
         "Bethe solver did not converge (residual " + std::to_string(res) + ")");
  for (int k = 1; k < N; ++k)
    if (!(lam[k] > lam[k - 1])) fail(Errc::not_converged, "Bethe solver produced unordered roots");
  return BetheState(params, numbers, lam, res);
}

EnergyMomentum energy_momentum(const std::vector<double>& roots) {
  CompensatedSum<double> e, p;
  for (double l : roots) {
    e.add(l * l);
    p.add(l);
  }
  return {e.value(), p.value()};
}

EnergyMomentum energy_momentum(const BetheState& s) { return energy_momentum(s.roots()); }

std::string BetheState::to_json() const {
  nlohmann::json j;
  j["L"] = params_.L;
  j["c"] = params_.c;
  j["N"] = params_.N;
  j["doubled_numbers"] = numbers_.doubled();
  j["roots"] = roots_;
  j["residual"] = residual_;
  return j.dump();
}

BetheState BetheState::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Errc::invalid_argument, std::string("malformed state record: ") + e.what());
  }
  try {
    ModelParams p{j.at("L").get<double>(), j.at("c").get<double>(), 0};
    BetheNumbers numbers(j.at("doubled_numbers").get<std::vector<long>>());
    p.N = numbers.size();
    if (j.contains("roots")) {
      auto roots = j.at("roots").get<std::vector<double>>();
      require(static_cast<int>(roots.size()) == p.N, "state record: roots/numbers size mismatch");
      const double res = bethe_residual(p.L, p.c, numbers, roots);
      if (res <= 1e-10) return BetheState(p, numbers, roots, res);
    }
    return solve_bethe(p, numbers);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_argument, std::string("state record: ") + e.what());
  }
}

}  // namespace lldyn
