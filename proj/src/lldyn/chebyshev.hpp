#pragma once

// Adaptive piecewise Chebyshev interpolation (33 Lobatto points per panel)
// and a Lobatto-grid differentiation helper.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "lldyn/common.hpp"

namespace lldyn {

namespace detail {

inline constexpr int kChebN = 32;  // polynomial degree per panel

inline const std::array<double, kChebN + 1>& lobatto_nodes() {
  static const std::array<double, kChebN + 1> x = [] {
    std::array<double, kChebN + 1> v{};
    for (int j = 0; j <= kChebN; ++j) v[j] = std::cos(pi * j / kChebN);
    return v;
  }();
  return x;
}

// Barycentric interpolation on Lobatto points of degree n (n+1 values at
// cos(pi j/n)), with stride through a finer grid.
template <class T>
T barycentric(const T* v, int n, int stride, double s) {
  const auto& X = lobatto_nodes();
  T num{};
  double den = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double xj = X[j * stride];
    const double diff = s - xj;
    if (diff == 0.0) return v[j * stride];
    double w = (j % 2 == 0 ? 1.0 : -1.0) / diff;
    if (j == 0 || j == n) w *= 0.5;
    num += w * v[j * stride];
    den += w;
  }
  return num / den;
}

}  // namespace detail

template <class T>
class PiecewiseChebyshev {
 public:
  PiecewiseChebyshev() = default;

  //! Bisects [a,b] (seeded with breaks) until on every panel the degree-16
  //! interpolant predicts the remaining 16 nodes of the degree-32 grid to abs_tol.
  template <class F>
  PiecewiseChebyshev(F&& f, double a, double b, double abs_tol, std::span<const double> breaks = {},
                     int max_panels = 4000) {
    require(b > a, "chebyshev: need a < b");
    std::vector<double> pts{a};
    for (double x : breaks)
      if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<std::pair<double, double>> todo;
    for (size_t i = pts.size() - 1; i > 0; --i) todo.emplace_back(pts[i - 1], pts[i]);
    const auto& X = detail::lobatto_nodes();
    while (!todo.empty()) {
      auto [pa, pb] = todo.back();
      todo.pop_back();
      Panel p{pa, pb, {}};
      const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
      for (int j = 0; j <= detail::kChebN; ++j) p.v[j] = f(mid + half * X[j]);
      evaluations_ += detail::kChebN + 1;
      double err = 0.0;
      for (int j = 1; j < detail::kChebN; j += 2)
        err = std::max(err, std::abs(detail::barycentric(p.v.data(), detail::kChebN / 2, 2, X[j]) - p.v[j]));
      const bool splittable = mid > pa && mid < pb;
      if (err <= abs_tol || !splittable) {
        if (err > abs_tol) converged_ = false;
        panels_.push_back(p);
        continue;
      }
      if (static_cast<int>(panels_.size() + todo.size()) >= max_panels) {
        converged_ = false;
        panels_.push_back(p);
        continue;
      }
      todo.emplace_back(mid, pb);
      todo.emplace_back(pa, mid);
    }
    std::sort(panels_.begin(), panels_.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
    edges_.reserve(panels_.size() + 1);
    for (const auto& p : panels_) edges_.push_back(p.a);
    edges_.push_back(panels_.back().b);
  }

  T operator()(double x) const {
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    size_t k = it == edges_.begin() ? 0 : static_cast<size_t>(it - edges_.begin()) - 1;
    k = std::min(k, panels_.size() - 1);
    const auto& p = panels_[k];
    const double s = (2 * x - p.a - p.b) / (p.b - p.a);
    return detail::barycentric(p.v.data(), detail::kChebN, 1, s);
  }

  const std::vector<double>& edges() const { return edges_; }
  int evaluations() const { return evaluations_; }
  bool converged() const { return converged_; }

 private:
  struct Panel {
    double a, b;
    std::array<T, detail::kChebN + 1> v;
  };
  std::vector<Panel> panels_;
  std::vector<double> edges_;
  int evaluations_ = 0;
  bool converged_ = true;
};

//! Values on the n+1 Lobatto points of [0,1] (w_j = (1 + cos(pi j/n))/2);
//! derivative values on the same points, through the Chebyshev coefficients.
template <class T>
std::vector<T> lobatto_derivative(const std::vector<T>& v) {
  const int n = static_cast<int>(v.size()) - 1;
  std::vector<T> a(n + 1);
  for (int k = 0; k <= n; ++k) {
    T s{};
    for (int j = 0; j <= n; ++j) {
      const double w = (j == 0 || j == n) ? 0.5 : 1.0;
      s += w * v[j] * std::cos(pi * k * j / n);
    }
    a[k] = s * (2.0 / n);
  }
  a[0] *= 0.5;
  a[n] *= 0.5;
  // derivative coefficients, d/ds with s in [-1,1]
  std::vector<T> d(n + 2, T{});
  for (int k = n - 1; k >= 0; --k) d[k] = d[k + 2] + 2.0 * (k + 1) * a[k + 1];
  d[0] *= 0.5;
  std::vector<T> out(n + 1);
  for (int j = 0; j <= n; ++j) {
    T s{};
    for (int k = 0; k < n; ++k) s += d[k] * std::cos(pi * k * j / n);
    out[j] = 2.0 * s;  // ds/dw = 2
  }
  return out;
}

}  // namespace lldyn
