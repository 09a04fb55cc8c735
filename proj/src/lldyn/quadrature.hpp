#pragma once

// Adaptive Gauss-Kronrod (G10/K21) quadrature for real or complex integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "lldyn/common.hpp"

namespace lldyn {

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int max_intervals = 4000;
};

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

namespace detail {

// QUADPACK qk21 abscissae and weights.
inline constexpr std::array<double, 11> xgk21 = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> wgk21 = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525086960, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> wg10 = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class T>
inline double magnitude(const T& v) {
  return std::abs(v);
}

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> gk21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T resk = fc * wgk21[10];
  T resg{};
  double resabs = std::abs(fc) * wgk21[10];
  std::array<T, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * xgk21[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    resk += (f1[j] + f2[j]) * wgk21[j];
    resabs += (std::abs(f1[j]) + std::abs(f2[j])) * wgk21[j];
    if (j % 2 == 1) resg += (f1[j] + f2[j]) * wg10[j / 2];
  }
  const T mean = resk * 0.5;
  double resasc = wgk21[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j)
    resasc += wgk21[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  const double h = std::abs(half);
  resk *= half;
  resg *= half;
  resasc *= h;
  resabs *= h;
  double err = std::abs(resk - resg);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(50 * eps * resabs, err);
  return {a, b, resk, err};
}

}  // namespace detail

//! Integrate f over [a,b]. Breakpoints strictly inside (a,b) seed the
//! initial partition; further panels are bisected by largest error.
template <class F>
auto integrate(F&& f, double a, double b, const QuadOptions& opt = {},
               std::span<const double> breaks = {}) -> QuadResult<decltype(f(a))> {
  using T = decltype(f(a));
  QuadResult<T> out;
  if (a == b) return out;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::priority_queue<detail::Panel<T>> heap;
  double total_err = 0.0;
  T total{};
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    auto p = detail::gk21<T>(f, pts[i], pts[i + 1]);
    out.evaluations += 21;
    total_err += p.error;
    total += p.value;
    heap.push(p);
  }
  auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
  while (total_err > tolerance() && static_cast<int>(heap.size()) < opt.max_intervals) {
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // cannot split further
    heap.pop();
    auto left = detail::gk21<T>(f, worst.a, mid);
    auto right = detail::gk21<T>(f, mid, worst.b);
    out.evaluations += 42;
    total_err += left.error + right.error - worst.error;
    total += left.value + right.value - worst.value;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from scratch so the running updates do not leave drift behind.
  CompensatedSum<T> sum;
  CompensatedSum<double> err;
  std::vector<detail::Panel<T>> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const auto& l, const auto& r) { return l.a < r.a; });
  for (const auto& p : panels) {
    sum.add(p.value);
    err.add(p.error);
  }
  out.value = sign * sum.value();
  out.error = err.value();
  out.converged = out.error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(out.value));
  return out;
}

//! As integrate(), but throws Errc::quadrature when the tolerance is missed.
template <class F>
auto integrate_or_throw(F&& f, double a, double b, const QuadOptions& opt = {},
                        std::span<const double> breaks = {}) {
  auto r = integrate(std::forward<F>(f), a, b, opt, breaks);
  if (!r.converged)
    fail(Errc::quadrature, "adaptive quadrature missed tolerance: error estimate " +
                               std::to_string(r.error));
  return r;
}

}  // namespace lldyn
