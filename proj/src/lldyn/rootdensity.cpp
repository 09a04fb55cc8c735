#include "lldyn/rootdensity.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace lldyn {

namespace {

constexpr double kGaussCut = 5.5;  // exp(-5.5^2) ~ 7e-14

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(Errc::invalid_argument, "density spec: cannot parse " + what + " = '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Fritsch-Carlson monotone slopes (the same construction as scipy's PCHIP).
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  std::vector<double> h(n - 1), del(n - 1);
  for (size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    del[k] = (y[k + 1] - y[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = del[0];
    return d;
  }
  for (size_t k = 1; k + 1 < n; ++k) {
    if (del[k - 1] * del[k] <= 0) continue;
    const double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
  }
  auto end_slope = [](double h0, double h1, double m0, double m1) {
    double s = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (s * m0 <= 0)
      s = 0;
    else if (m0 * m1 <= 0 && std::abs(s) > std::abs(3 * m0))
      s = 3 * m0;
    return s;
  };
  d[0] = end_slope(h[0], h[1], del[0], del[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  return d;
}

}  // namespace

RootDensity::RootDensity() = default;

RootDensity RootDensity::zero() { return RootDensity(); }

RootDensity RootDensity::gaussian(double amplitude, double sigma, double center) {
  return gaussian_sum({{amplitude, sigma, center}});
}

RootDensity RootDensity::gaussian_sum(std::vector<GaussianTerm> terms) {
  require(!terms.empty(), "gaussian density: need at least one term");
  RootDensity r;
  r.kind_ = Kind::gaussian_sum;
  std::ostringstream os;
  os << (terms.size() == 1 ? "gaussian(" : "gaussian_sum(");
  bool first = true;
  for (const auto& t : terms) {
    require(t.amplitude >= 0 && std::isfinite(t.amplitude), "gaussian density: amplitude must be >= 0");
    require(t.sigma > 0 && std::isfinite(t.sigma), "gaussian density: sigma must be > 0");
    require(std::isfinite(t.center), "gaussian density: center must be finite");
    os << (first ? "" : ";") << "A=" << fmt(t.amplitude) << ",sigma=" << fmt(t.sigma)
       << ",center=" << fmt(t.center);
    first = false;
  }
  os << ")";
  r.terms_ = std::move(terms);
  r.lo_ = r.hi_ = r.terms_[0].center;
  for (const auto& t : r.terms_) {
    r.lo_ = std::min(r.lo_, t.center - kGaussCut * t.sigma);
    r.hi_ = std::max(r.hi_, t.center + kGaussCut * t.sigma);
    r.breaks_.push_back(t.center);
  }
  r.describe_ = os.str();
  r.finish();
  return r;
}

RootDensity RootDensity::box(double height, double half_width, double center) {
  require(height >= 0 && std::isfinite(height), "box density: height must be >= 0");
  require(half_width > 0 && std::isfinite(half_width), "box density: half width must be > 0");
  RootDensity r;
  r.kind_ = Kind::box;
  r.height_ = height;
  r.lo_ = center - half_width;
  r.hi_ = center + half_width;
  r.describe_ = "box(h=" + fmt(height) + ",a=" + fmt(half_width) + ",center=" + fmt(center) + ")";
  r.finish();
  return r;
}

RootDensity RootDensity::tabulated(std::vector<double> grid, std::vector<double> values) {
  require(grid.size() == values.size(), "tabulated density: grid and values differ in length");
  require(grid.size() >= 2, "tabulated density: need at least two samples");
  for (size_t k = 0; k < grid.size(); ++k) {
    require(std::isfinite(grid[k]) && std::isfinite(values[k]), "tabulated density: non-finite sample");
    require(values[k] >= 0, "tabulated density: values must be >= 0");
    if (k > 0) require(grid[k] > grid[k - 1], "tabulated density: grid must be strictly increasing");
  }
  RootDensity r;
  r.kind_ = Kind::tabulated;
  r.slopes_ = pchip_slopes(grid, values);
  r.lo_ = grid.front();
  r.hi_ = grid.back();
  r.breaks_ = grid;
  // content fingerprint, FNV-1a over the raw samples
  std::uint64_t h = 1469598103934665603ull;
  for (size_t k = 0; k < grid.size(); ++k)
    for (double v : {grid[k], values[k]}) {
      const auto* b = reinterpret_cast<const unsigned char*>(&v);
      for (size_t i = 0; i < sizeof v; ++i) h = (h ^ b[i]) * 1099511628211ull;
    }
  std::ostringstream os;
  os << "tabulated(n=" << grid.size() << ",fnv=" << std::hex << h << ")";
  r.describe_ = os.str();
  r.grid_ = std::move(grid);
  r.values_ = std::move(values);
  r.finish();
  return r;
}

RootDensity RootDensity::atoms(std::vector<double> positions, double L) {
  require(L > 0 && std::isfinite(L), "atomic density: L must be > 0");
  require(!positions.empty(), "atomic density: need at least one atom");
  std::sort(positions.begin(), positions.end());
  RootDensity r;
  r.kind_ = Kind::atomic;
  r.atom_weight_ = 1.0 / L;
  r.lo_ = positions.front();
  r.hi_ = positions.back();
  r.describe_ = "atoms(N=" + std::to_string(positions.size()) + ",L=" + fmt(L) + ",lambda=";
  for (size_t k = 0; k < positions.size(); ++k) r.describe_ += (k ? ";" : "") + fmt(positions[k]);
  r.describe_ += ")";
  r.atoms_ = std::move(positions);
  r.breaks_ = r.atoms_;
  return r;
}

RootDensity RootDensity::from_state(const BetheState& s) { return atoms(s.roots(), s.L()); }

RootDensity RootDensity::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open density file '" + path + "'");
  std::vector<double> grid, values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, ',');
    if (cols.size() != 2) fail(Errc::invalid_argument, path + ":" + std::to_string(lineno) + ": expected two columns");
    const std::string a = trim(cols[0]), b = trim(cols[1]);
    // a non-numeric first row is a header
    if (grid.empty() && values.empty() && !a.empty() && !(std::isdigit(a[0]) || a[0] == '-' || a[0] == '+' || a[0] == '.'))
      continue;
    grid.push_back(parse_number(a, "lambda"));
    values.push_back(parse_number(b, "rho"));
  }
  return tabulated(std::move(grid), std::move(values));
}

RootDensity RootDensity::parse(const std::string& spec) {
  if (spec.rfind("state:", 0) == 0) {
    const std::string path = spec.substr(6);
    std::ifstream in(path);
    if (!in) fail(Errc::io, "cannot open state file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_state(BetheState::from_json(buf.str()));
  }
  if (spec.rfind("family:", 0) != 0) return from_csv(spec);
  auto parts = split(spec.substr(7), ',');
  require(!parts.empty(), "density spec: missing family name");
  const std::string family = trim(parts[0]);
  std::vector<std::pair<std::string, std::string>> kv;
  for (size_t k = 1; k < parts.size(); ++k) {
    const auto eq = parts[k].find('=');
    require(eq != std::string::npos, "density spec: expected key=value, got '" + parts[k] + "'");
    kv.emplace_back(trim(parts[k].substr(0, eq)), trim(parts[k].substr(eq + 1)));
  }
  auto take = [&](const std::string& key, bool needed) -> std::string {
    for (auto it = kv.begin(); it != kv.end(); ++it)
      if (it->first == key) {
        std::string v = it->second;
        kv.erase(it);
        return v;
      }
    require(!needed, "density spec: missing parameter '" + key + "' for family " + family);
    return "";
  };
  auto done = [&] {
    if (!kv.empty()) fail(Errc::invalid_argument, "density spec: unknown parameter '" + kv.front().first + "'");
  };
  if (family == "zero") {
    done();
    return zero();
  }
  if (family == "gaussian") {
    const double A = parse_number(take("A", true), "A"), s = parse_number(take("sigma", true), "sigma");
    const std::string c = take("center", false);
    done();
    return gaussian(A, s, c.empty() ? 0.0 : parse_number(c, "center"));
  }
  if (family == "box") {
    const double h = parse_number(take("h", true), "h"), a = parse_number(take("a", true), "a");
    const std::string c = take("center", false);
    done();
    return box(h, a, c.empty() ? 0.0 : parse_number(c, "center"));
  }
  if (family == "gaussian_sum") {
    const auto A = split(take("A", true), ';'), S = split(take("sigma", true), ';');
    const std::string cs = take("center", false);
    done();
    const auto C = cs.empty() ? std::vector<std::string>(A.size(), "0") : split(cs, ';');
    require(A.size() == S.size() && A.size() == C.size(), "density spec: gaussian_sum lists differ in length");
    std::vector<GaussianTerm> terms;
    for (size_t k = 0; k < A.size(); ++k)
      terms.push_back({parse_number(A[k], "A"), parse_number(S[k], "sigma"), parse_number(C[k], "center")});
    return gaussian_sum(std::move(terms));
  }
  fail(Errc::invalid_argument, "density spec: unknown family '" + family + "'");
}

void RootDensity::finish() {
  std::sort(breaks_.begin(), breaks_.end());
  breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
}

RootDensity RootDensity::scaled(double factor) const {
  require(factor >= 0 && std::isfinite(factor), "density scale factor must be >= 0");
  switch (kind_) {
    case Kind::zero:
      return zero();
    case Kind::gaussian_sum: {
      auto terms = terms_;
      for (auto& t : terms) t.amplitude *= factor;
      return gaussian_sum(std::move(terms));
    }
    case Kind::box:
      return box(height_ * factor, 0.5 * (hi_ - lo_), 0.5 * (hi_ + lo_));
    case Kind::tabulated: {
      auto v = values_;
      for (auto& y : v) y *= factor;
      return tabulated(grid_, std::move(v));
    }
    case Kind::atomic:
      break;
  }
  fail(Errc::invalid_argument, "an atomic density cannot be rescaled");
}

double RootDensity::feature_scale() const {
  if (kind_ == Kind::gaussian_sum) {
    double s = terms_[0].sigma;
    for (const auto& t : terms_) s = std::min(s, t.sigma);
    return s;
  }
  return hi_ > lo_ ? hi_ - lo_ : 1.0;
}

double RootDensity::operator()(double x) const {
  switch (kind_) {
    case Kind::zero:
    case Kind::atomic:
      return 0.0;
    case Kind::gaussian_sum: {
      if (x < lo_ || x > hi_) return 0.0;
      double s = 0.0;
      for (const auto& t : terms_) {
        const double u = (x - t.center) / t.sigma;
        s += t.amplitude * std::exp(-u * u);
      }
      return s;
    }
    case Kind::box:
      return x >= lo_ && x <= hi_ ? height_ : 0.0;
    case Kind::tabulated: {
      if (x < lo_ || x > hi_) return 0.0;
      const size_t k = std::min<size_t>(std::upper_bound(grid_.begin(), grid_.end(), x) - grid_.begin(),
                                        grid_.size() - 1);
      const size_t i = k - 1;
      const double h = grid_[k] - grid_[i], s = (x - grid_[i]) / h;
      const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
      const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
      return std::max(0.0, h00 * values_[i] + h10 * h * slopes_[i] + h01 * values_[k] + h11 * h * slopes_[k]);
    }
  }
  return 0.0;
}

double RootDensity::total() const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::atomic:
      return atom_weight_ * static_cast<double>(atoms_.size());
    case Kind::box:
      return height_ * (hi_ - lo_);
    default: {
      QuadOptions opt;
      opt.abs_tol = 1e-15;
      opt.rel_tol = 1e-14;
      return integrate([](double) { return 1.0; }, opt).value;
    }
  }
}

std::string RootDensity::describe() const { return describe_; }

double particle_density(const RootDensity& rho) { return rho.total(); }

HoleDensity::HoleDensity(RootDensity rho, double c, double tol) : rho_(std::move(rho)), c_(c), tol_(tol) {
  require(c > 0 && std::isfinite(c), "hole density: c must be positive");
}

double HoleDensity::smooth_part(double lambda) const {
  QuadOptions opt;
  opt.abs_tol = tol_;
  opt.max_intervals = 20000;
  const double c = c_;
  auto K = [lambda, c](double mu) { return kernel(lambda - mu, c); };
  QuadResult<double> r;
  if (!rho_.is_atomic() && lambda > rho_.support_min() && lambda < rho_.support_max()) {
    // seed the kernel peak as an extra breakpoint
    std::vector<double> br = rho_.breakpoints();
    br.push_back(lambda);
    r = integrate([&](double mu) { return rho_(mu) * K(mu); }, rho_.support_min(), rho_.support_max(), opt, br);
  } else {
    r = rho_.integrate(K, opt);
  }
  if (!r.converged) fail(Errc::quadrature, "hole density: quadrature missed tolerance");
  return (1.0 + r.value) / two_pi;
}

HoleDensity hole_density(const RootDensity& rho, double c) { return HoleDensity(rho, c); }

BetheNumbers dilute_sampler(const RootDensity& rho, double L, double c) {
  require(L > 0 && std::isfinite(L), "dilute sampler: L must be positive");
  require(c > 0 && std::isfinite(c), "dilute sampler: c must be positive");
  require(!rho.is_atomic(), "dilute sampler: needs a continuous density");
  const double D = rho.total();
  const long N = std::lround(D * L);
  if (N < 1) fail(Errc::invalid_argument, "dilute sampler: D L rounds to zero particles");
  QuadOptions opt;
  opt.abs_tol = 1e-14 * std::max(D, 1e-300);
  auto cdf = [&](double x) {
    if (x <= rho.support_min()) return 0.0;
    if (x >= rho.support_max()) return 1.0;
    std::vector<double> br = rho.breakpoints();
    return lldyn::integrate([&](double y) { return rho(y); }, rho.support_min(), x, opt, br).value / D;
  };
  std::vector<double> target(N);
  for (long k = 0; k < N; ++k) {
    const double q = (k + 0.5) / static_cast<double>(N);
    double a = rho.support_min(), b = rho.support_max();
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
      const double m = 0.5 * (a + b);
      (cdf(m) < q ? a : b) = m;
    }
    target[k] = 0.5 * (a + b);
  }
  std::vector<long> d(N);
  for (long k = 0; k < N; ++k) {
    double z = L * target[k] / two_pi;
    for (long j = 0; j < N; ++j) z += std::atan((target[k] - target[j]) / c) / pi;
    // nearest integer (odd N) or half-odd integer (even N), stored doubled
    d[k] = N % 2 == 1 ? 2 * std::lround(z) : 2 * static_cast<long>(std::floor(z)) + 1;
  }
  // collisions only arise for non-dilute input; push them apart to the right
  for (long k = 1; k < N; ++k)
    if (d[k] <= d[k - 1]) d[k] = d[k - 1] + 2;
  return BetheNumbers(d);
}

}  // namespace lldyn
