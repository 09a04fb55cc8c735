#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "cli/cli.hpp"
#include "json.hpp"
#include "lldyn/lldyn.h"

namespace lldyn_cli {

namespace {

using nlohmann::json;

struct RunError : std::runtime_error {
  lldyn_status status;
  RunError(lldyn_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

void check(lldyn_status s) {
  if (s != LLDYN_OK) throw RunError(s, lldyn_last_error());
}

struct StateDeleter {
  void operator()(lldyn_state* p) const { lldyn_state_free(p); }
};
struct DensityDeleter {
  void operator()(lldyn_density* p) const { lldyn_density_free(p); }
};
using StatePtr = std::unique_ptr<lldyn_state, StateDeleter>;
using DensityPtr = std::unique_ptr<lldyn_density, DensityDeleter>;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError(LLDYN_IO, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<long> parse_numbers(const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stol(item, &pos));
      if (item.find_first_not_of(' ', pos) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw RunError(LLDYN_INVALID_ARGUMENT, "bad Bethe number '" + item + "'");
    }
  }
  return out;
}

bool is_number_list(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789-+, ") == std::string::npos;
}

DensityPtr load_density(const std::string& spec) {
  lldyn_density* d = nullptr;
  check(lldyn_density_parse(spec.c_str(), &d));
  return DensityPtr(d);
}

StatePtr solve(double L, double c, const std::vector<long>& numbers) {
  lldyn_state* s = nullptr;
  check(lldyn_bethe_solve(L, c, static_cast<int>(numbers.size()), numbers.data(), 0.0, &s));
  return StatePtr(s);
}

// Bethe numbers, a bare state record, or the output of bethe-solve
StatePtr load_state(const std::string& arg, double L, double c) {
  if (is_number_list(arg)) return solve(L, c, parse_numbers(arg));
  std::string text = read_file(arg);
  try {
    const json j = json::parse(text);
    if (j.contains("state")) text = j.at("state").dump();
  } catch (const json::exception& e) {
    throw RunError(LLDYN_INVALID_ARGUMENT, arg + ": " + e.what());
  }
  lldyn_state* s = nullptr;
  check(lldyn_state_from_json(text.c_str(), &s));
  return StatePtr(s);
}

std::vector<double> grid_points(const GridSpec& g) {
  std::vector<double> v(g.n);
  for (int i = 0; i < g.n; ++i) v[i] = g.n == 1 ? g.min : g.min + (g.max - g.min) * i / (g.n - 1);
  return v;
}

lldyn_grid to_grid(const GridSpec& g) { return {g.min, g.max, g.n}; }

lldyn_kind kind_of(const std::string& k) { return k == "density" ? LLDYN_DENSITY : LLDYN_FIELD; }

struct Meta {
  std::string command, config, hash;
};

std::string csv_header(const Meta& m, const std::vector<std::pair<std::string, std::string>>& extra) {
  std::string h = "# lldyn " + std::string(lldyn_version()) + "\n";
  h += "# command: " + m.command + "\n";
  h += "# config: " + m.config + "\n";
  h += "# input_hash: " + m.hash + "\n";
  for (const auto& [k, v] : extra) h += "# " + k + ": " + v + "\n";
  return h;
}

json json_meta(const Meta& m) {
  return {{"version", lldyn_version()}, {"command", m.command}, {"config", m.config}, {"input_hash", m.hash}};
}

struct Artifact {
  std::string text;
  bool ok = true;  // false: computed, but a check inside failed
  std::string failure;
};

Artifact bethe_solve(const RunConfig& c, const Meta& m) {
  std::vector<long> numbers;
  if (!c.numbers.empty()) {
    numbers = parse_numbers(c.numbers);
  } else {
    const auto d = load_density(c.density);
    int N = 0;
    check(lldyn_dilute_numbers(d.get(), c.L, c.c, nullptr, 0, &N));
    numbers.resize(N);
    check(lldyn_dilute_numbers(d.get(), c.L, c.c, numbers.data(), numbers.size(), &N));
  }
  const auto s = solve(c.L, c.c, numbers);
  size_t needed = 0;
  check(lldyn_state_to_json(s.get(), nullptr, 0, &needed));
  std::string buf(needed, '\0');
  check(lldyn_state_to_json(s.get(), buf.data(), needed, nullptr));
  buf.pop_back();
  double E = 0, P = 0, det = 0;
  check(lldyn_state_energy_momentum(s.get(), &E, &P));
  check(lldyn_state_gaudin_det(s.get(), &det));
  json j{{"meta", json_meta(m)},
         {"state", json::parse(buf)},
         {"energy", E},
         {"momentum", P},
         {"gaudin_det_over_LN", det}};
  return {j.dump(2) + "\n"};
}

Artifact form_factor(const RunConfig& c, const Meta& m) {
  const auto bra = load_state(c.bra, c.L, c.c);
  const auto ket = load_state(c.ket, c.L, c.c);
  double lm = 0, ph = 0;
  if (c.kind == "field")
    check(lldyn_field_ff(bra.get(), ket.get(), -1, -1, &lm, &ph));
  else
    check(lldyn_density_ff(bra.get(), ket.get(), -1, &lm, &ph));
  json j{{"meta", json_meta(m)},
         {"kind", c.kind},
         {"log_magnitude", lm},
         {"phase", ph},
         {"modulus2", std::exp(2.0 * lm)}};
  return {j.dump(2) + "\n"};
}

Artifact pfd_verify(const RunConfig& c, const Meta& m) {
  size_t count = 0;
  check(lldyn_pfd_verify(c.c, c.n_max, nullptr, 0, &count));
  std::vector<lldyn_pfd_check> rows(count);
  check(lldyn_pfd_verify(c.c, c.n_max, rows.data(), rows.size(), &count));
  json table = json::array();
  bool all = true;
  for (const auto& r : rows) {
    table.push_back({{"name", r.name},
                     {"value", r.value},
                     {"reference", r.reference},
                     {"error", r.error},
                     {"threshold", r.threshold},
                     {"pass", r.pass != 0}});
    all = all && r.pass;
  }
  json j{{"meta", json_meta(m)}, {"checks", table}, {"all_pass", all}};
  return {j.dump(2) + "\n", all, all ? "" : "partial-fraction verification failed"};
}

Artifact chi(const RunConfig& c, const Meta& m) {
  json values = json::array();
  for (double x : grid_points(parse_grid(c.x))) {
    double re = 0, im = 0;
    check(lldyn_chi(c.sign, x, &re, &im));
    values.push_back({{"x", x}, {"chi", {re, im}}});
  }
  json j{{"meta", json_meta(m)}, {"sign", c.sign}, {"values", values}};
  return {j.dump(2) + "\n"};
}

Artifact lattice_sum(const RunConfig& c, const Meta& m) {
  double cre = 0, cim = 0, dre = 0, dim = 0;
  if (c.sum == "sum2")
    check(lldyn_lattice_sum2(c.alpha, c.w, c.tau, c.L, c.n_direct, &cre, &cim, &dre, &dim));
  else
    check(lldyn_lattice_sum1(c.alpha, c.W, c.n_direct, &cre, &cim, &dre, &dim));
  json j{{"meta", json_meta(m)}, {"sum", c.sum}, {"closed", {cre, cim}}};
  if (c.n_direct > 0) {
    j["direct"] = {dre, dim};
    j["abs_difference"] = std::hypot(cre - dre, cim - dim);
  }
  return {j.dump(2) + "\n"};
}

Artifact density(const RunConfig& c, const Meta& m) {
  const auto d = load_density(c.density);
  double D = 0, lo = 0, hi = 0;
  check(lldyn_density_total(d.get(), &D));
  check(lldyn_density_support(d.get(), &lo, &hi));
  size_t needed = 0;
  check(lldyn_density_describe(d.get(), nullptr, 0, &needed));
  std::string desc(needed, '\0');
  check(lldyn_density_describe(d.get(), desc.data(), needed, nullptr));
  desc.pop_back();
  std::string out = csv_header(m, {{"description", desc}, {"D", num(D)}, {"support", num(lo) + " " + num(hi)}});
  out += "lambda,rho,rho_h\n";
  for (double lam : grid_points(parse_grid(c.lambda))) {
    double r = 0, h = 0;
    check(lldyn_density_eval(d.get(), lam, &r));
    check(lldyn_density_hole(d.get(), c.c, lam, &h));
    out += num(lam) + "," + num(r) + "," + num(h) + "\n";
  }
  return {out};
}

Artifact correlator(const RunConfig& c, const Meta& m) {
  const auto d = load_density(c.density);
  const auto gx = parse_grid(c.x), gt = parse_grid(c.t);
  std::vector<lldyn_sample> v(static_cast<size_t>(gx.n) * gt.n);
  check(lldyn_correlator_grid(d.get(), c.c, to_grid(gx), to_grid(gt), kind_of(c.kind), c.tol, c.threads,
                              c.mu_cutoff, v.data()));
  if (c.format == "json") {
    json samples = json::array();
    for (const auto& s : v) samples.push_back({{"x", s.x}, {"t", s.t}, {"re", s.re}, {"im", s.im}, {"err", s.error}});
    json j{{"meta", json_meta(m)}, {"kind", c.kind}, {"tol", c.tol}, {"samples", samples}};
    return {j.dump(2) + "\n"};
  }
  std::string out = csv_header(m, {{"kind", c.kind}, {"tol", num(c.tol)}});
  out += "x,t,re,im,err\n";
  for (const auto& s : v) out += num(s.x) + "," + num(s.t) + "," + num(s.re) + "," + num(s.im) + "," + num(s.error) + "\n";
  return {out};
}

Artifact spectral(const RunConfig& c, const Meta& m) {
  const auto d = load_density(c.density);
  const auto gx = parse_grid(c.x), gt = parse_grid(c.t);
  const size_t n = static_cast<size_t>(gx.n) * gt.n;
  std::vector<double> k(gx.n), w(gt.n), re(n), im(n);
  check(lldyn_spectral_grid(d.get(), c.c, to_grid(gx), to_grid(gt), kind_of(c.kind), c.tol, c.threads, c.mu_cutoff,
                            k.data(), w.data(), re.data(), im.data()));
  std::string out = csv_header(m, {{"kind", c.kind},
                                   {"tol", num(c.tol)},
                                   {"window", "hann in x and t"},
                                   {"convention", "sum dx dt h(x) h(t) exp(i k x - i omega t) G(x,t)"}});
  out += "k,omega,re,im\n";
  for (int j = 0; j < gt.n; ++j)
    for (int i = 0; i < gx.n; ++i) {
      const size_t idx = static_cast<size_t>(j) * gx.n + i;
      out += num(k[i]) + "," + num(w[j]) + "," + num(re[idx]) + "," + num(im[idx]) + "\n";
    }
  return {out};
}

Artifact oracle_compare(const RunConfig& c, const Meta& m) {
  const auto shape = load_density(c.density);
  std::vector<double> D;
  std::stringstream ss(c.D_list);
  for (std::string item; std::getline(ss, item, ',');) D.push_back(std::stod(item));
  lldyn_lehmann_config cfg;
  lldyn_lehmann_config_default(&cfg);
  cfg.number_window = c.window;
  cfg.cross_limit = c.cross_limit;
  cfg.max_states = c.max_states;
  cfg.tol = c.oracle_tol;
  cfg.threads = c.threads;
  const double x = std::stod(c.x), t = std::stod(c.t);
  std::vector<lldyn_study_row> rows(D.size());
  lldyn_study_summary sum;
  check(lldyn_convergence_study(shape.get(), c.N, D.data(), D.size(), c.c, x, t, kind_of(c.kind), &cfg, rows.data(),
                                &sum));
  std::string out = csv_header(m, {{"kind", c.kind},
                                   {"exponent", num(sum.exponent)},
                                   {"monotone", sum.monotone ? "true" : "false"},
                                   {"exponent_with_d2", num(sum.exponent_with_d2)},
                                   {"monotone_with_d2", sum.monotone_with_d2 ? "true" : "false"}});
  out += "D,N,L,x,t,abs_formula,abs_oracle,rel_err,rel_err_with_d2,saturation,stability\n";
  for (const auto& r : rows)
    out += num(r.D) + "," + std::to_string(r.N) + "," + num(r.L) + "," + num(r.x) + "," + num(r.t) + "," +
           num(std::hypot(r.formula_re, r.formula_im)) + "," + num(std::hypot(r.oracle_re, r.oracle_im)) + "," +
           num(r.rel_err) + "," + num(r.rel_err_with_d2) + "," + num(r.saturation) + "," + num(r.stability) + "\n";
  return {out};
}

Artifact compute(const RunConfig& c, const Meta& m) {
  const auto& cmd = c.command;
  if (cmd == "bethe-solve") return bethe_solve(c, m);
  if (cmd == "ff") return form_factor(c, m);
  if (cmd == "pfd-verify") return pfd_verify(c, m);
  if (cmd == "chi") return chi(c, m);
  if (cmd == "lattice-sum") return lattice_sum(c, m);
  if (cmd == "density") return density(c, m);
  if (cmd == "correlator") return correlator(c, m);
  if (cmd == "spectral") return spectral(c, m);
  if (cmd == "oracle-compare") return oracle_compare(c, m);
  throw RunError(LLDYN_INVALID_ARGUMENT, "unknown command " + cmd);
}

void write_output(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw RunError(LLDYN_IO, "cannot write " + c.output);
}

// cached artifacts are written whole and renamed into place
void store(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    f << text;
    if (!f) return;
  }
  std::filesystem::rename(tmp, p, ec);
}

void error_record(std::ostream& err, const std::string& status, int code, const std::string& message) {
  err << json{{"error", {{"status", status}, {"code", code}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Meta m;
    m.command = c.command;
    m.config = canonical(c);
    m.hash = hex64(fnv1a(std::string(lldyn_version()) + "\n" + m.config));
    const bool as_json = c.format == "json" || (c.command != "density" && c.command != "correlator" &&
                                                c.command != "spectral" && c.command != "oracle-compare");
    const std::filesystem::path cached = std::filesystem::path(cache_dir()) / (m.hash + (as_json ? ".json" : ".csv"));

    Artifact a;
    std::string cache_state = "off";
    if (c.cache && std::filesystem::is_regular_file(cached)) {
      a.text = read_file(cached.string());
      cache_state = "hit";
    } else {
      a = compute(c, m);
      if (c.cache) {
        cache_state = "miss";
        if (a.ok) store(cached, a.text);
      }
    }
    write_output(c, a.text, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    err << json{{"command", c.command}, {"input_hash", m.hash}, {"cache", cache_state}, {"seconds", secs}}.dump()
        << "\n";
    if (!a.ok) {
      error_record(err, "check_failed", 1, a.failure);
      return 1;
    }
    return 0;
  } catch (const RunError& e) {
    error_record(err, lldyn_status_name(e.status), e.status, e.what());
  } catch (const ConfigError& e) {
    error_record(err, "invalid_argument", LLDYN_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    error_record(err, "internal", LLDYN_INTERNAL, e.what());
  }
  return 1;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig cfg;
  try {
    cfg = parse_config(args.empty() ? std::vector<std::string>{"--help"} : args);
  } catch (const HelpRequest& e) {
    out << e.what();
    return args.empty() ? 2 : 0;
  } catch (const ConfigError& e) {
    error_record(err, "usage", 2, e.what());
    return 2;
  }
  return run(cfg, out, err);
}

}  // namespace lldyn_cli
