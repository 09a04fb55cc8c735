#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "cli/cli.hpp"

namespace lldyn_cli {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s, const std::string& what) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw ConfigError(what + ": not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

bool is_number_list(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789-+, ") == std::string::npos;
}

// files referenced by a density spec or a state argument, if any
std::string referenced_file(const std::string& spec) {
  if (spec.empty() || spec.rfind("family:", 0) == 0) return {};
  if (spec.rfind("state:", 0) == 0) return spec.substr(6);
  return spec;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a(ss.str()));
}

void check_file(const std::string& spec, const std::string& flag) {
  const auto f = referenced_file(spec);
  if (!f.empty() && !std::filesystem::is_regular_file(f)) throw ConfigError(flag + ": no such file: " + f);
}

void check_state_arg(const std::string& s, const std::string& flag) {
  if (!is_number_list(s) && !std::filesystem::is_regular_file(s))
    throw ConfigError(flag + ": expected doubled Bethe numbers or a state file, got '" + s + "'");
}

void validate(const RunConfig& c) {
  const auto& cmd = c.command;
  auto positive = [](double v, const char* flag) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(flag) + " must be positive");
  };
  if (cmd == "correlator" || cmd == "spectral" || cmd == "oracle-compare" || cmd == "density") {
    if (c.density.empty()) throw ConfigError("--density is required");
    check_file(c.density, "--density");
  }
  if (cmd == "correlator" || cmd == "spectral" || cmd == "oracle-compare") {
    if (c.kind != "field" && c.kind != "density") throw ConfigError("--kind must be field or density");
    positive(c.tol, "--tol");
    if (c.threads < 1) throw ConfigError("--threads must be >= 1");
    if (c.mu_cutoff < 0.0) throw ConfigError("--mu-cutoff must be >= 0");
    if (c.mu_cutoff > 0.0 && c.kind == "field") throw ConfigError("--mu-cutoff applies to the density only");
  }
  if (cmd == "correlator" || cmd == "spectral") {
    parse_grid(c.x);
    parse_grid(c.t);
    if (c.format != "csv" && c.format != "json") throw ConfigError("--format must be csv or json");
    if (cmd == "spectral" && c.format != "csv") throw ConfigError("spectral writes csv only");
  }
  if (cmd == "density") parse_grid(c.lambda);
  if (cmd == "bethe-solve") {
    positive(c.L, "--L");
    positive(c.c, "--c");
    if (c.numbers.empty() == c.density.empty())
      throw ConfigError("bethe-solve needs exactly one of --numbers and --density");
    if (!c.numbers.empty() && !is_number_list(c.numbers)) throw ConfigError("--numbers: expected integers");
    check_file(c.density, "--density");
  }
  if (cmd == "ff") {
    if (c.kind != "field" && c.kind != "density") throw ConfigError("--kind must be field or density");
    check_state_arg(c.bra, "--bra");
    check_state_arg(c.ket, "--ket");
    if ((is_number_list(c.bra) || is_number_list(c.ket)) && !(c.L > 0.0 && c.c > 0.0))
      throw ConfigError("ff with Bethe numbers needs --L and --c");
  }
  if (cmd == "pfd-verify") {
    positive(c.c, "--c");
    if (c.n_max < 1 || c.n_max > 4) throw ConfigError("--n-max must be in 1..4");
  }
  if (cmd == "chi") {
    if (c.sign != 1 && c.sign != -1) throw ConfigError("--sign must be 1 or -1");
    parse_grid(c.x);
  }
  if (cmd == "lattice-sum") {
    if (c.sum != "sum1" && c.sum != "sum2") throw ConfigError("--sum must be sum1 or sum2");
    if (c.sum == "sum2") positive(c.L, "--L");
    if (c.n_direct < 0) throw ConfigError("--n-direct must be >= 0");
  }
  if (cmd == "oracle-compare") {
    if (c.N < 1) throw ConfigError("--N must be >= 1");
    if (c.D_list.empty()) throw ConfigError("--D is required");
    for (const auto& d : split(c.D_list, ',')) positive(to_double(d, "--D"), "--D");
    positive(c.oracle_tol, "--oracle-tol");
    if (c.window < 0 || c.cross_limit < 0 || c.max_states < 1)
      throw ConfigError("--window and --cross-limit must be >= 0, --max-states >= 1");
  }
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  GridSpec g;
  if (parts.size() == 1) {
    g.min = g.max = to_double(parts[0], "grid");
    g.n = 1;
  } else if (parts.size() == 3) {
    g.min = to_double(parts[0], "grid");
    g.max = to_double(parts[1], "grid");
    const double n = to_double(parts[2], "grid");
    if (n != std::floor(n) || n < 1 || n > 1e7) throw ConfigError("grid: point count must be a positive integer");
    g.n = static_cast<int>(n);
    if (g.n == 1 && g.min != g.max) throw ConfigError("grid: one point needs min == max");
    if (g.n > 1 && !(g.max > g.min)) throw ConfigError("grid: max must exceed min");
  } else {
    throw ConfigError("grid: expected 'v' or 'min:max:n', got '" + text + "'");
  }
  if (!std::isfinite(g.min) || !std::isfinite(g.max)) throw ConfigError("grid: values must be finite");
  return g;
}

std::string format_grid(const GridSpec& g) { return num(g.min) + ":" + num(g.max) + ":" + std::to_string(g.n); }

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string cache_dir() {
  if (const char* d = std::getenv("LLDYN_CACHE_DIR"); d && *d) return d;
  if (const char* d = std::getenv("XDG_CACHE_HOME"); d && *d) return std::string(d) + "/lldyn";
  if (const char* d = std::getenv("HOME"); d && *d) return std::string(d) + "/.cache/lldyn";
  return ".lldyn-cache";
}

std::string canonical(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&](const char* k, const std::string& v) { kv.emplace_back(k, v); };
  auto add_density = [&](const std::string& spec) {
    add("density", spec);
    if (const auto f = referenced_file(spec); !f.empty()) add("density_digest", file_digest(f));
  };
  auto add_state = [&](const char* k, const std::string& s) {
    add(k, s);
    if (!is_number_list(s)) add((std::string(k) + "_digest").c_str(), file_digest(s));
  };
  const auto& cmd = c.command;
  add("command", cmd);
  if (cmd == "bethe-solve") {
    add("L", num(c.L));
    add("c", num(c.c));
    if (!c.numbers.empty()) add("numbers", c.numbers);
    if (!c.density.empty()) add_density(c.density);
  } else if (cmd == "ff") {
    add("kind", c.kind);
    add_state("bra", c.bra);
    add_state("ket", c.ket);
    if (is_number_list(c.bra) || is_number_list(c.ket)) {
      add("L", num(c.L));
      add("c", num(c.c));
    }
  } else if (cmd == "pfd-verify") {
    add("c", num(c.c));
    add("n_max", std::to_string(c.n_max));
  } else if (cmd == "chi") {
    add("sign", std::to_string(c.sign));
    add("x", format_grid(parse_grid(c.x)));
  } else if (cmd == "lattice-sum") {
    add("sum", c.sum);
    add("alpha", num(c.alpha));
    if (c.sum == "sum2") {
      add("w", num(c.w));
      add("tau", num(c.tau));
      add("L", num(c.L));
    } else {
      add("W", num(c.W));
    }
    add("n_direct", std::to_string(c.n_direct));
  } else if (cmd == "density") {
    add_density(c.density);
    add("c", num(c.c));
    add("lambda", format_grid(parse_grid(c.lambda)));
  } else if (cmd == "correlator" || cmd == "spectral") {
    add("kind", c.kind);
    add_density(c.density);
    add("c", num(c.c));
    add("x", format_grid(parse_grid(c.x)));
    add("t", format_grid(parse_grid(c.t)));
    add("tol", num(c.tol));
    add("mu_cutoff", num(c.mu_cutoff));
    add("format", c.format);
  } else if (cmd == "oracle-compare") {
    add("kind", c.kind);
    add_density(c.density);
    add("c", num(c.c));
    add("N", std::to_string(c.N));
    std::string ds;
    for (const auto& d : split(c.D_list, ',')) ds += (ds.empty() ? "" : ",") + num(to_double(d, "--D"));
    add("D", ds);
    add("x", num(to_double(c.x, "--x")));
    add("t", num(to_double(c.t, "--t")));
    add("window", std::to_string(c.window));
    add("cross_limit", std::to_string(c.cross_limit));
    add("max_states", std::to_string(c.max_states));
    add("oracle_tol", num(c.oracle_tol));
  }
  std::string out;
  for (const auto& [k, v] : kv) out += (out.empty() ? "" : ";") + k + "=" + v;
  return out;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig c;
  CLI::App app{"Low-density dynamical correlations of the Lieb-Liniger gas", "lldyn"};
  app.set_config("--config", "", "TOML file with a [subcommand] table");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);

  auto output_opts = [&](CLI::App* s) {
    s->fallthrough();
    s->add_option("-o,--output", c.output, "output file (default stdout)");
    s->add_flag("!--no-cache", c.cache, "do not read or write the cache");
  };
  auto corr_opts = [&](CLI::App* s) {
    s->add_option("--kind", c.kind, "field or density")->capture_default_str();
    s->add_option("--density", c.density, "root density: family:..., state:<file> or CSV")->required();
    s->add_option("--c", c.c, "coupling")->required()->check(CLI::PositiveNumber);
    s->add_option("--tol", c.tol, "absolute tolerance")->capture_default_str();
    s->add_option("--threads", c.threads)->capture_default_str();
    s->add_option("--mu-cutoff", c.mu_cutoff, "density: restrict mu to [-m, m] (0: none)");
  };

  auto* bs = app.add_subcommand("bethe-solve", "solve the Bethe equations, print the state as JSON");
  output_opts(bs);
  bs->add_option("--L", c.L)->required();
  bs->add_option("--c", c.c)->required();
  bs->add_option("--numbers", c.numbers, "doubled Bethe numbers, e.g. -2,0,2");
  bs->add_option("--density", c.density, "dilute state of this density at length L");

  auto* ff = app.add_subcommand("ff", "form factor <bra|op|ket> as JSON");
  output_opts(ff);
  ff->add_option("--kind", c.kind, "field or density")->capture_default_str();
  ff->add_option("--bra", c.bra, "doubled numbers or state JSON file")->required();
  ff->add_option("--ket", c.ket, "doubled numbers or state JSON file")->required();
  ff->add_option("--L", c.L);
  ff->add_option("--c", c.c);

  auto* pv = app.add_subcommand("pfd-verify", "partial-fraction verification table as JSON");
  output_opts(pv);
  pv->add_option("--c", c.c, "coupling (default 1)");
  pv->add_option("--n-max", c.n_max)->capture_default_str();

  auto* chi = app.add_subcommand("chi", "damping function chi_sign on a grid, JSON");
  output_opts(chi);
  chi->add_option("--sign", c.sign)->capture_default_str();
  chi->add_option("--x", c.x, "grid 'v' or 'min:max:n'")->required();

  auto* ls = app.add_subcommand("lattice-sum", "lattice sums, closed form against direct summation, JSON");
  output_opts(ls);
  ls->add_option("--sum", c.sum, "sum1 or sum2")->capture_default_str();
  ls->add_option("--alpha", c.alpha)->required();
  ls->add_option("--w", c.w);
  ls->add_option("--tau", c.tau);
  ls->add_option("--L", c.L);
  ls->add_option("--W", c.W);
  ls->add_option("--n-direct", c.n_direct, "terms for the direct sum (0: closed form only)");

  auto* de = app.add_subcommand("density", "root and hole density on a grid, CSV");
  output_opts(de);
  de->add_option("--density", c.density)->required();
  de->add_option("--c", c.c)->required()->check(CLI::PositiveNumber);
  de->add_option("--lambda", c.lambda, "grid 'min:max:n'")->capture_default_str();

  auto* co = app.add_subcommand("correlator", "field or density correlator on an (x, t) grid");
  output_opts(co);
  corr_opts(co);
  co->add_option("--x", c.x, "grid 'v' or 'min:max:n'")->required();
  co->add_option("--t", c.t, "grid 'v' or 'min:max:n'")->required();
  co->add_option("--format", c.format, "csv or json")->capture_default_str();

  auto* sp = app.add_subcommand("spectral", "windowed Fourier transform of the correlator grid, CSV");
  output_opts(sp);
  corr_opts(sp);
  sp->add_option("--x", c.x)->required();
  sp->add_option("--t", c.t)->required();

  auto* oc = app.add_subcommand("oracle-compare", "formula against the finite-size Lehmann sum, CSV");
  output_opts(oc);
  corr_opts(oc);
  oc->add_option("--N", c.N, "particle number")->required();
  oc->add_option("--D", c.D_list, "decreasing densities, comma separated")->required();
  oc->add_option("--x", c.x)->required();
  oc->add_option("--t", c.t)->required();
  oc->add_option("--window", c.window, "Bethe-number window (0: automatic)");
  oc->add_option("--cross-limit", c.cross_limit, "(0: automatic)");
  oc->add_option("--max-states", c.max_states)->capture_default_str();
  oc->add_option("--oracle-tol", c.oracle_tol)->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream os;
    app.exit(e, os, os);
    throw HelpRequest(os.str());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  const auto* sub = app.get_subcommands().front();
  c.command = sub->get_name();
  if (c.command == "pfd-verify" && sub->count("--c") == 0) c.c = 1.0;
  validate(c);
  return c;
}

}  // namespace lldyn_cli
