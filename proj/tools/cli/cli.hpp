#pragma once

// Command-line front end. Everything numerical goes through the C interface.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace lldyn_cli {

//! "v" or "min:max:n"
struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  int n = 1;
};

GridSpec parse_grid(const std::string& text);
std::string format_grid(const GridSpec& g);

struct RunConfig {
  std::string command;

  // model and sources
  std::string density;  // --density spec; empty if not given
  std::string kind = "field";
  double c = 0.0;
  double L = 0.0;
  std::string numbers;  // doubled Bethe numbers "-2,0,2"
  std::string bra, ket;  // numbers or a state JSON file

  // correlator / spectral / density
  std::string x = "0";
  std::string t = "0";
  std::string lambda = "-4:4:9";
  double tol = 1e-8;
  int threads = 1;
  double mu_cutoff = 0.0;

  // pfd-verify
  int n_max = 3;

  // chi / lattice-sum
  int sign = 1;
  std::string sum = "sum2";
  double alpha = 0.0, w = 0.0, tau = 0.0, W = 0.0;
  long n_direct = 0;

  // oracle-compare
  int N = 0;
  std::string D_list;
  long window = 0;
  long cross_limit = 0;
  long max_states = 4'000'000;
  double oracle_tol = 0.01;

  // output
  std::string format = "csv";
  std::string output;  // empty: stdout
  bool cache = true;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! --help was given; what() is the help text.
struct HelpRequest : ConfigError {
  using ConfigError::ConfigError;
};

//! Flags override values from --config (TOML, one [subcommand] table).
//! Unknown keys and flags are rejected. Throws ConfigError.
RunConfig parse_config(const std::vector<std::string>& args);

//! Canonical text of the options that affect the result (not output/cache/threads).
std::string canonical(const RunConfig& cfg);

std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t h);

//! Cache directory: $LLDYN_CACHE_DIR, else $XDG_CACHE_HOME/lldyn, else ~/.cache/lldyn.
std::string cache_dir();

//! Runs the command, writing the artifact to cfg.output (or out) and
//! diagnostics plus any error record to err. Returns the exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

//! argv entry point: 0 success, 1 computation failed, 2 bad usage.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lldyn_cli
