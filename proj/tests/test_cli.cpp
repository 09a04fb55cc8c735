#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/cli.hpp"
#include "json.hpp"

using namespace lldyn_cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("lldyn_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  std::vector<char*> argv{const_cast<char*>("lldyn")};
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// last CSV row split on commas
std::vector<double> last_row(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') last = line;
  std::vector<double> v;
  std::istringstream row(last);
  for (std::string f; std::getline(row, f, ',');) v.push_back(std::stod(f));
  return v;
}

const std::string kGauss = "family:gaussian,A=0.01,sigma=1";

}  // namespace

TEST_CASE("parse_config") {
  SUBCASE("echo") {
    const auto c = parse_config({"correlator", "--kind", "field", "--density", kGauss, "--c", "1", "--x", "0", "--t", "0"});
    CHECK(c.command == "correlator");
    CHECK(c.kind == "field");
    CHECK(c.density == kGauss);
    CHECK(c.c == 1.0);
    CHECK(c.x == "0");
    CHECK(c.t == "0");
    CHECK(c.cache);
  }
  SUBCASE("missing --c names the flag") {
    try {
      parse_config({"correlator", "--density", kGauss, "--x", "0", "--t", "0"});
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("--c") != std::string::npos);
    }
  }
  SUBCASE("flags override the file") {
    TempDir d;
    const auto f = d.path / "run.toml";
    std::ofstream(f) << "[correlator]\ndensity = \"" << kGauss << "\"\nc = 1\nx = \"0\"\nt = \"0\"\n";
    CHECK(parse_config({"--config", f.string(), "correlator"}).c == 1.0);
    CHECK(parse_config({"correlator", "--config", f.string(), "--c", "2"}).c == 2.0);
  }
  SUBCASE("rejections") {
    TempDir d;
    const auto f = d.path / "bad.toml";
    std::ofstream(f) << "[correlator]\nc = 1\nunknown_key = 3\n";
    CHECK_THROWS_AS(parse_config({"--config", f.string(), "correlator"}), ConfigError);
    CHECK_THROWS_AS(parse_config({"correlator", "--bogus", "1"}), ConfigError);
    CHECK_THROWS_AS(parse_config({"nosuchcommand"}), ConfigError);
    // the density kind without a density source
    CHECK_THROWS_AS(parse_config({"correlator", "--kind", "density", "--c", "1", "--x", "0", "--t", "0"}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({"correlator", "--density", kGauss, "--c", "1", "--x", "0", "--t", "0", "--tol",
                                  "-1"}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({"correlator", "--density", kGauss, "--c", "1", "--x", "1:0:5", "--t", "0"}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({"correlator", "--density", "/no/such/file.csv", "--c", "1", "--x", "0", "--t", "0"}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config({"bethe-solve", "--L", "10", "--c", "1"}), ConfigError);
    CHECK_THROWS_AS(parse_config({"correlator", "--density", kGauss, "--c", "1", "--x", "0", "--t", "0",
                                  "--mu-cutoff", "3"}),
                    ConfigError);
  }
  SUBCASE("grids") {
    const auto g = parse_grid("-1:1:5");
    CHECK(g.min == -1.0);
    CHECK(g.max == 1.0);
    CHECK(g.n == 5);
    CHECK(parse_grid("0.25").n == 1);
    CHECK_THROWS_AS(parse_grid("0:1"), ConfigError);
    CHECK_THROWS_AS(parse_grid("0:1:2.5"), ConfigError);
    CHECK_THROWS_AS(parse_grid("a"), ConfigError);
  }
}

TEST_CASE("canonical config and hash") {
  const auto a = parse_config({"correlator", "--density", kGauss, "--c", "1", "--x", "0:1:3", "--t", "0.5"});
  const auto b = parse_config({"correlator", "--density", kGauss, "--c", "1.0", "--x", "0.0:1:3", "--t", "0.50",
                               "--threads", "3", "--no-cache"});
  CHECK(canonical(a) == canonical(b));
  const auto d = parse_config({"correlator", "--density", kGauss, "--c", "1", "--x", "0:1:3", "--t", "0.5", "--tol",
                               "1e-7"});
  CHECK(canonical(a) != canonical(d));
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(hex64(0xabcull) == "0000000000000abc");
}

TEST_CASE("run") {
  TempDir cache;
  ::setenv("LLDYN_CACHE_DIR", cache.path.c_str(), 1);

  SUBCASE("field correlator at the origin equals D") {
    const auto r = invoke({"correlator", "--kind", "field", "--density", kGauss, "--c", "1", "--x", "0", "--t", "0"});
    REQUIRE(r.code == 0);
    const auto row = last_row(r.out);
    REQUIRE(row.size() == 5);
    const double D = 0.01 * std::sqrt(M_PI);  // A e^{-lambda^2 / sigma^2}
    CHECK(std::abs(row[2] - D) <= 1e-8);
    CHECK(std::abs(row[3]) <= 1e-8);
    CHECK(r.out.find("# input_hash: ") != std::string::npos);
    CHECK(r.out.find("# tol: 1e-08") != std::string::npos);
  }
  SUBCASE("determinism and the cache") {
    TempDir out;
    const std::vector<std::string> base{"correlator", "--kind", "density", "--density", "family:gaussian,A=0.05,sigma=1",
                                        "--c",        "1",      "--x",     "-1:1:3",    "--t",
                                        "0.3",        "--tol",  "1e-6"};
    auto with = [&](std::vector<std::string> extra) {
      auto a = base;
      a.insert(a.end(), extra.begin(), extra.end());
      return a;
    };
    const auto f1 = (out.path / "a.csv").string(), f2 = (out.path / "b.csv").string(),
               f3 = (out.path / "c.csv").string();
    const auto r1 = invoke(with({"-o", f1, "--no-cache"}));
    const auto r2 = invoke(with({"-o", f2, "--threads", "2"}));
    const auto r3 = invoke(with({"-o", f3}));
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    REQUIRE(r3.code == 0);
    CHECK(slurp(f1) == slurp(f2));
    CHECK(slurp(f1) == slurp(f3));
    CHECK(r1.err.find("\"cache\":\"off\"") != std::string::npos);
    CHECK(r2.err.find("\"cache\":\"miss\"") != std::string::npos);
    CHECK(r3.err.find("\"cache\":\"hit\"") != std::string::npos);
    const auto meta = nlohmann::json::parse(r3.err);
    CHECK(meta.at("seconds").get<double>() >= 0.0);
    int entries = 0;
    for (const auto& e : fs::directory_iterator(cache.path)) entries += e.path().extension() == ".csv";
    CHECK(entries == 1);
  }
  SUBCASE("json output") {
    const auto r = invoke({"correlator", "--density", kGauss, "--c", "1", "--x", "0:1:2", "--t", "0.5", "--format",
                           "json", "--no-cache"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("samples").size() == 2);
    CHECK(j.at("meta").at("command") == "correlator");
    CHECK(j.at("samples")[1].at("x").get<double>() == 1.0);
  }
  SUBCASE("pfd-verify passes on defaults") {
    const auto r = invoke({"pfd-verify"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("all_pass").get<bool>());
    CHECK(j.at("checks").size() > 10);
  }
  SUBCASE("bethe-solve output feeds ff") {
    TempDir out;
    const auto ket = (out.path / "ket.json").string(), bra = (out.path / "bra.json").string();
    REQUIRE(invoke({"bethe-solve", "--L", "20", "--c", "1", "--numbers", "-2,0,2", "-o", ket}).code == 0);
    REQUIRE(invoke({"bethe-solve", "--L", "20", "--c", "1", "--numbers", "-1,1", "-o", bra}).code == 0);
    const auto from_files = invoke({"ff", "--bra", bra, "--ket", ket});
    const auto from_numbers = invoke({"ff", "--bra", "-1,1", "--ket", "-2,0,2", "--L", "20", "--c", "1"});
    REQUIRE(from_files.code == 0);
    REQUIRE(from_numbers.code == 0);
    const auto a = nlohmann::json::parse(from_files.out), b = nlohmann::json::parse(from_numbers.out);
    CHECK(a.at("log_magnitude") == b.at("log_magnitude"));
    CHECK(a.at("modulus2").get<double>() == doctest::Approx(std::exp(2 * a.at("log_magnitude").get<double>())));
  }
  SUBCASE("chi, lattice-sum, density, spectral, oracle-compare") {
    auto chi = invoke({"chi", "--x", "-1:1:3"});
    REQUIRE(chi.code == 0);
    CHECK(nlohmann::json::parse(chi.out).at("values").size() == 3);

    auto ls = invoke({"lattice-sum", "--alpha", "0.3", "--w", "0.2", "--tau", "0.5", "--L", "40", "--n-direct", "20000"});
    REQUIRE(ls.code == 0);
    const auto lj = nlohmann::json::parse(ls.out);
    const double mod = std::hypot(lj.at("closed")[0].get<double>(), lj.at("closed")[1].get<double>());
    CHECK(lj.at("abs_difference").get<double>() < 1e-2 * mod);

    auto de = invoke({"density", "--density", "family:box,h=0.1,a=1", "--c", "1", "--lambda", "-2:2:5"});
    REQUIRE(de.code == 0);
    CHECK(de.out.find("lambda,rho,rho_h\n") != std::string::npos);
    CHECK(last_row(de.out)[1] == 0.0);

    auto sp = invoke({"spectral", "--density", "family:gaussian,A=0.05,sigma=1", "--c", "1", "--x", "-4:4:4", "--t",
                      "0.25:1:3"});
    REQUIRE(sp.code == 0);
    CHECK(sp.out.find("k,omega,re,im\n") != std::string::npos);
    CHECK(last_row(sp.out).size() == 4);

    auto oc = invoke({"oracle-compare", "--density", "family:gaussian,A=1,sigma=1", "--c", "1", "--N", "2", "--D",
                      "0.1,0.05", "--x", "0.5", "--t", "0.2"});
    REQUIRE(oc.code == 0);
    CHECK(oc.out.find("D,N,L,x,t,abs_formula,abs_oracle,rel_err") != std::string::npos);
    const auto row = last_row(oc.out);
    CHECK(row[0] == 0.05);
    CHECK(row[2] == 40.0);
    CHECK(row[7] > 0.0);
    CHECK(row[7] < 0.1);
  }
  SUBCASE("errors produce a record and a nonzero exit") {
    const auto r = invoke({"correlator", "--kind", "density", "--density", kGauss, "--c", "1", "--x", "0", "--t", "0"});
    CHECK(r.code == 1);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j.at("error").at("status") == "domain");
    CHECK(r.out.empty());
    const auto u = invoke({"correlator", "--density", kGauss, "--x", "0", "--t", "0"});
    CHECK(u.code == 2);
    CHECK(nlohmann::json::parse(u.err).at("error").at("message").get<std::string>().find("--c") != std::string::npos);
    const auto w = invoke({"ff", "--bra", "0,0", "--ket", "-2,0,2", "--L", "20", "--c", "1"});
    CHECK(w.code == 1);
    CHECK(nlohmann::json::parse(w.err).at("error").at("status") == "invalid_argument");
  }
  ::unsetenv("LLDYN_CACHE_DIR");
}

TEST_CASE("installed binary") {
  TempDir d;
  const std::string bin = LLDYN_CLI_PATH;
  const auto out = (d.path / "o.json").string();
  const std::string env = "LLDYN_CACHE_DIR=" + (d.path / "cache").string() + " ";
  CHECK(std::system((env + bin + " pfd-verify -o " + out + " 2>/dev/null").c_str()) == 0);
  CHECK(nlohmann::json::parse(slurp(out)).at("all_pass").get<bool>());
  const int status = std::system((env + bin + " correlator --x 0 --t 0 2>/dev/null").c_str());
  CHECK(WEXITSTATUS(status) == 2);
  CHECK(std::system((bin + " --help >/dev/null").c_str()) == 0);
}
