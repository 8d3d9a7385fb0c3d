#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pctnpi/cli/commands.hpp"
#include "pctnpi/errors.hpp"

using namespace pctnpi;
using namespace pctnpi::cli;
namespace fs = std::filesystem;

namespace {

const char* kTlsConfig = R"(system:
  kind: tls
  epsilon: 0.0
  omega: 1.0
bath:
  spectral_density: ohmic_exponential
  xi: 2.0
  omega_c: 1.0
  beta: 1.0
discretization:
  dt: 0.125
  steps: 6
  memory: [2, full]
  mode: [full, classical]
initial_state: site 1
output:
  name: tls
)";

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("pctnpi_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

int invoke(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "pctnpi");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream o, e;
  const int code = run_main(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

}  // namespace

TEST(Config, ParsesRunsAsModeByMemoryProduct) {
  const auto cfg = parse_config(kTlsConfig);
  ASSERT_EQ(cfg.runs.size(), 4u);
  EXPECT_EQ(cfg.memory_of(cfg.runs[0]), 2);
  EXPECT_EQ(cfg.memory_of(cfg.runs[1]), 6);
  EXPECT_EQ(cfg.runs[2].mode, Mode::classical);
  EXPECT_EQ(cfg.system.dim(), 2u);
  EXPECT_EQ(cfg.bath.dt, 0.125);
  EXPECT_EQ(cfg.rho0(0, 0), cplx(1.0));
  EXPECT_EQ(cfg.name, "tls");
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse_config(replace(kTlsConfig, "xi: 2.0", "xi: -2.0"), "bad.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.yaml:7:"), std::string::npos) << e.what();
  }
  try {
    parse_config(replace(kTlsConfig, "  dt: 0.125", "  dt: 0.125\n  stepz: 3"), "bad.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.yaml:12:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("stepz"), std::string::npos);
  }
  EXPECT_THROW(parse_config(replace(kTlsConfig, "memory: [2, full]", "memory: 9")), ConfigError);
  EXPECT_THROW(parse_config(replace(kTlsConfig, "site 1", "site 3")), ConfigError);
  EXPECT_THROW(parse_config(replace(kTlsConfig, "kind: tls", "kind: qutrit")), ConfigError);
  EXPECT_THROW(parse_config("system: [unclosed"), ConfigError);
}

TEST(Config, InitialStateTraceIsNormalizedOrRejected) {
  const auto near = parse_config(replace(kTlsConfig, "site 1", "[[0.6000002, 0], [0, 0.4]]"));
  EXPECT_NEAR(near.rho0.trace().real(), 1.0, 1e-15);
  ASSERT_EQ(near.warnings.size(), 1u);
  const auto cplx_entry = parse_config(replace(kTlsConfig, "site 1", "[[0.5, [0.1, 0.2]], [[0.1, -0.2], 0.5]]"));
  EXPECT_EQ(cplx_entry.rho0(0, 1), cplx(0.1, 0.2));
  EXPECT_TRUE(cplx_entry.warnings.empty());
  EXPECT_THROW(parse_config(replace(kTlsConfig, "site 1", "[[0.7, 0], [0, 0.4]]")), ConfigError);
  EXPECT_THROW(parse_config(replace(kTlsConfig, "site 1", "[[0.5, 0.1], [0.2, 0.5]]")), ConfigError);
}

TEST(Run, ZeroCouplingFollowsRabi) {
  const auto dir = scratch("rabi");
  auto body = replace(kTlsConfig, "xi: 2.0", "xi: 0.0");
  body = replace(body, "steps: 6", "steps: 100");
  body = replace(body, "memory: [2, full]", "memory: 3");
  body = replace(body, "mode: [full, classical]", "mode: full");
  const auto cfg = write_config(dir, "zero.yaml", body);
  ASSERT_EQ(invoke({"run", "--output-dir", (dir / "out").string(), cfg.string()}), kExitOk);
  std::istringstream csv(slurp(dir / "out" / "tls_full_L3.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("step,t,re_rho_1_1,im_rho_1_1,re_rho_1_2", 0), 0u);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::stringstream ls(line);
    std::string step, t, re;
    std::getline(ls, step, ',');
    std::getline(ls, t, ',');
    std::getline(ls, re, ',');
    const double c = std::cos(std::stod(t));
    EXPECT_NEAR(std::stod(re), c * c, 1e-12) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 101);
  EXPECT_TRUE(fs::exists(dir / "out" / "tls_full_L3.csv.meta.json"));
}

TEST(Run, OutputIsByteReproducibleAcrossRunsAndThreads) {
  const auto dir = scratch("repro");
  const auto cfg = write_config(dir, "tls.yaml", kTlsConfig);
  ASSERT_EQ(invoke({"run", "--output-dir", (dir / "a").string(), cfg.string()}), kExitOk);
  ASSERT_EQ(invoke({"run", "--output-dir", (dir / "b").string(), "--threads", "3", cfg.string()}), kExitOk);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    if (e.path().extension() != ".csv") continue;
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
    ++files;
  }
  EXPECT_EQ(files, 4);
  for (const char* f : {"tls_full_L2.csv", "tls_full_L6.csv", "tls_classical_L2.csv", "tls_classical_L6.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  }
}

TEST(Run, WireWritesOneFilePerRun) {
  const auto dir = scratch("wire");
  const std::string body = R"(system:
  kind: wire
  site_energies: [1.0, 0.0, 0.0, 0.0]
  coupling: 0.025
bath:
  spectral_density: ohmic_exponential
  xi: 0.12
  omega_c: 4.0
  beta: 0.1
discretization:
  dt: 0.25
  steps: 10
  runs:
    - {memory: 6, mode: full}
    - {memory: 4, mode: classical}
initial_state: site 1
output:
  name: wire
)";
  const auto cfg = write_config(dir, "wire.yaml", body);
  ASSERT_EQ(invoke({"run", "--output-dir", dir.string(), cfg.string()}), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "wire_full_L6.csv"));
  EXPECT_TRUE(fs::exists(dir / "wire_classical_L4.csv"));
  std::string header;
  std::getline(std::istringstream(slurp(dir / "wire_full_L6.csv")) >> std::ws, header);
  EXPECT_NE(header.find("im_rho_4_4"), std::string::npos);
}

TEST(Verify, PassesAndCatchesCorruptedEta) {
  const auto dir = scratch("verify");
  const auto cfg = write_config(dir, "tls.yaml", kTlsConfig);
  std::string out;
  EXPECT_EQ(invoke({"verify", cfg.string()}, &out), kExitOk) << out;
  EXPECT_EQ(out.find("FAIL"), std::string::npos);
  EXPECT_NE(invoke({"verify", "--corrupt-eta", cfg.string()}, &out), kExitOk);
  EXPECT_NE(out.find("FAIL"), std::string::npos);
}

TEST(Verify, SkipsOracleBeyondBudget) {
  const auto dir = scratch("budget");
  auto body = replace(kTlsConfig, "steps: 6", "steps: 10");
  body = replace(body, "memory: [2, full]", "memory: full");
  const auto cfg = write_config(dir, "big.yaml", body);
  std::string out, err;
  EXPECT_EQ(invoke({"verify", cfg.string()}, &out, &err), kExitOk);
  EXPECT_NE(err.find("oracle skipped"), std::string::npos);
}

TEST(Bench, PeakColumnFollowsThreeToTheL) {
  auto cfg = parse_config(replace(replace(kTlsConfig, "steps: 6", "steps: 10"), "memory: [2, full]",
                                  "memory: [4, 5, 6, 7, 8, 9, 10]"));
  cfg.runs.resize(7);
  const auto rows = bench_rows(cfg, 1);
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::uint64_t p = 16;
    for (int k = 2; k < rows[i].L; ++k) p *= 3;
    EXPECT_EQ(rows[i].peak_elements, p);
    EXPECT_EQ(rows[i].peak_bytes, 16 * p);
    if (i) EXPECT_EQ(rows[i].peak_elements, 3 * rows[i - 1].peak_elements);
    if (i) EXPECT_NEAR(std::log(double(rows[i].peak_elements)) - std::log(double(rows[i - 1].peak_elements)),
                       std::log(3.0), 1e-14);
    if (i) EXPECT_EQ(rows[i].iquapi_elements, 4 * rows[i - 1].iquapi_elements);
    if (i) EXPECT_EQ(rows[i].ibspi_elements, 3 * rows[i - 1].ibspi_elements);
  }
  const auto csv = bench_csv(rows);
  EXPECT_EQ(csv.rfind("L,N,peak_elements,peak_bytes,setup_cost,total_cost,per_edge_cost,iquapi_elements,ibspi_elements\n", 0), 0u);
  EXPECT_NE(csv.find("\n4,10,144,2304,"), std::string::npos) << csv;
}

TEST(Bench, CommandWritesCsvAndSidecar) {
  const auto dir = scratch("bench");
  const auto cfg = write_config(dir, "b.yaml", replace(kTlsConfig, "mode: [full, classical]", "mode: full"));
  ASSERT_EQ(invoke({"bench", "--output-dir", dir.string(), cfg.string()}), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "tls_bench.csv"));
  EXPECT_NE(slurp(dir / "tls_bench.csv.meta.json").find("wall_seconds"), std::string::npos);
}

TEST(ExitCodes, ValidationAndUsage) {
  const auto dir = scratch("exit");
  std::string out, err;
  EXPECT_EQ(invoke({"run", (dir / "missing.yaml").string()}, &out, &err), kExitValidation);
  const auto bad = write_config(dir, "bad.yaml", replace(kTlsConfig, "beta: 1.0", "beta: 0"));
  EXPECT_EQ(invoke({"run", bad.string()}, &out, &err), kExitValidation);
  EXPECT_NE(err.find("bad.yaml:9:"), std::string::npos) << err;
  EXPECT_EQ(invoke({"frobnicate"}, &out, &err), kExitValidation);
  EXPECT_EQ(invoke({"--help"}, &out, &err), kExitOk);
  const auto cfg = write_config(dir, "ok.yaml", kTlsConfig);
  EXPECT_EQ(invoke({"run", "--quadrature-tol", "-1", cfg.string()}, &out, &err), kExitValidation);
}

TEST(ExitCodes, NumericalFailureIsTwo) {
  const auto dir = scratch("numerical");
  // Tabulated J with J(0) != 0 makes J / omega non-integrable.
  std::ofstream(dir / "j.txt") << "# omega J\n0 1\n1 1\n2 0\n";
  auto body = replace(kTlsConfig, "spectral_density: ohmic_exponential\n  xi: 2.0\n  omega_c: 1.0",
                      "spectral_density: tabulated\n  table: j.txt");
  const auto cfg = write_config(dir, "tab.yaml", body);
  std::string out, err;
  EXPECT_EQ(invoke({"run", "--output-dir", dir.string(), cfg.string()}, &out, &err), kExitNumerical) << err;
}
