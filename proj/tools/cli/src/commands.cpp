#include "pctnpi/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "pctnpi/engine.hpp"
#include "pctnpi/errors.hpp"
#include "pctnpi/oracle.hpp"

namespace pctnpi::cli {
namespace {

constexpr double kVerifyTol = 1e-10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

BathConfig effective_bath(const RunConfig& cfg, const Options& opt) {
  BathConfig b = cfg.bath;
  if (opt.quadrature_tol) b.quadrature_tol = *opt.quadrature_tol;
  return b;
}

void emit_warnings(const RunConfig& cfg, std::ostream& err) {
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
}

std::filesystem::path output_path(const RunConfig& cfg, const Options& opt, const std::string& suffix) {
  std::filesystem::create_directories(opt.output_dir);
  return opt.output_dir / (cfg.name + suffix);
}

std::string run_file_suffix(const RunConfig& cfg, const RunSpec& r) {
  return fmt::format("_{}_L{}.csv", mode_name(r.mode), cfg.memory_of(r));
}

nlohmann::ordered_json sidecar_base(const RunConfig& cfg, const Options& opt, const char* command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = std::filesystem::absolute(cfg.source).string();
  j["created_utc"] = utc_now();
  j["threads"] = opt.threads;
  j["quadrature_tol"] = effective_bath(cfg, opt).quadrature_tol;
  return j;
}

double max_defects(const RdmTrajectory& t, double& herm) {
  double trace = 0.0;
  herm = 0.0;
  for (const auto& rho : t.rdms) {
    trace = std::max(trace, std::abs(rho.trace() - 1.0));
    herm = std::max(herm, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
  }
  return trace;
}

/// Engine trajectory for one run. `tamper` is applied to every eta table the engine sees.
template <class Tamper>
Propagation simulate(const RunConfig& cfg, const RunSpec& r, const BathConfig& bath, unsigned threads,
                     Tamper&& tamper) {
  const int n = cfg.steps, l = cfg.memory_of(r);
  const auto prop = short_time_propagator(cfg.system, bath.dt);
  const auto basis = difference_basis(cfg.system);
  if (bath.endpoint_policy == EndpointPolicy::stationary) {
    const auto eta = tamper(compute_eta(cfg.spectral_density, bath, n));
    return propagate_iterative(build_network({n, l, r.mode}, prop, basis, eta), cfg.rho0, threads);
  }
  // Horizon-dependent table: one untruncated contraction per output time.
  Propagation out;
  out.trajectory.times.push_back(0.0);
  out.trajectory.rdms.push_back(cfg.rho0);
  for (int k = 1; k <= n; ++k) {
    const auto eta = tamper(compute_eta(cfg.spectral_density, bath, k));
    auto res = contract_full(build_network({k, k, r.mode}, prop, basis, eta), cfg.rho0, threads);
    out.trajectory.times.push_back(k * bath.dt);
    out.trajectory.rdms.push_back(std::move(res.rho));
    out.report = std::move(res.report);
  }
  return out;
}

Propagation simulate(const RunConfig& cfg, const RunSpec& r, const BathConfig& bath, unsigned threads) {
  return simulate(cfg, r, bath, threads, [](EtaTable e) { return e; });
}

/// Brute-force trajectory matching simulate(); throws BudgetExceeded when out of reach.
RdmTrajectory oracle(const RunConfig& cfg, const RunSpec& r, const BathConfig& bath) {
  const int n = cfg.steps, l = cfg.memory_of(r);
  const auto prop = short_time_propagator(cfg.system, bath.dt);
  if (l < n) {
    return brute_force_truncated({n, l, r.mode}, cfg.system, prop, compute_eta(cfg.spectral_density, bath, n),
                                 cfg.rho0);
  }
  const auto d2 = static_cast<double>(cfg.system.dim() * cfg.system.dim());
  if (std::pow(d2, n) > static_cast<double>(kPathSumBudget)) {
    throw BudgetExceeded(fmt::format("(D^2)^N = {:.0f} paths exceed the budget of {}", std::pow(d2, n),
                                     kPathSumBudget));
  }
  RdmTrajectory out;
  out.times.push_back(0.0);
  out.rdms.push_back(cfg.rho0);
  const bool stationary = bath.endpoint_policy == EndpointPolicy::stationary;
  const EtaTable shared = stationary ? compute_eta(cfg.spectral_density, bath, n) : EtaTable{};
  for (int k = 1; k <= n; ++k) {
    const EtaTable eta = stationary ? shared : compute_eta(cfg.spectral_density, bath, k);
    out.times.push_back(k * bath.dt);
    out.rdms.push_back(brute_force_rdm({k, 0, r.mode}, cfg.system, prop, eta, cfg.rho0));
  }
  return out;
}

}  // namespace

std::string trajectory_csv(const RdmTrajectory& traj) {
  if (traj.rdms.empty()) return "step,t\n";
  const auto d = static_cast<std::size_t>(traj.rdms.front().rows());
  std::string s = "step,t";
  for (std::size_t a = 1; a <= d; ++a) {
    for (std::size_t b = 1; b <= d; ++b) s += fmt::format(",re_rho_{0}_{1},im_rho_{0}_{1}", a, b);
  }
  s += '\n';
  for (std::size_t k = 0; k < traj.rdms.size(); ++k) {
    s += fmt::format("{},{:.17g}", k, traj.times[k]);
    for (const auto& v : vectorize(traj.rdms[k])) s += fmt::format(",{:.17g},{:.17g}", v.real(), v.imag());
    s += '\n';
  }
  return s;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

int cmd_run(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  emit_warnings(cfg, err);
  const BathConfig bath = effective_bath(cfg, opt);
  for (const auto& r : cfg.runs) {
    const auto t0 = Clock::now();
    const auto res = simulate(cfg, r, bath, opt.threads);
    const double wall = seconds_since(t0);
    const auto path = output_path(cfg, opt, run_file_suffix(cfg, r));
    write_atomic(path, trajectory_csv(res.trajectory));

    auto meta = sidecar_base(cfg, opt, "run");
    meta["mode"] = mode_name(r.mode);
    meta["memory"] = cfg.memory_of(r);
    meta["steps"] = cfg.steps;
    meta["wall_seconds"] = wall;
    meta["peak_elements"] = res.report.peak_elements;
    meta["total_cost"] = res.report.total_cost();
    write_atomic(path.string() + ".meta.json", meta.dump(2) + "\n");

    out << fmt::format("wrote {} ({} steps, mode {}, L = {}, peak {} elements, {:.3f} s)\n", path.string(),
                       cfg.steps, mode_name(r.mode), cfg.memory_of(r), res.report.peak_elements, wall);
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  emit_warnings(cfg, err);
  const BathConfig bath = effective_bath(cfg, opt);
  bool ok = true;
  for (const auto& r : cfg.runs) {
    const auto tamper = [&](EtaTable e) {
      return opt.corrupt_eta && e.steps() >= 1 ? e.with_entry(1, 0, e(1, 0) + cplx(0.05, 0.05)) : e;
    };
    const auto eng = simulate(cfg, r, bath, opt.threads, tamper);
    double herm = 0.0;
    const double trace = max_defects(eng.trajectory, herm);
    bool pass = trace < kVerifyTol && herm < kVerifyTol;
    std::string dev = "oracle skipped";
    try {
      const auto ref = oracle(cfg, r, bath);
      double d = 0.0;
      for (std::size_t k = 0; k < ref.rdms.size(); ++k) {
        d = std::max(d, (eng.trajectory.rdms[k] - ref.rdms[k]).cwiseAbs().maxCoeff());
      }
      dev = fmt::format("max |engine - oracle| = {:.3e}", d);
      pass = pass && d < kVerifyTol;
    } catch (const BudgetExceeded& e) {
      err << fmt::format("warning: {} L = {}: oracle skipped: {}\n", mode_name(r.mode), cfg.memory_of(r), e.what());
    }
    out << fmt::format("{} mode {} L = {} N = {}: {}, trace defect = {:.3e}, hermiticity defect = {:.3e}\n",
                       pass ? "PASS" : "FAIL", mode_name(r.mode), cfg.memory_of(r), cfg.steps, dev, trace, herm);
    ok = ok && pass;
  }
  return ok ? kExitOk : kExitNumerical;
}

std::vector<BenchRow> bench_rows(const RunConfig& cfg, unsigned threads) {
  if (cfg.bath.endpoint_policy != EndpointPolicy::stationary) {
    throw ConfigError("bench needs the stationary endpoint policy");
  }
  const auto prop = short_time_propagator(cfg.system, cfg.bath.dt);
  const auto basis = difference_basis(cfg.system);
  const auto eta = compute_eta(cfg.spectral_density, cfg.bath, cfg.steps);
  const std::uint64_t d2 = basis.fb_dim(), b = basis.B();
  std::vector<BenchRow> rows;
  for (const auto& r : cfg.runs) {
    BenchRow row;
    row.L = cfg.memory_of(r);
    row.N = cfg.steps;
    const auto t0 = Clock::now();
    const auto res = propagate_iterative(build_network({row.N, row.L, r.mode}, prop, basis, eta), cfg.rho0, threads);
    row.wall_seconds = seconds_since(t0);
    row.peak_elements = res.report.peak_elements;
    row.peak_bytes = row.peak_elements * sizeof(cplx);
    row.setup_cost = res.report.setup_cost;
    row.total_cost = res.report.total_cost();
    row.per_edge_cost = res.report.per_edge_cost;
    row.iquapi_elements = 1;
    row.ibspi_elements = 1;
    for (int i = 0; i < row.L; ++i) {
      row.iquapi_elements *= d2;
      row.ibspi_elements *= b;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string s = "L,N,peak_elements,peak_bytes,setup_cost,total_cost,per_edge_cost,iquapi_elements,ibspi_elements\n";
  for (const auto& r : rows) {
    s += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.L, r.N, r.peak_elements, r.peak_bytes, r.setup_cost,
                     r.total_cost, fmt::join(r.per_edge_cost, ";"), r.iquapi_elements, r.ibspi_elements);
  }
  return s;
}

int cmd_bench(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  emit_warnings(cfg, err);
  RunConfig c = cfg;
  c.bath = effective_bath(cfg, opt);
  const auto rows = bench_rows(c, opt.threads);
  const auto path = output_path(c, opt, "_bench.csv");
  write_atomic(path, bench_csv(rows));

  auto meta = sidecar_base(c, opt, "bench");
  auto& wall = meta["wall_seconds"] = nlohmann::ordered_json::object();
  for (const auto& r : rows) wall[std::to_string(r.L)] = r.wall_seconds;
  write_atomic(path.string() + ".meta.json", meta.dump(2) + "\n");

  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].L > rows[i - 1].L && rows[i].wall_seconds < rows[i - 1].wall_seconds) {
      err << fmt::format("warning: wall time not monotone in L ({:.3f} s at L = {} after {:.3f} s at L = {})\n",
                         rows[i].wall_seconds, rows[i].L, rows[i - 1].wall_seconds, rows[i - 1].L);
    }
  }
  for (const auto& r : rows) {
    out << fmt::format("L = {:>2}: peak {:>10} elements ({} bytes), {:>14} multiply-adds, {:.3f} s\n", r.L,
                       r.peak_elements, r.peak_bytes, r.total_cost, r.wall_seconds);
  }
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

}  // namespace pctnpi::cli
