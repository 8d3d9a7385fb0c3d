#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pctnpi/cli/config.hpp"

namespace pctnpi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

struct Options {
  std::filesystem::path output_dir = ".";
  unsigned threads = 1;
  std::optional<double> quadrature_tol;
  bool corrupt_eta = false;  ///< verify only: perturb eta(1, 0) by 0.05 + 0.05i on the engine side
};

/// Writes `<name>_<mode>_L<L>.csv` per run plus a `.meta.json` sidecar.
int cmd_run(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err);
/// Compares every run with the matching brute-force oracle.
int cmd_verify(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err);
/// Writes `<name>_bench.csv` with one row per memory length.
int cmd_bench(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err);

struct BenchRow {
  int L = 0;
  int N = 0;
  std::uint64_t peak_elements = 0;
  std::uint64_t peak_bytes = 0;
  std::uint64_t setup_cost = 0;
  std::uint64_t total_cost = 0;
  std::vector<std::uint64_t> per_edge_cost;
  std::uint64_t iquapi_elements = 0;  ///< (D^2)^L
  std::uint64_t ibspi_elements = 0;   ///< B^L
  double wall_seconds = 0.0;
};

std::vector<BenchRow> bench_rows(const RunConfig& cfg, unsigned threads);
/// Wall time is left out so the CSV is reproducible.
std::string bench_csv(const std::vector<BenchRow>& rows);

/// step, t, then Re/Im of every rho element in row-major (forward-backward) order.
std::string trajectory_csv(const RdmTrajectory& traj);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// Entry point of the pctnpi executable.
int run_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace pctnpi::cli
