#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pctnpi/bath.hpp"
#include "pctnpi/network.hpp"
#include "pctnpi/system.hpp"

namespace pctnpi {

/// Brute-force reference evaluators. They share nothing with the tensor
/// engine except the eta table and the propagator.
struct PathSumConfig {
  int N = 1;
  int L = 0;  ///< memory length; 0 keeps every pair (untruncated)
  Mode mode = Mode::full;
};

/// Largest number of forward-backward paths brute_force_rdm will enumerate, (D^2)^N.
inline constexpr std::uint64_t kPathSumBudget = 65536;
/// Largest transient (D^2)^(L+1) the truncated recursion will touch per step.
inline constexpr std::uint64_t kRecursionBudget = std::uint64_t{1} << 24;

/// rho(N dt) as the literal sum over all forward-backward paths of
///   prod_k U[s_k+, s_{k-1}+] conj(U[s_k-, s_{k-1}-]) rho0[s_0+, s_0-] F[s],
///   F = exp(-sum_k ds_k sum_{k' <= k} (eta_{kk'} s_{k'}+ - conj(eta_{kk'}) s_{k'}-)).
/// Classical mode replaces pairs with k - k' >= 2 by exp(-Re(eta) ds_k ds_{k'}).
/// Pairs further apart than L are dropped when L > 0.
/// Throws BudgetExceeded when (D^2)^N > kPathSumBudget.
CMatrix brute_force_rdm(const PathSumConfig& cfg, const SystemSpec& spec, const Propagator& prop,
                        const EtaTable& eta, const CMatrix& rho0);
CMatrix brute_force_rdm(const PathSumConfig& cfg, const SystemSpec& spec, const SpectralDensity& sd,
                        const BathConfig& bath, const CMatrix& rho0);

/// Memory-truncated augmented-density-tensor recursion (iterative QuAPI).
/// Keeps amplitudes over the last L points, drops couplings further apart
/// than L and reads rho out after every step. Returns t = 0 .. N dt.
/// Throws BudgetExceeded when (D^2)^(L+1) > kRecursionBudget.
RdmTrajectory brute_force_truncated(const PathSumConfig& cfg, const SystemSpec& spec, const Propagator& prop,
                                    const EtaTable& eta, const CMatrix& rho0);
RdmTrajectory brute_force_truncated(const PathSumConfig& cfg, const SystemSpec& spec, const SpectralDensity& sd,
                                    const BathConfig& bath, const CMatrix& rho0);

/// Reference trajectory stored on disk with the configuration that produced it.
struct Fixture {
  std::string config_json;  ///< generating configuration, a JSON object
  RdmTrajectory trajectory;
};

/// Layout: {"config": {...}, "trajectory": [{"t": t, "rho": [[re, im], ...]}, ...]}
/// with rho elements in row-major order.
void write_fixture(const std::filesystem::path& path, const Fixture& fixture);
Fixture read_fixture(const std::filesystem::path& path);

}  // namespace pctnpi
