#pragma once

#include <cstdint>
#include <vector>

#include "pctnpi/network.hpp"
#include "pctnpi/system.hpp"

namespace pctnpi {

/// Cost and storage accounting of one contraction sweep.
///
/// per_edge_cost[j-1] is the multiply-add count C_j of edge j: edge 1 owns
/// the influence tensors of point 0 and the join with the initialized first
/// step tensor; edge j >= 2 owns the base tensor of step j and the influence
/// tensors whose earlier point is j-1. setup_cost is the absorption of the
/// initial state into the first step tensor. per_step_storage lists the
/// element count of the running tensor after every join, in schedule order.
/// Only materialized contraction results count toward peak_elements.
struct ContractionReport {
  std::vector<std::uint64_t> per_edge_cost;
  std::uint64_t setup_cost = 0;
  std::uint64_t peak_elements = 0;
  std::vector<std::uint64_t> per_step_storage;

  std::uint64_t total_cost() const noexcept;
};

struct FullResult {
  CMatrix rho;
  ContractionReport report;
};

/// Contracts the whole network against rho0 and returns rho(N dt).
/// Requires an untruncated network (L = N).
FullResult contract_full(const PCTNPINetwork& net, const CMatrix& rho0, unsigned threads = 1);

/// P acting on row-major vec(rho(0)) gives vec(rho(N dt)).
struct GreensFunction {
  CMatrix P;
  ContractionReport report;

  CMatrix apply(const CMatrix& rho0) const;
};

/// Same schedule as contract_full with the s0 leg left open. Requires L = N.
GreensFunction greens_function(const PCTNPINetwork& net, unsigned threads = 1);

struct Propagation {
  RdmTrajectory trajectory;  ///< t = 0, dt, ..., N dt
  ContractionReport report;
};

/// Edge-by-edge sweep with memory L, reading rho out after every edge.
///
/// The running tensor keeps one state leg and up to L - 1 difference legs.
/// Requires the stationary endpoint policy unless L = N.
Propagation propagate_iterative(const PCTNPINetwork& net, const CMatrix& rho0, unsigned threads = 1);

/// Builds the network and propagates. With the classic endpoint policy (only
/// allowed for L = N) each point of the trajectory comes from a fresh
/// full-horizon run, since that table depends on the horizon.
Propagation propagate_iterative(const NetworkConfig& cfg, const SystemSpec& spec, const SpectralDensity& sd,
                                const BathConfig& bath, const CMatrix& rho0, unsigned threads = 1);

/// rho from a running tensor with one state leg s{step} and difference legs
/// only: every difference leg is fixed at Delta s = 0. Throws InternalError
/// for any other leg.
CMatrix readout_intermediate(const LabeledTensor& running, const DifferenceBasis& basis, int step);

/// Closed-form peak element count of a sweep with an initial state.
///   full:      (D^2)^2 B^(M-2) for M = min(L, N) >= 2, D^2 for M = 1
///   classical: D^2 B^(M-1) for M >= 2
std::uint64_t expected_peak_elements(int N, int L, Mode mode, std::uint64_t D, std::uint64_t B);

}  // namespace pctnpi
