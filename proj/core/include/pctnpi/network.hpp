#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pctnpi/bath.hpp"
#include "pctnpi/system.hpp"
#include "pctnpi/tensor.hpp"

namespace pctnpi {

/// full keeps the complete influence functional. classical drops Im eta for
/// pairs at least two steps apart, so those couplings only see Delta s.
enum class Mode { full, classical };

struct NetworkConfig {
  int N = 1;  ///< horizon in steps
  int L = 1;  ///< memory length; L = N is the untruncated network
  Mode mode = Mode::full;
};

/// Pairwise influence factor between an earlier forward-backward state and a
/// later difference value:
///   full:      exp(-ds_later (eta s+_earlier - conj(eta) s-_earlier))
///   classical: exp(-Re(eta) ds_later ds_earlier)
cplx build_influence_factor(cplx eta, const DifferenceBasis& basis, std::size_t fb_earlier,
                            std::size_t delta_later, Mode mode);

/// Bare path-step tensors K_j, j = 1..N, with legs s{j-1}, s{j} (dim D^2).
/// K_j = U[s_j+, s_{j-1}+] conj(U[s_j-, s_{j-1}-]) I(j-1, j) I(j, j); K_1 also carries I(0, 0).
std::vector<LabeledTensor> build_K_chain(const Propagator& prop, const EtaTable& eta,
                                         const DifferenceBasis& basis, int N);

/// A pass-through output leg: `target` is attached as a copy (identity
/// projector) or a projection (many-to-one projector) of leg `source`.
struct LegCopy {
  std::string source;
  IndexLabel target;
  std::vector<std::size_t> projector;
};

LabeledTensor augment(const LabeledTensor& t, std::span<const LegCopy> copies);

/// Leg names shared by the builder and the contraction engine.
///
///   s{j}      forward-backward state at point j (dim D^2)
///   ps{j}.{k} copy of point j's state entering the influence node (j, k)
///             (dim D^2 in full mode, B in classical mode)
///   ds{k}.{j} difference value of point k entering the influence node (j, k) (dim B)
namespace legs {
std::string s(int j);
std::string ps(int j, int k);
std::string ds(int k, int j);
}  // namespace legs

/// The triangular PCTNPI network for horizon N and memory L.
///
/// base(j), j = 1..N, is the difference-projected step tensor on legs
/// s{j-1}, s{j}; influence(j, k) with 2 <= k - j <= L couples point j to
/// point k. Every tensor already carries its pass-through legs.
class PCTNPINetwork {
 public:
  PCTNPINetwork(NetworkConfig cfg, DifferenceBasis basis, EndpointPolicy policy, double dt,
                std::vector<LabeledTensor> base,
                std::map<std::pair<int, int>, LabeledTensor> influence);

  const NetworkConfig& config() const noexcept { return cfg_; }
  const DifferenceBasis& basis() const noexcept { return basis_; }
  EndpointPolicy endpoint_policy() const noexcept { return policy_; }
  double dt() const noexcept { return dt_; }

  /// Memory depth actually present, min(L, N).
  int depth() const noexcept { return cfg_.L < cfg_.N ? cfg_.L : cfg_.N; }

  const LabeledTensor& base(int j) const;
  const LabeledTensor& influence(int j, int k) const;
  bool has_influence(int j, int k) const noexcept;

  std::size_t tensor_count() const noexcept { return base_.size() + influence_.size(); }

 private:
  NetworkConfig cfg_;
  DifferenceBasis basis_;
  EndpointPolicy policy_;
  double dt_;
  std::vector<LabeledTensor> base_;
  std::map<std::pair<int, int>, LabeledTensor> influence_;
};

/// Builds the network from a propagator and an eta table covering at least N steps.
/// Throws ConfigError unless 1 <= L <= N (L is ignored for N = 1).
PCTNPINetwork build_network(const NetworkConfig& cfg, const Propagator& prop, const DifferenceBasis& basis,
                            const EtaTable& eta);

/// Convenience overload computing the propagator and an N-step eta table.
PCTNPINetwork build_network(const NetworkConfig& cfg, const SystemSpec& spec, const SpectralDensity& sd,
                            const BathConfig& bath);

/// N + sum_{a=2..L} (N - a + 1).
std::size_t expected_tensor_count(int N, int L);

}  // namespace pctnpi
