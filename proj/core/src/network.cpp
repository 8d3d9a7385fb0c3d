#include "pctnpi/network.hpp"

#include <cmath>
#include <numeric>

#include "pctnpi/errors.hpp"

namespace pctnpi {

namespace legs {
std::string s(int j) { return "s" + std::to_string(j); }
std::string ps(int j, int k) { return "ps" + std::to_string(j) + "." + std::to_string(k); }
std::string ds(int k, int j) { return "ds" + std::to_string(k) + "." + std::to_string(j); }
}  // namespace legs

cplx build_influence_factor(cplx eta, const DifferenceBasis& basis, std::size_t fb_earlier,
                            std::size_t delta_later, Mode mode) {
  const double ds_later = basis.delta_values.at(delta_later);
  if (mode == Mode::classical) {
    const double ds_earlier = basis.delta_values[basis.delta_of.at(fb_earlier)];
    return std::exp(-eta.real() * ds_later * ds_earlier);
  }
  const cplx phase = eta * basis.splus.at(fb_earlier) - std::conj(eta) * basis.sminus.at(fb_earlier);
  return std::exp(-ds_later * phase);
}

namespace {

// Diagonal factor I(k, k) of a single state.
cplx self_factor(cplx eta, const DifferenceBasis& basis, std::size_t fb) {
  return build_influence_factor(eta, basis, fb, basis.delta_of[fb], Mode::full);
}

std::vector<std::size_t> identity_projector(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return p;
}

}  // namespace

std::vector<LabeledTensor> build_K_chain(const Propagator& prop, const EtaTable& eta,
                                         const DifferenceBasis& basis, int N) {
  if (N < 1) throw ConfigError("the horizon must be at least one step");
  if (eta.steps() < N) throw ConfigError("eta table is shorter than the horizon");
  const std::size_t d = basis.D;
  if (static_cast<std::size_t>(prop.U.rows()) != d) throw ConfigError("propagator and basis dimensions differ");
  const std::size_t fb = basis.fb_dim();

  std::vector<LabeledTensor> chain;
  chain.reserve(static_cast<std::size_t>(N));
  for (int j = 1; j <= N; ++j) {
    const cplx eta_self = eta(j, j);
    const cplx eta_step = eta(j, j - 1);
    const cplx eta_first = eta(0, 0);
    chain.push_back(LabeledTensor::generate(
        {{legs::s(j - 1), fb}, {legs::s(j), fb}}, [&](std::span<const std::size_t> pos) {
          const std::size_t prev = pos[0], next = pos[1];
          const auto pp = static_cast<Eigen::Index>(prev / d), pm = static_cast<Eigen::Index>(prev % d);
          const auto np = static_cast<Eigen::Index>(next / d), nm = static_cast<Eigen::Index>(next % d);
          cplx v = prop.U(np, pp) * std::conj(prop.U(nm, pm));
          v *= build_influence_factor(eta_step, basis, prev, basis.delta_of[next], Mode::full);
          v *= self_factor(eta_self, basis, next);
          if (j == 1) v *= self_factor(eta_first, basis, prev);
          return v;
        }));
  }
  return chain;
}

LabeledTensor augment(const LabeledTensor& t, std::span<const LegCopy> copies) {
  LabeledTensor out = t;
  for (const auto& c : copies) out = delta_join(out, c.source, c.target, c.projector);
  return out;
}

PCTNPINetwork::PCTNPINetwork(NetworkConfig cfg, DifferenceBasis basis, EndpointPolicy policy, double dt,
                             std::vector<LabeledTensor> base,
                             std::map<std::pair<int, int>, LabeledTensor> influence)
    : cfg_(cfg), basis_(std::move(basis)), policy_(policy), dt_(dt), base_(std::move(base)), influence_(std::move(influence)) {
  if (base_.size() != static_cast<std::size_t>(cfg_.N)) throw InternalError("network needs one base tensor per step");
}

const LabeledTensor& PCTNPINetwork::base(int j) const {
  if (j < 1 || j > cfg_.N) throw IndexError("base tensor " + std::to_string(j) + " outside 1.." + std::to_string(cfg_.N));
  return base_[static_cast<std::size_t>(j - 1)];
}

const LabeledTensor& PCTNPINetwork::influence(int j, int k) const {
  auto it = influence_.find({j, k});
  if (it == influence_.end()) {
    throw IndexError("no influence tensor for (" + std::to_string(j) + ", " + std::to_string(k) + ")");
  }
  return it->second;
}

bool PCTNPINetwork::has_influence(int j, int k) const noexcept { return influence_.count({j, k}) != 0; }

std::size_t expected_tensor_count(int N, int L) {
  if (N == 1) return 1;
  std::size_t n = static_cast<std::size_t>(N);
  for (int a = 2; a <= std::min(L, N); ++a) n += static_cast<std::size_t>(N - a + 1);
  return n;
}

PCTNPINetwork build_network(const NetworkConfig& cfg_in, const Propagator& prop, const DifferenceBasis& basis,
                            const EtaTable& eta) {
  NetworkConfig cfg = cfg_in;
  if (cfg.N < 1) throw ConfigError("N must be at least 1");
  if (cfg.N == 1) cfg.L = 1;
  if (cfg.L < 1 || cfg.L > cfg.N) {
    throw ConfigError("memory length L = " + std::to_string(cfg.L) + " must satisfy 1 <= L <= N = " +
                      std::to_string(cfg.N));
  }
  if (std::abs(eta.dt() - prop.dt) > 1e-12 * prop.dt) throw ConfigError("eta table and propagator use different time steps");

  const int N = cfg.N, L = cfg.L;
  const std::size_t fb = basis.fb_dim(), B = basis.B();
  const bool classical = cfg.mode == Mode::classical;
  const std::size_t pdim = classical ? B : fb;
  const auto ident_fb = identity_projector(fb);
  const auto ident_b = identity_projector(B);
  const auto& pass_projector = classical ? basis.delta_of : ident_fb;

  auto chain = build_K_chain(prop, eta, basis, N);
  std::vector<LabeledTensor> base;
  base.reserve(chain.size());
  for (int j = 1; j <= N; ++j) {
    std::vector<LegCopy> copies;
    if (j >= 2 && L >= 2) copies.push_back({legs::s(j), {legs::ds(j, j - 2), B}, basis.delta_of});
    if (j + 1 <= N && L >= 2) copies.push_back({legs::s(j - 1), {legs::ps(j - 1, j + 1), pdim}, pass_projector});
    base.push_back(augment(chain[static_cast<std::size_t>(j - 1)], copies));
  }

  std::map<std::pair<int, int>, LabeledTensor> influence;
  for (int j = 0; j <= N; ++j) {
    for (int k = j + 2; k <= N && k - j <= L; ++k) {
      const cplx e = eta(k, j);
      LabeledTensor node = LabeledTensor::generate(
          {{legs::ps(j, k), pdim}, {legs::ds(k, j), B}}, [&](std::span<const std::size_t> pos) -> cplx {
            if (classical) {
              return std::exp(-e.real() * basis.delta_values[pos[1]] * basis.delta_values[pos[0]]);
            }
            return build_influence_factor(e, basis, pos[0], pos[1], Mode::full);
          });
      std::vector<LegCopy> copies;
      if (j >= 1 && k - j + 1 <= L) copies.push_back({legs::ds(k, j), {legs::ds(k, j - 1), B}, ident_b});
      if (k + 1 <= N && k + 1 - j <= L) {
        copies.push_back({legs::ps(j, k), {legs::ps(j, k + 1), pdim}, classical ? ident_b : ident_fb});
      }
      influence.emplace(std::make_pair(j, k), augment(node, copies));
    }
  }
  return PCTNPINetwork(cfg, basis, eta.policy(), prop.dt, std::move(base), std::move(influence));
}

PCTNPINetwork build_network(const NetworkConfig& cfg, const SystemSpec& spec, const SpectralDensity& sd,
                            const BathConfig& bath) {
  if (cfg.N < 1) throw ConfigError("N must be at least 1");
  const auto prop = short_time_propagator(spec, bath.dt);
  const auto eta = compute_eta(sd, bath, cfg.N);
  return build_network(cfg, prop, difference_basis(spec), eta);
}

}  // namespace pctnpi
