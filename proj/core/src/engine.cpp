#include "pctnpi/engine.hpp"

#include <numeric>
#include <optional>
#include <string>

#include "pctnpi/errors.hpp"

namespace pctnpi {

namespace {

LabeledTensor state_tensor(const CMatrix& rho, const DifferenceBasis& basis) {
  if (static_cast<std::size_t>(rho.rows()) != basis.D || static_cast<std::size_t>(rho.cols()) != basis.D) {
    throw ConfigError("initial density matrix must be " + std::to_string(basis.D) + "x" + std::to_string(basis.D));
  }
  return LabeledTensor({{legs::s(0), basis.fb_dim()}}, vectorize(rho));
}

// The canonical sweep: edge 1 top-down along the influence column of point 0,
// then for each later edge j the step tensor followed by the column of point j-1.
class Sweep {
 public:
  Sweep(const PCTNPINetwork& net, unsigned threads) : net_(net), threads_(threads) {}

  void first_edge(const std::optional<LabeledTensor>& rho) {
    const int m = net_.depth();
    LabeledTensor step = net_.base(1);
    if (rho) {
      step = contract(step, *rho, counter_, threads_);
      report_.setup_cost = counter_.multiply_adds;
    }
    const std::uint64_t before = counter_.multiply_adds;
    if (m >= 2) {
      running_ = net_.influence(0, m);
      for (int k = m - 1; k >= 2; --k) join(net_.influence(0, k));
      join(step);
    } else {
      running_ = std::move(step);
    }
    report_.per_edge_cost.push_back(counter_.multiply_adds - before);
  }

  void edge(int j) {
    const std::uint64_t before = counter_.multiply_adds;
    join(net_.base(j));
    const int last = std::min(j - 1 + net_.depth(), net_.config().N);
    for (int k = j + 1; k <= last; ++k) join(net_.influence(j - 1, k));
    report_.per_edge_cost.push_back(counter_.multiply_adds - before);
  }

  const LabeledTensor& running() const noexcept { return running_; }

  ContractionReport finish() {
    report_.peak_elements = counter_.peak_elements;
    return std::move(report_);
  }

 private:
  void join(const LabeledTensor& t) {
    running_ = contract(running_, t, counter_, threads_);
    report_.per_step_storage.push_back(running_.size());
  }

  const PCTNPINetwork& net_;
  unsigned threads_;
  OpCounter counter_;
  ContractionReport report_;
  LabeledTensor running_;
};

void require_untruncated(const PCTNPINetwork& net, const char* what) {
  if (net.depth() != net.config().N) {
    throw ConfigError(std::string(what) + " needs an untruncated network (L = N); use propagate_iterative for L < N");
  }
}

void check_trajectory_network(const PCTNPINetwork& net) {
  if (net.endpoint_policy() == EndpointPolicy::classic) {
    if (net.depth() < net.config().N) {
      throw ConfigError("the classic endpoint policy makes eta horizon dependent and cannot be iterated with L < N");
    }
    throw ConfigError("intermediate readout needs the stationary endpoint policy");
  }
}

}  // namespace

std::uint64_t ContractionReport::total_cost() const noexcept {
  return std::accumulate(per_edge_cost.begin(), per_edge_cost.end(), setup_cost);
}

FullResult contract_full(const PCTNPINetwork& net, const CMatrix& rho0, unsigned threads) {
  require_untruncated(net, "contract_full");
  const int n = net.config().N;
  Sweep sweep(net, threads);
  sweep.first_edge(state_tensor(rho0, net.basis()));
  for (int j = 2; j <= n; ++j) sweep.edge(j);
  CMatrix rho = readout_intermediate(sweep.running(), net.basis(), n);
  return {std::move(rho), sweep.finish()};
}

CMatrix GreensFunction::apply(const CMatrix& rho0) const {
  const auto d = static_cast<std::size_t>(rho0.rows());
  const auto v = vectorize(rho0);
  Eigen::VectorXcd x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
  const Eigen::VectorXcd y = P * x;
  return unvectorize(std::span<const cplx>(y.data(), static_cast<std::size_t>(y.size())), d);
}

GreensFunction greens_function(const PCTNPINetwork& net, unsigned threads) {
  require_untruncated(net, "greens_function");
  const int n = net.config().N;
  Sweep sweep(net, threads);
  sweep.first_edge(std::nullopt);
  for (int j = 2; j <= n; ++j) sweep.edge(j);
  const LabeledTensor& r = sweep.running();
  if (r.rank() != 2 || !r.has(legs::s(0)) || !r.has(legs::s(n))) {
    throw InternalError("Green's function sweep ended with unexpected legs");
  }
  const std::string order[] = {legs::s(n), legs::s(0)};
  const LabeledTensor p = r.permuted(order);
  const auto fb = static_cast<Eigen::Index>(net.basis().fb_dim());
  CMatrix P(fb, fb);
  const auto data = p.data();
  for (Eigen::Index a = 0; a < fb; ++a) {
    for (Eigen::Index b = 0; b < fb; ++b) P(a, b) = data[static_cast<std::size_t>(a * fb + b)];
  }
  return {std::move(P), sweep.finish()};
}

Propagation propagate_iterative(const PCTNPINetwork& net, const CMatrix& rho0, unsigned threads) {
  check_trajectory_network(net);
  const int n = net.config().N;
  Propagation out;
  out.trajectory.times.push_back(0.0);
  out.trajectory.rdms.push_back(rho0);
  Sweep sweep(net, threads);
  sweep.first_edge(state_tensor(rho0, net.basis()));
  out.trajectory.rdms.push_back(readout_intermediate(sweep.running(), net.basis(), 1));
  for (int j = 2; j <= n; ++j) {
    sweep.edge(j);
    out.trajectory.rdms.push_back(readout_intermediate(sweep.running(), net.basis(), j));
  }
  out.report = sweep.finish();
  for (int k = 1; k <= n; ++k) out.trajectory.times.push_back(k * net.dt());
  return out;
}

Propagation propagate_iterative(const NetworkConfig& cfg, const SystemSpec& spec, const SpectralDensity& sd,
                                const BathConfig& bath, const CMatrix& rho0, unsigned threads) {
  if (cfg.N < 1) throw ConfigError("N must be at least 1");
  const auto prop = short_time_propagator(spec, bath.dt);
  const auto basis = difference_basis(spec);
  Propagation out;
  if (bath.endpoint_policy == EndpointPolicy::classic) {
    if (cfg.L < cfg.N) {
      throw ConfigError("the classic endpoint policy makes eta horizon dependent and cannot be iterated with L < N");
    }
    out.trajectory.rdms.push_back(rho0);
    for (int k = 1; k <= cfg.N; ++k) {
      const auto eta = compute_eta(sd, bath, k);
      const auto net = build_network({k, k, cfg.mode}, prop, basis, eta);
      auto r = contract_full(net, rho0, threads);
      out.trajectory.rdms.push_back(std::move(r.rho));
      out.report = std::move(r.report);
    }
  } else {
    const auto eta = compute_eta(sd, bath, cfg.N);
    const auto net = build_network(cfg, prop, basis, eta);
    out = propagate_iterative(net, rho0, threads);
  }
  out.trajectory.times.clear();
  for (int k = 0; k <= cfg.N; ++k) out.trajectory.times.push_back(k * bath.dt);
  return out;
}

CMatrix readout_intermediate(const LabeledTensor& running, const DifferenceBasis& basis, int step) {
  const std::string state = legs::s(step);
  LabeledTensor t = running;
  for (const auto& ix : running.indices()) {
    if (ix.name == state) continue;
    if (ix.name.rfind("ds", 0) != 0 || ix.dim != basis.B()) {
      throw InternalError("readout: running tensor has a non-difference leg '" + ix.name + "'");
    }
    t = slice(t, ix.name, basis.zero_slot);
  }
  if (t.rank() != 1 || t.indices()[0].name != state || t.indices()[0].dim != basis.fb_dim()) {
    throw InternalError("readout: running tensor lacks the state leg '" + state + "'");
  }
  return unvectorize(t.data(), basis.D);
}

std::uint64_t expected_peak_elements(int N, int L, Mode mode, std::uint64_t D, std::uint64_t B) {
  const int m = std::min(L, N);
  const std::uint64_t d2 = D * D;
  auto pow = [](std::uint64_t b, int e) {
    std::uint64_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  };
  if (m <= 1 || N == 1) return d2;
  if (mode == Mode::classical) return d2 * pow(B, m - 1);
  return d2 * d2 * pow(B, m - 2);
}

}  // namespace pctnpi
