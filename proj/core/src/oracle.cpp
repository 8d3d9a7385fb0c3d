#include "pctnpi/oracle.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "pctnpi/errors.hpp"

namespace pctnpi {

namespace {

// Compensated complex accumulator (Neumaier, per component).
class NeumaierSum {
 public:
  void add(cplx v) {
    add(re_, cre_, v.real());
    add(im_, cim_, v.imag());
  }
  cplx value() const { return {re_ + cre_, im_ + cim_}; }

 private:
  static void add(double& sum, double& comp, double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double re_ = 0.0, cre_ = 0.0, im_ = 0.0, cim_ = 0.0;
};

// Forward-backward labels derived straight from the coupling eigenvalues.
struct PathAlphabet {
  std::size_t D = 0;
  std::size_t F = 0;
  std::vector<double> sp, sm;
  std::vector<cplx> step;  // step[prev * F + next] = U[next+, prev+] conj(U[next-, prev-])

  PathAlphabet(const SystemSpec& spec, const Propagator& prop) : D(spec.dim()), F(D * D) {
    if (static_cast<std::size_t>(prop.U.rows()) != D) throw ConfigError("propagator and system dimensions differ");
    sp.resize(F);
    sm.resize(F);
    for (std::size_t p = 0; p < D; ++p) {
      for (std::size_t m = 0; m < D; ++m) {
        sp[p * D + m] = spec.s_eigenvalues[p];
        sm[p * D + m] = spec.s_eigenvalues[m];
      }
    }
    step.resize(F * F);
    for (std::size_t a = 0; a < F; ++a) {
      for (std::size_t b = 0; b < F; ++b) {
        const auto ap = static_cast<Eigen::Index>(a / D), am = static_cast<Eigen::Index>(a % D);
        const auto bp = static_cast<Eigen::Index>(b / D), bm = static_cast<Eigen::Index>(b % D);
        step[a * F + b] = prop.U(bp, ap) * std::conj(prop.U(bm, am));
      }
    }
  }

  double ds(std::size_t x) const { return sp[x] - sm[x]; }
};

// Exponent contribution of the pair (k' <= k) to -log F.
cplx pair_exponent(const PathAlphabet& al, const EtaTable& eta, Mode mode, int k, int kp, std::size_t xk,
                   std::size_t xkp) {
  const cplx e = eta(k, kp);
  if (mode == Mode::classical && k - kp >= 2) return e.real() * al.ds(xk) * al.ds(xkp);
  return al.ds(xk) * (e * al.sp[xkp] - std::conj(e) * al.sm[xkp]);
}

bool pair_kept(const PathSumConfig& cfg, int k, int kp) { return cfg.L <= 0 || k - kp <= cfg.L; }

std::uint64_t ipow(std::uint64_t b, int e, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > cap / b) return cap + 1;
    r *= b;
  }
  return r;
}

void check_common(const PathSumConfig& cfg, const EtaTable& eta, const CMatrix& rho0, std::size_t D) {
  if (cfg.N < 1) throw ConfigError("N must be at least 1");
  if (eta.steps() < cfg.N) throw ConfigError("eta table is shorter than the horizon");
  if (static_cast<std::size_t>(rho0.rows()) != D || static_cast<std::size_t>(rho0.cols()) != D) {
    throw ConfigError("initial density matrix has the wrong dimension");
  }
}

}  // namespace

CMatrix brute_force_rdm(const PathSumConfig& cfg, const SystemSpec& spec, const Propagator& prop,
                        const EtaTable& eta, const CMatrix& rho0) {
  const PathAlphabet al(spec, prop);
  check_common(cfg, eta, rho0, al.D);
  if (ipow(al.F, cfg.N, kPathSumBudget) > kPathSumBudget) {
    throw BudgetExceeded("path sum over (D^2)^N = " + std::to_string(al.F) + "^" + std::to_string(cfg.N) +
                         " paths exceeds the budget of " + std::to_string(kPathSumBudget));
  }
  const int n = cfg.N;
  const std::size_t F = al.F;
  std::vector<NeumaierSum> acc(F);
  std::vector<std::size_t> path(static_cast<std::size_t>(n) + 1, 0);
  // Depth-first, lexicographic in (s_0, ..., s_N); partial amplitude and
  // exponent are carried down so each pair is evaluated once per prefix.
  std::vector<cplx> amp(static_cast<std::size_t>(n) + 1), expo(static_cast<std::size_t>(n) + 1);

  auto exponent_at = [&](int k) {
    cplx e{};
    for (int kp = 0; kp <= k; ++kp) {
      if (pair_kept(cfg, k, kp)) e += pair_exponent(al, eta, cfg.mode, k, kp, path[k], path[kp]);
    }
    return e;
  };

  auto visit = [&](auto&& self, int k) -> void {
    for (std::size_t x = 0; x < F; ++x) {
      path[static_cast<std::size_t>(k)] = x;
      if (k == 0) {
        amp[0] = rho0(static_cast<Eigen::Index>(x / al.D), static_cast<Eigen::Index>(x % al.D));
        expo[0] = exponent_at(0);
      } else {
        amp[k] = amp[k - 1] * al.step[path[k - 1] * F + x];
        expo[k] = expo[k - 1] + exponent_at(k);
      }
      if (k == n) {
        acc[x].add(amp[k] * std::exp(-expo[k]));
      } else {
        self(self, k + 1);
      }
    }
  };
  visit(visit, 0);

  std::vector<cplx> v(F);
  for (std::size_t x = 0; x < F; ++x) v[x] = acc[x].value();
  return unvectorize(v, al.D);
}

CMatrix brute_force_rdm(const PathSumConfig& cfg, const SystemSpec& spec, const SpectralDensity& sd,
                        const BathConfig& bath, const CMatrix& rho0) {
  return brute_force_rdm(cfg, spec, short_time_propagator(spec, bath.dt), compute_eta(sd, bath, cfg.N), rho0);
}

RdmTrajectory brute_force_truncated(const PathSumConfig& cfg, const SystemSpec& spec, const Propagator& prop,
                                    const EtaTable& eta, const CMatrix& rho0) {
  const PathAlphabet al(spec, prop);
  check_common(cfg, eta, rho0, al.D);
  const int memory = cfg.L <= 0 ? cfg.N : std::min(cfg.L, cfg.N);
  if (ipow(al.F, memory + 1, kRecursionBudget) > kRecursionBudget) {
    throw BudgetExceeded("augmented density tensor of (D^2)^(L+1) = " + std::to_string(al.F) + "^" +
                         std::to_string(memory + 1) + " entries exceeds the budget");
  }
  const std::size_t F = al.F;
  const PathSumConfig pairs{cfg.N, memory, cfg.mode};

  RdmTrajectory out;
  out.times.push_back(0.0);
  out.rdms.push_back(rho0);

  // amplitudes over the held points (first, ..., k); tuple index is base F,
  // oldest point most significant.
  int first = 0;
  int held = 1;
  std::vector<cplx> a(F);
  for (std::size_t x = 0; x < F; ++x) {
    const cplx r = rho0(static_cast<Eigen::Index>(x / al.D), static_cast<Eigen::Index>(x % al.D));
    a[x] = r * std::exp(-pair_exponent(al, eta, cfg.mode, 0, 0, x, x));
  }

  std::vector<std::size_t> pts(static_cast<std::size_t>(memory) + 1);
  for (int k = 1; k <= cfg.N; ++k) {
    const bool drop = held == memory;
    const int new_held = drop ? held : held + 1;
    const int new_first = drop ? first + 1 : first;
    std::size_t new_size = 1;
    for (int i = 0; i < new_held; ++i) new_size *= F;
    std::vector<cplx> b(new_size);
    const std::size_t old_tail = a.size() / F;  // F^(held-1)

    for (std::size_t t = 0; t < new_size; ++t) {
      // Decode the new tuple (points new_first .. k).
      std::size_t rem = t;
      for (int i = new_held - 1; i >= 0; --i) {
        pts[static_cast<std::size_t>(i)] = rem % F;
        rem /= F;
      }
      const std::size_t x = pts[static_cast<std::size_t>(new_held - 1)];
      // Points new_first..k-1 of the new tuple are the newest held-1 (drop) or
      // all held (no drop) points of the old tuple.
      std::size_t carried = t / F;
      const std::size_t prev = pts[static_cast<std::size_t>(new_held - 2 >= 0 ? new_held - 2 : 0)];
      cplx local{};
      for (int i = 0; i < new_held; ++i) {
        const int kp = new_first + i;
        if (pair_kept(pairs, k, kp)) local += pair_exponent(al, eta, cfg.mode, k, kp, x, pts[static_cast<std::size_t>(i)]);
      }
      if (drop) {
        NeumaierSum s;
        for (std::size_t y = 0; y < F; ++y) {
          const std::size_t old = y * old_tail + carried;
          const std::size_t prev_x = held >= 2 ? prev : y;
          cplx e = local;
          if (pair_kept(pairs, k, first)) e += pair_exponent(al, eta, cfg.mode, k, first, x, y);
          s.add(a[old] * al.step[prev_x * F + x] * std::exp(-e));
        }
        b[t] = s.value();
      } else {
        b[t] = a[carried] * al.step[prev * F + x] * std::exp(-local);
      }
    }
    a = std::move(b);
    held = new_held;
    first = new_first;

    // rho(k dt): sum over every held point except the newest.
    std::vector<NeumaierSum> r(F);
    for (std::size_t t = 0; t < a.size(); ++t) r[t % F].add(a[t]);
    std::vector<cplx> v(F);
    for (std::size_t x = 0; x < F; ++x) v[x] = r[x].value();
    out.times.push_back(k * prop.dt);
    out.rdms.push_back(unvectorize(v, al.D));
  }
  return out;
}

RdmTrajectory brute_force_truncated(const PathSumConfig& cfg, const SystemSpec& spec, const SpectralDensity& sd,
                                    const BathConfig& bath, const CMatrix& rho0) {
  if (bath.endpoint_policy != EndpointPolicy::stationary) {
    throw ConfigError("the truncated recursion needs the stationary endpoint policy");
  }
  return brute_force_truncated(cfg, spec, short_time_propagator(spec, bath.dt), compute_eta(sd, bath, cfg.N), rho0);
}

void write_fixture(const std::filesystem::path& path, const Fixture& fixture) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(fixture.config_json.empty() ? "{}" : fixture.config_json);
  auto& traj = j["trajectory"] = nlohmann::json::array();
  for (std::size_t i = 0; i < fixture.trajectory.rdms.size(); ++i) {
    nlohmann::json rho = nlohmann::json::array();
    for (const auto& v : vectorize(fixture.trajectory.rdms[i])) rho.push_back({v.real(), v.imag()});
    traj.push_back({{"t", fixture.trajectory.times.at(i)}, {"rho", std::move(rho)}});
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write fixture '" + path.string() + "'");
  out << j.dump(1) << '\n';
}

Fixture read_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fixture '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("fixture '" + path.string() + "': " + e.what());
  }
  Fixture f;
  f.config_json = j.value("config", nlohmann::json::object()).dump();
  for (const auto& row : j.at("trajectory")) {
    const auto& rho = row.at("rho");
    const auto d = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(rho.size()))));
    if (d * d != rho.size()) throw ConfigError("fixture '" + path.string() + "': rho is not square");
    std::vector<cplx> v;
    for (const auto& e : rho) v.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    f.trajectory.times.push_back(row.at("t").get<double>());
    f.trajectory.rdms.push_back(unvectorize(v, d));
  }
  return f;
}

}  // namespace pctnpi
