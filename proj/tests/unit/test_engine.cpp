#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "pctnpi/engine.hpp"
#include "pctnpi/errors.hpp"
#include "pctnpi/oracle.hpp"

using namespace pctnpi;

namespace {

BathConfig fig7_bath() { return BathConfig{1.0, 0.125, EndpointPolicy::stationary, 1e-12}; }
SpectralDensity fig7_sd() { return SpectralDensity::ohmic_exponential(2.0, 1.0); }

CMatrix site(std::size_t d, std::size_t k) {
  CMatrix rho = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
  return rho;
}

CMatrix random_rho(std::size_t d, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  CMatrix a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = cplx(g(rng), g(rng));
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

double diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(ContractFull, RabiOscillationWithoutBath) {
  auto spec = SystemSpec::tls(0.0, 1.0);
  for (int n : {1, 2, 6}) {
    auto net = build_network({n, n, Mode::full}, spec, SpectralDensity::zero(), fig7_bath());
    auto r = contract_full(net, site(2, 0));
    EXPECT_NEAR(r.rho(0, 0).real(), std::pow(std::cos(n * 0.125), 2), 1e-12);
  }
}

TEST(ContractFull, MatchesBruteForce) {
  auto spec = SystemSpec::tls(0.0, 1.0);
  for (Mode m : {Mode::full, Mode::classical}) {
    for (int n = 1; n <= 6; ++n) {
      auto net = build_network({n, n, m}, spec, fig7_sd(), fig7_bath());
      auto rho0 = random_rho(2, static_cast<unsigned>(n));
      auto r = contract_full(net, rho0);
      auto o = brute_force_rdm({n, 0, m}, spec, fig7_sd(), fig7_bath(), rho0);
      EXPECT_LT(diff(r.rho, o), 1e-10) << "N=" << n;
    }
  }
}

TEST(ContractFull, DrudeAndWireMatchBruteForce) {
  auto tls = SystemSpec::tls(0.5, 1.0);
  auto drude = SpectralDensity::drude(4.0, 5.0);
  BathConfig hot{5.0, 0.125, EndpointPolicy::stationary, 1e-12};
  for (Mode m : {Mode::full, Mode::classical}) {
    auto r = contract_full(build_network({5, 5, m}, tls, drude, hot), site(2, 1));
    EXPECT_LT(diff(r.rho, brute_force_rdm({5, 0, m}, tls, drude, hot, site(2, 1))), 1e-10);
  }
  auto wire = SystemSpec::wire({1.0, 0.0, 0.0}, 0.3);
  auto sd = SpectralDensity::ohmic_exponential(0.12, 4.0);
  BathConfig bath{0.1, 0.25, EndpointPolicy::stationary, 1e-12};
  for (Mode m : {Mode::full, Mode::classical}) {
    auto r = contract_full(build_network({4, 4, m}, wire, sd, bath), site(3, 0));
    EXPECT_LT(diff(r.rho, brute_force_rdm({4, 0, m}, wire, sd, bath, site(3, 0))), 1e-10);
  }
}

TEST(ContractFull, ClassicEndpointPolicyMatchesBruteForce) {
  auto spec = SystemSpec::tls(0.0, 1.0);
  BathConfig classic = fig7_bath();
  classic.endpoint_policy = EndpointPolicy::classic;
  auto r = contract_full(build_network({5, 5, Mode::full}, spec, fig7_sd(), classic), site(2, 0));
  EXPECT_LT(diff(r.rho, brute_force_rdm({5, 0, Mode::full}, spec, fig7_sd(), classic, site(2, 0))), 1e-10);
}

TEST(ContractFull, LedgerMatchesClosedForms) {
  auto net = build_network({5, 5, Mode::full}, SystemSpec::tls(0.0, 1.0), fig7_sd(), fig7_bath());
  auto r = contract_full(net, site(2, 0));
  const std::uint64_t d2 = 4, B = 3, N = 5;
  ASSERT_EQ(r.report.per_edge_cost.size(), 5u);
  EXPECT_EQ(r.report.per_edge_cost[0], 3168u);
  for (std::uint64_t j = 2; j <= N; ++j) {
    std::uint64_t bp = 1;
    for (std::uint64_t i = 0; i < N - j + 1; ++i) bp *= B;
    EXPECT_EQ(r.report.per_edge_cost[j - 1], d2 * d2 * bp * (1 + (N - j) * d2)) << "edge " << j;
  }
  const std::vector<std::uint64_t> stages{36, 108, 324, 324, 432, 432, 432, 108, 144, 144, 36, 48, 12, 4};
  EXPECT_EQ(r.report.per_step_storage, stages);
  EXPECT_EQ(r.report.peak_elements, 432u);
  EXPECT_EQ(r.report.setup_cost, 64u);
}

TEST(ContractFull, RequiresUntruncatedNetwork) {
  auto net = build_network({5, 3, Mode::full}, SystemSpec::tls(0.0, 1.0), fig7_sd(), fig7_bath());
  EXPECT_THROW(contract_full(net, site(2, 0)), ConfigError);
  EXPECT_THROW(greens_function(net), ConfigError);
}

TEST(GreensFunction, BareUnitaryChannel) {
  auto spec = SystemSpec::tls(0.3, 1.0);
  const int n = 4;
  auto net = build_network({n, n, Mode::full}, spec, SpectralDensity::zero(), fig7_bath());
  auto g = greens_function(net);
  CMatrix un = CMatrix::Identity(2, 2);
  const auto u = short_time_propagator(spec, 0.125).U;
  for (int i = 0; i < n; ++i) un = u * un;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int c = 0; c < 2; ++c) {
        for (int d = 0; d < 2; ++d) {
          EXPECT_NEAR(std::abs(g.P(a * 2 + b, c * 2 + d) - un(a, c) * std::conj(un(b, d))), 0.0, 1e-13);
        }
      }
    }
  }
}

TEST(GreensFunction, ConsistentWithDirectContraction) {
  auto net = build_network({5, 5, Mode::full}, SystemSpec::tls(0.0, 1.0), fig7_sd(), fig7_bath());
  auto g = greens_function(net);
  auto rho0 = random_rho(2, 99);
  EXPECT_LT(diff(g.apply(rho0), contract_full(net, rho0).rho), 1e-12);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      CMatrix e = CMatrix::Zero(2, 2);
      e(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;
      const auto col = vectorize(contract_full(net, e).rho);
      for (std::size_t r = 0; r < 4; ++r) {
        EXPECT_LT(std::abs(g.P(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a * 2 + b)) - col[r]), 1e-12);
      }
    }
  }
}

TEST(Iterative, TruncationIsExactWhenLongRangeEtaVanishes) {
  auto spec = SystemSpec::tls(0.0, 1.0);
  auto prop = short_time_propagator(spec, 0.125);
  auto basis = difference_basis(spec);
  const int n = 6, l = n - 1;
  auto eta = compute_eta(fig7_sd(), fig7_bath(), n).with_range_cutoff(l);
  auto full = contract_full(build_network({n, n, Mode::full}, prop, basis, eta), site(2, 0));
  auto iter = propagate_iterative(build_network({n, l, Mode::full}, prop, basis, eta), site(2, 0));
  EXPECT_LT(diff(full.rho, iter.trajectory.rdms.back()), 1e-12);
}

TEST(Iterative, MatchesTruncatedRecursionForDrude) {
  auto spec = SystemSpec::tls(0.0, 1.0);
  auto sd = SpectralDensity::drude(4.0, 5.0);
  BathConfig bath{5.0, 0.125, EndpointPolicy::stationary, 1e-12};
  const int n = 12, l = 10;
  auto it = propagate_iterative({n, l, Mode::full}, spec, sd, bath, site(2, 0));
  auto ref = brute_force_truncated({n, l, Mode::full}, spec, sd, bath, site(2, 0));
  ASSERT_EQ(it.trajectory.rdms.size(), ref.rdms.size());
  for (std::size_t k = 0; k < ref.rdms.size(); ++k) EXPECT_LT(diff(it.trajectory.rdms[k], ref.rdms[k]), 1e-10);
}

TEST(Iterative, StepStorageIsConstant) {
  auto r = propagate_iterative({14, 6, Mode::full}, SystemSpec::tls(0.0, 1.0), fig7_sd(), fig7_bath(), site(2, 0));
  EXPECT_EQ(r.report.peak_elements, 1296u);
  EXPECT_EQ(expected_peak_elements(14, 6, Mode::full, 2, 3), 1296u);
  // Once the memory is full every edge repeats the same stage sizes.
  const auto& s = r.report.per_step_storage;
  // Edge 1 makes 5 joins, edges 2..9 make 6 each; edges 3..9 see a full memory window.
  const std::size_t per_edge = 6, first = 5 + per_edge;
  ASSERT_GE(s.size(), first + 7 * per_edge);
  for (std::size_t i = first; i < first + 6 * per_edge; ++i) EXPECT_EQ(s[i], s[i + per_edge]) << i;
}

TEST(Iterative, ReadoutMatchesFreshHorizons) {
  auto spec = SystemSpec::tls(0.0, 1.0);
  for (Mode m : {Mode::full, Mode::classical}) {
    auto it = propagate_iterative({8, 8, m}, spec, fig7_sd(), fig7_bath(), site(2, 0));
    for (int k = 1; k <= 6; ++k) {
      auto fresh = contract_full(build_network({k, k, m}, spec, fig7_sd(), fig7_bath()), site(2, 0));
      EXPECT_LT(diff(it.trajectory.rdms[static_cast<std::size_t>(k)], fresh.rho), 1e-11) << k;
    }
  }
}

TEST(Iterative, BareRabiAndTraceAtEveryStep) {
  auto r = propagate_iterative({40, 3, Mode::full}, SystemSpec::tls(0.0, 1.0), SpectralDensity::zero(), fig7_bath(),
                               site(2, 0));
  for (std::size_t k = 0; k < r.trajectory.rdms.size(); ++k) {
    const auto& rho = r.trajectory.rdms[k];
    EXPECT_NEAR(rho(0, 0).real(), std::pow(std::cos(0.125 * static_cast<double>(k)), 2), 1e-12);
    EXPECT_DOUBLE_EQ(r.trajectory.times[k], 0.125 * static_cast<double>(k));
  }
  auto b = propagate_iterative({20, 4, Mode::full}, SystemSpec::tls(0.0, 1.0), fig7_sd(), fig7_bath(), site(2, 0));
  for (const auto& rho : b.trajectory.rdms) {
    EXPECT_LT(std::abs(rho.trace() - 1.0), 1e-10);
    EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Iterative, ClassicPolicyNeedsFullMemory) {
  BathConfig classic = fig7_bath();
  classic.endpoint_policy = EndpointPolicy::classic;
  auto spec = SystemSpec::tls(0.0, 1.0);
  EXPECT_THROW(propagate_iterative({8, 4, Mode::full}, spec, fig7_sd(), classic, site(2, 0)), ConfigError);
  // L = N falls back to fresh runs per horizon.
  auto r = propagate_iterative({4, 4, Mode::full}, spec, fig7_sd(), classic, site(2, 0));
  for (int k = 1; k <= 4; ++k) {
    auto o = brute_force_rdm({k, 0, Mode::full}, spec, fig7_sd(), classic, site(2, 0));
    EXPECT_LT(diff(r.trajectory.rdms[static_cast<std::size_t>(k)], o), 1e-10);
  }
}

TEST(Modes, CollapseWhenImaginaryEtaVanishes) {
  auto spec = SystemSpec::tls(0.0, 1.0);
  auto prop = short_time_propagator(spec, 0.125);
  auto basis = difference_basis(spec);
  auto eta = compute_eta(fig7_sd(), fig7_bath(), 10).with_imag_zeroed();
  auto full = propagate_iterative(build_network({10, 5, Mode::full}, prop, basis, eta), site(2, 0));
  auto cl = propagate_iterative(build_network({10, 5, Mode::classical}, prop, basis, eta), site(2, 0));
  for (std::size_t k = 0; k < full.trajectory.rdms.size(); ++k) {
    EXPECT_LT(diff(full.trajectory.rdms[k], cl.trajectory.rdms[k]), 1e-12);
  }
  EXPECT_LE(cl.report.peak_elements, full.report.peak_elements);
}

TEST(PeakElements, ClosedFormForAllShapes) {
  auto tls = SystemSpec::tls(0.0, 1.0);
  auto wire = SystemSpec::wire({0.0, 0.0, 0.0}, 0.2);
  for (const auto& spec : {tls, wire}) {
    const auto d = spec.dim();
    const auto b = difference_basis(spec).B();
    for (int n = 1; n <= 6; ++n) {
      for (int l = 1; l <= n; ++l) {
        for (Mode m : {Mode::full, Mode::classical}) {
          if (d == 3 && l > 4) continue;
          auto r = propagate_iterative({n, l, m}, spec, fig7_sd(), fig7_bath(), site(d, 0));
          EXPECT_EQ(r.report.peak_elements, expected_peak_elements(n, l, m, d, b))
              << "D=" << d << " N=" << n << " L=" << l << " mode=" << static_cast<int>(m);
        }
      }
    }
  }
}

TEST(Engine, ThreadCountIsBitwiseIrrelevant) {
  auto spec = SystemSpec::tls(0.0, 1.0);
  auto a = propagate_iterative({16, 9, Mode::full}, spec, fig7_sd(), fig7_bath(), site(2, 0), 1);
  auto b = propagate_iterative({16, 9, Mode::full}, spec, fig7_sd(), fig7_bath(), site(2, 0), 4);
  for (std::size_t k = 0; k < a.trajectory.rdms.size(); ++k) {
    EXPECT_EQ(0, std::memcmp(a.trajectory.rdms[k].data(), b.trajectory.rdms[k].data(), 4 * sizeof(cplx)));
  }
  EXPECT_EQ(a.report.per_edge_cost, b.report.per_edge_cost);
}

TEST(Readout, RejectsStateLikeLegs) {
  auto basis = difference_basis(SystemSpec::tls(0.0, 1.0));
  auto bad = LabeledTensor::zeros({{legs::s(3), 4}, {legs::ps(2, 4), 4}});
  EXPECT_THROW(readout_intermediate(bad, basis, 3), InternalError);
  auto missing = LabeledTensor::zeros({{legs::ds(4, 2), 3}});
  EXPECT_THROW(readout_intermediate(missing, basis, 3), InternalError);
  LabeledTensor ok({{legs::ds(5, 2), 3}, {legs::s(3), 4}},
                   {0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0});
  auto rho = readout_intermediate(ok, basis, 3);
  EXPECT_EQ(rho(0, 0), cplx(0.5));
  EXPECT_EQ(rho(1, 1), cplx(0.5));
}
