#include "pctnpi/system.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "pctnpi/errors.hpp"

namespace pctnpi {

SystemSpec SystemSpec::tls(double epsilon, double omega) {
  return SystemSpec{Tls{epsilon, omega}, {1.0, -1.0}};
}

SystemSpec SystemSpec::wire(std::vector<double> site_energies, double coupling) {
  if (site_energies.size() < 2) throw ConfigError("a wire needs at least two sites");
  std::vector<double> s(site_energies.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = static_cast<double>(j);
  return SystemSpec{Wire{std::move(site_energies), coupling}, std::move(s)};
}

CMatrix build_hamiltonian(const SystemSpec& spec) {
  if (const auto* t = std::get_if<Tls>(&spec.kind)) {
    CMatrix h(2, 2);
    h << t->epsilon, -t->omega, -t->omega, -t->epsilon;
    return h;
  }
  const auto& w = std::get<Wire>(spec.kind);
  const auto n = static_cast<Eigen::Index>(w.site_energies.size());
  CMatrix h = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    h(j, j) = w.site_energies[static_cast<std::size_t>(j)];
    if (j + 1 < n) {
      h(j, j + 1) = -w.coupling;
      h(j + 1, j) = -w.coupling;
    }
  }
  return h;
}

Propagator short_time_propagator(const SystemSpec& spec, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const CMatrix h = build_hamiltonian(spec);
  if (static_cast<std::size_t>(h.rows()) != spec.dim()) {
    throw ConfigError("Hamiltonian dimension does not match the coupling eigenvalues");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw InternalError("eigendecomposition of H0 failed");
  const Eigen::VectorXd& e = eig.eigenvalues();
  Eigen::VectorXcd phase(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) phase(i) = std::polar(1.0, -e(i) * dt);
  const CMatrix& v = eig.eigenvectors();
  return Propagator{v * phase.asDiagonal() * v.adjoint(), dt};
}

DifferenceBasis difference_basis(const SystemSpec& spec) {
  const std::size_t d = spec.dim();
  if (d < 2) throw ConfigError("system dimension must be at least 2");
  DifferenceBasis b;
  b.D = d;
  b.splus.resize(d * d);
  b.sminus.resize(d * d);
  b.sbar_of.resize(d * d);
  std::vector<double> diffs;
  for (std::size_t p = 0; p < d; ++p) {
    for (std::size_t m = 0; m < d; ++m) {
      const std::size_t i = b.fb_index(p, m);
      b.splus[i] = spec.s_eigenvalues[p];
      b.sminus[i] = spec.s_eigenvalues[m];
      b.sbar_of[i] = 0.5 * (b.splus[i] + b.sminus[i]);
      diffs.push_back(p == m ? 0.0 : b.splus[i] - b.sminus[i]);
    }
  }
  std::sort(diffs.begin(), diffs.end());
  for (double x : diffs) {
    if (b.delta_values.empty() || x - b.delta_values.back() > 1e-12) b.delta_values.push_back(x);
  }
  auto slot_of = [&b](double x) {
    auto it = std::min_element(b.delta_values.begin(), b.delta_values.end(),
                               [x](double u, double v) { return std::abs(u - x) < std::abs(v - x); });
    return static_cast<std::size_t>(it - b.delta_values.begin());
  };
  b.delta_of.resize(d * d);
  for (std::size_t p = 0; p < d; ++p) {
    for (std::size_t m = 0; m < d; ++m) {
      const std::size_t i = b.fb_index(p, m);
      b.delta_of[i] = p == m ? slot_of(0.0) : slot_of(b.splus[i] - b.sminus[i]);
    }
  }
  b.zero_slot = slot_of(0.0);
  return b;
}

std::vector<std::complex<double>> vectorize(const CMatrix& rho) {
  const auto d = static_cast<std::size_t>(rho.rows());
  std::vector<std::complex<double>> v(d * d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      v[a * d + b] = rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  return v;
}

CMatrix unvectorize(std::span<const std::complex<double>> v, std::size_t D) {
  if (v.size() != D * D) throw IndexError("vectorized matrix has the wrong length");
  CMatrix rho(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
  for (std::size_t a = 0; a < D; ++a) {
    for (std::size_t b = 0; b < D; ++b) {
      rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v[a * D + b];
    }
  }
  return rho;
}

}  // namespace pctnpi
