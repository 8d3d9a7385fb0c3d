#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace pctnpi {

using CMatrix = Eigen::MatrixXcd;

/// Two-level system H0 = eps sigma_z - Omega sigma_x.
struct Tls {
  double epsilon = 0.0;
  double omega = 1.0;
};

/// Tight-binding chain with on-site energies and nearest-neighbour coupling V.
struct Wire {
  std::vector<double> site_energies;
  double coupling = 0.0;
};

/// System Hamiltonian plus the eigenvalues of the bath-coupled operator s,
/// which is diagonal in the computational basis.
struct SystemSpec {
  std::variant<Tls, Wire> kind;
  std::vector<double> s_eigenvalues;

  /// sigma_z coupling, s = (+1, -1).
  static SystemSpec tls(double epsilon, double omega);
  /// Position coupling, s = (0, 1, ..., D-1).
  static SystemSpec wire(std::vector<double> site_energies, double coupling);

  std::size_t dim() const noexcept { return s_eigenvalues.size(); }
};

CMatrix build_hamiltonian(const SystemSpec& spec);

/// U = exp(-i H0 dt).
struct Propagator {
  CMatrix U;
  double dt = 0.0;
};

/// Exact exponential through the eigendecomposition of H0. Throws ConfigError for dt <= 0.
Propagator short_time_propagator(const SystemSpec& spec, double dt);

/// Forward-backward pairs and their difference coordinates.
///
/// A forward-backward pair (s+, s-) of basis labels sits at position
/// s+ * D + s-. delta_values lists the distinct s+ - s- values in increasing
/// order; B is their count.
struct DifferenceBasis {
  std::size_t D = 0;
  std::vector<double> splus;             ///< eigenvalue of s+ at each fb position
  std::vector<double> sminus;            ///< eigenvalue of s- at each fb position
  std::vector<double> delta_values;      ///< sorted distinct differences
  std::vector<std::size_t> delta_of;     ///< fb position -> slot in delta_values
  std::vector<double> sbar_of;           ///< fb position -> (s+ + s-) / 2
  std::size_t zero_slot = 0;             ///< slot of the zero difference

  std::size_t fb_dim() const noexcept { return D * D; }
  std::size_t B() const noexcept { return delta_values.size(); }
  std::size_t fb_index(std::size_t plus, std::size_t minus) const noexcept { return plus * D + minus; }
};

/// Distinct differences are merged when closer than 1e-12.
DifferenceBasis difference_basis(const SystemSpec& spec);

/// Reduced density matrices at t = k dt.
struct RdmTrajectory {
  std::vector<double> times;
  std::vector<CMatrix> rdms;
};

/// Row-major flattening rho(a, b) -> a * D + b, matching the fb ordering.
std::vector<std::complex<double>> vectorize(const CMatrix& rho);
CMatrix unvectorize(std::span<const std::complex<double>> v, std::size_t D);

}  // namespace pctnpi
