#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pctnpi {

/// Ohmic spectral density with an exponential cutoff,
/// J(w) = (pi/2) xi w exp(-w / omega_c).
struct OhmicExponential {
  double xi = 0.0;       ///< dimensionless Kondo parameter
  double omega_c = 1.0;  ///< cutoff frequency
};

/// Ohmic spectral density with a Drude cutoff, J(w) = kappa omega_c w / (w^2 + omega_c^2).
struct Drude {
  double kappa = 0.0;
  double omega_c = 1.0;
};

/// J(w) sampled on a grid and linearly interpolated. Below the first
/// sample J ramps linearly from (0, 0); above the last sample J is zero.
struct Tabulated {
  std::vector<std::pair<double, double>> grid;  ///< (omega, J) with increasing omega
};

/// Bath coupling model J(w), w >= 0 (hbar = 1).
class SpectralDensity {
 public:
  using Form = std::variant<OhmicExponential, Drude, Tabulated>;

  SpectralDensity() : form_(OhmicExponential{}) {}
  explicit SpectralDensity(Form form);

  static SpectralDensity ohmic_exponential(double xi, double omega_c);
  static SpectralDensity drude(double kappa, double omega_c);
  static SpectralDensity tabulated(std::vector<std::pair<double, double>> grid);
  /// J = 0 everywhere.
  static SpectralDensity zero() { return ohmic_exponential(0.0, 1.0); }

  /// Two-column text (omega, J); '#' starts a comment.
  static SpectralDensity load_table(const std::filesystem::path& path);

  const Form& form() const noexcept { return form_; }
  bool is_zero() const noexcept;

  /// J(w); throws DomainError for w < 0.
  double operator()(double omega) const;
  /// J(w) / w with its w -> 0 limit. Throws DomainError if J(0) != 0.
  double over_omega(double omega) const;

  /// Frequency above which J is exactly zero or negligible, if any.
  double support_end() const;
  /// True when J decays only algebraically (Drude), so a tail beyond
  /// support_end() has to be integrated separately.
  bool has_algebraic_tail() const noexcept { return std::holds_alternative<Drude>(form_); }
  /// Interior points where J has kinks (tabulated grid nodes).
  std::vector<double> breakpoints() const;

  std::string describe() const;

 private:
  Form form_;
};

enum class EndpointPolicy { stationary, classic };

struct BathConfig {
  double beta = 1.0;  ///< inverse temperature
  double dt = 0.1;    ///< time step
  EndpointPolicy endpoint_policy = EndpointPolicy::stationary;
  double quadrature_tol = 1e-12;  ///< relative tolerance of every frequency integral
};

/// Returns J(w). Throws DomainError for w < 0.
double spectral_density_eval(const SpectralDensity& sd, double omega);

/// lambda = (2/pi) \int_{-inf}^{inf} J(w)/w dw. Throws QuadratureError when J/w is not integrable.
double reorganization_energy(const SpectralDensity& sd, double tol = 1e-12);

/// S(w) = 2 J(w) / (1 - exp(-beta w)), J extended as an odd function to w < 0.
/// At w = 0 returns 2 J'(0) / beta. beta may be +infinity.
double spectral_function(const SpectralDensity& sd, double beta, double omega);

/// C(t) = (1/pi) \int_0^inf J(w) [coth(beta w / 2) cos(w t) - i sin(w t)] dw.
/// Throws QuadratureError if the integral does not converge (e.g. Drude at t = 0).
std::complex<double> bath_correlation(const SpectralDensity& sd, double beta, double t, double tol = 1e-12);

/// Discretized bath response coefficients eta(k, k'), 0 <= k' <= k <= N.
///
/// eta(k, k') is the double integral of C(t' - t'') over the time windows of
/// points k and k' (t'' < t' on the diagonal). Under the stationary policy
/// point 0 owns [0, dt/2] and point k >= 1 owns [k dt - dt/2, k dt + dt/2],
/// so entries with k' >= 1 depend on k - k' only and the table does not
/// depend on the horizon. The classic policy additionally halves the last
/// window to [N dt - dt/2, N dt].
class EtaTable {
 public:
  EtaTable() = default;
  EtaTable(int steps, double dt, EndpointPolicy policy, std::vector<std::complex<double>> lower,
           double quadrature_error);

  /// All-zero table (zero coupling).
  static EtaTable zeros(int steps, double dt, EndpointPolicy policy = EndpointPolicy::stationary);

  int steps() const noexcept { return steps_; }
  double dt() const noexcept { return dt_; }
  EndpointPolicy policy() const noexcept { return policy_; }
  /// Largest absolute error estimate reported by the quadratures that built the table.
  double quadrature_error() const noexcept { return quadrature_error_; }

  /// eta(k, k'). Throws IndexError unless 0 <= k' <= k <= steps().
  std::complex<double> operator()(int k, int kp) const;

  EtaTable with_imag_zeroed() const;
  /// Zeroes every entry with k - k' > max_separation.
  EtaTable with_range_cutoff(int max_separation) const;
  /// Overwrites one entry; test hook for negative controls.
  EtaTable with_entry(int k, int kp, std::complex<double> value) const;

 private:
  std::size_t slot(int k, int kp) const;

  int steps_ = 0;
  double dt_ = 0.0;
  EndpointPolicy policy_ = EndpointPolicy::stationary;
  std::vector<std::complex<double>> lower_;  // row-major lower triangle
  double quadrature_error_ = 0.0;
};

/// Time window [begin, end] owned by point k of an N-step grid.
std::pair<double, double> eta_window(int k, int steps, double dt, EndpointPolicy policy);

/// Computes eta for steps 0..N. Throws QuadratureError on non-convergence.
EtaTable compute_eta(const SpectralDensity& sd, const BathConfig& cfg, int steps);

}  // namespace pctnpi
