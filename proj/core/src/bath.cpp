#include "pctnpi/bath.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pctnpi/errors.hpp"
#include "quadrature.hpp"

namespace pctnpi {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// sin(x)/x
double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

// (x - sin x) / x
double x_minus_sin_over_x(double x) {
  if (std::abs(x) < 1e-2) {
    const double x2 = x * x;
    return x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
  }
  return (x - std::sin(x)) / x;
}

// w coth(beta w / 2), equal to 2/beta at w = 0 and to |w| at beta = inf.
double w_coth(double w, double beta) {
  if (std::isinf(beta)) return std::abs(w);
  const double x = 0.5 * beta * w;
  if (std::abs(x) < 1e-4) return (2.0 / beta) * (1.0 + x * x / 3.0);
  return w / std::tanh(x);
}

double tab_eval(const Tabulated& t, double w) {
  const auto& g = t.grid;
  if (g.empty()) return 0.0;
  if (w <= g.front().first) {
    if (g.front().first == 0.0) return w == 0.0 ? g.front().second : 0.0;
    return g.front().second * (w / g.front().first);
  }
  if (w > g.back().first) return 0.0;
  auto it = std::lower_bound(g.begin(), g.end(), w, [](const auto& p, double x) { return p.first < x; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double f = (w - lo.first) / (hi.first - lo.first);
  return lo.second + f * (hi.second - lo.second);
}

}  // namespace

// ---------------------------------------------------------------------------
// SpectralDensity

SpectralDensity::SpectralDensity(Form form) : form_(std::move(form)) {
  std::visit(overloaded{
                 [](const OhmicExponential& f) {
                   if (!(f.xi >= 0.0) || !(f.omega_c > 0.0)) {
                     throw DomainError("ohmic-exponential requires xi >= 0 and omega_c > 0");
                   }
                 },
                 [](const Drude& f) {
                   if (!(f.kappa >= 0.0) || !(f.omega_c > 0.0)) {
                     throw DomainError("drude requires kappa >= 0 and omega_c > 0");
                   }
                 },
                 [](const Tabulated& f) {
                   for (std::size_t i = 0; i < f.grid.size(); ++i) {
                     if (!(f.grid[i].first >= 0.0) || !(f.grid[i].second >= 0.0)) {
                       throw DomainError("tabulated J requires omega >= 0 and J >= 0");
                     }
                     if (i > 0 && !(f.grid[i].first > f.grid[i - 1].first)) {
                       throw DomainError("tabulated J requires strictly increasing omega");
                     }
                   }
                 },
             },
             form_);
}

SpectralDensity SpectralDensity::ohmic_exponential(double xi, double omega_c) {
  return SpectralDensity(OhmicExponential{xi, omega_c});
}

SpectralDensity SpectralDensity::drude(double kappa, double omega_c) {
  return SpectralDensity(Drude{kappa, omega_c});
}

SpectralDensity SpectralDensity::tabulated(std::vector<std::pair<double, double>> grid) {
  return SpectralDensity(Tabulated{std::move(grid)});
}

SpectralDensity SpectralDensity::load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spectral density table '" + path.string() + "'");
  std::vector<std::pair<double, double>> grid;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double w = 0.0, j = 0.0;
    if (!(ls >> w)) continue;
    std::string rest;
    if (!(ls >> j) || (ls >> rest)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected two columns (omega J)");
    }
    grid.emplace_back(w, j);
  }
  if (grid.empty()) throw ConfigError(path.string() + ": no data rows");
  try {
    return tabulated(std::move(grid));
  } catch (const DomainError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

bool SpectralDensity::is_zero() const noexcept {
  return std::visit(overloaded{
                        [](const OhmicExponential& f) { return f.xi == 0.0; },
                        [](const Drude& f) { return f.kappa == 0.0; },
                        [](const Tabulated& f) {
                          return std::all_of(f.grid.begin(), f.grid.end(),
                                             [](const auto& p) { return p.second == 0.0; });
                        },
                    },
                    form_);
}

double SpectralDensity::operator()(double omega) const {
  if (!(omega >= 0.0)) throw DomainError("J(omega) requested at omega = " + std::to_string(omega));
  return std::visit(overloaded{
                        [omega](const OhmicExponential& f) {
                          return 0.5 * kPi * f.xi * omega * std::exp(-omega / f.omega_c);
                        },
                        [omega](const Drude& f) {
                          return f.kappa * f.omega_c * omega / (omega * omega + f.omega_c * f.omega_c);
                        },
                        [omega](const Tabulated& f) { return tab_eval(f, omega); },
                    },
                    form_);
}

double SpectralDensity::over_omega(double omega) const {
  if (!(omega >= 0.0)) throw DomainError("J(omega)/omega requested at omega = " + std::to_string(omega));
  return std::visit(overloaded{
                        [omega](const OhmicExponential& f) {
                          return 0.5 * kPi * f.xi * std::exp(-omega / f.omega_c);
                        },
                        [omega](const Drude& f) {
                          return f.kappa * f.omega_c / (omega * omega + f.omega_c * f.omega_c);
                        },
                        [omega](const Tabulated& f) -> double {
                          const auto& g = f.grid;
                          if (g.empty()) return 0.0;
                          if (omega > 0.0) return tab_eval(f, omega) / omega;
                          if (g.front().first > 0.0) return g.front().second / g.front().first;
                          if (g.front().second != 0.0) throw DomainError("tabulated J(0) != 0: J/omega diverges");
                          if (g.size() < 2) return 0.0;
                          return g[1].second / g[1].first;
                        },
                    },
                    form_);
}

double SpectralDensity::support_end() const {
  return std::visit(overloaded{
                        [](const OhmicExponential& f) { return 64.0 * f.omega_c; },
                        [](const Drude& f) { return 100.0 * f.omega_c; },
                        [](const Tabulated& f) { return f.grid.empty() ? 0.0 : f.grid.back().first; },
                    },
                    form_);
}

std::vector<double> SpectralDensity::breakpoints() const {
  std::vector<double> pts;
  if (const auto* t = std::get_if<Tabulated>(&form_)) {
    for (const auto& p : t->grid) pts.push_back(p.first);
  }
  return pts;
}

std::string SpectralDensity::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&os](const OhmicExponential& f) { os << "ohmic-exponential(xi=" << f.xi << ", omega_c=" << f.omega_c << ")"; },
                 [&os](const Drude& f) { os << "drude(kappa=" << f.kappa << ", omega_c=" << f.omega_c << ")"; },
                 [&os](const Tabulated& f) { os << "tabulated(" << f.grid.size() << " points)"; },
             },
             form_);
  return os.str();
}

// ---------------------------------------------------------------------------
// Scalar functions of J

double spectral_density_eval(const SpectralDensity& sd, double omega) { return sd(omega); }

double reorganization_energy(const SpectralDensity& sd, double tol) {
  if (sd.is_zero()) return 0.0;
  detail::RealFn f = [&sd](double w) {
    try {
      return sd.over_omega(w);
    } catch (const DomainError& e) {
      throw QuadratureError(std::string("reorganization energy: ") + e.what(),
                            std::numeric_limits<double>::infinity());
    }
  };
  f(0.0);
  const double end = sd.support_end();
  const auto cuts = sd.breakpoints();
  auto head = detail::integrate(f, 0.0, end, tol, cuts);
  double value = head.value;
  if (sd.has_algebraic_tail()) value += detail::integrate_to_infinity(f, end, tol).value;
  return 4.0 / kPi * value;
}

double spectral_function(const SpectralDensity& sd, double beta, double omega) {
  if (!(beta > 0.0)) throw DomainError("spectral_function requires beta > 0");
  if (omega == 0.0) return std::isinf(beta) ? 0.0 : 2.0 * sd.over_omega(0.0) / beta;
  const double j_odd = omega > 0.0 ? sd(omega) : -sd(-omega);
  return 2.0 * j_odd / (-std::expm1(-beta * omega));
}

namespace {

// Panel cuts that keep a few oscillations of frequency `max_time` per panel.
std::vector<double> oscillation_cuts(const SpectralDensity& sd, double end, double max_time) {
  std::vector<double> cuts = sd.breakpoints();
  if (max_time > 0.0) {
    const double width = 4.0 * kPi / max_time;
    for (double w = width; w < end; w += width) cuts.push_back(w);
  }
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

}  // namespace

std::complex<double> bath_correlation(const SpectralDensity& sd, double beta, double t, double tol) {
  if (!(t >= 0.0)) throw DomainError("bath_correlation requires t >= 0");
  if (!(beta > 0.0)) throw DomainError("bath_correlation requires beta > 0");
  if (sd.is_zero()) return {0.0, 0.0};
  const double end = sd.support_end();
  const auto cuts = oscillation_cuts(sd, end, t);
  detail::RealFn re = [&](double w) { return sd.over_omega(w) * w_coth(w, beta) * std::cos(w * t); };
  detail::RealFn im = [&](double w) { return -sd(w) * std::sin(w * t); };
  auto r = detail::integrate(re, 0.0, end, tol, cuts);
  auto i = detail::integrate(im, 0.0, end, tol, cuts);
  if (sd.has_algebraic_tail()) {
    detail::RealFn jcoth = [&](double w) { return sd.over_omega(w) * w_coth(w, beta); };
    detail::RealFn j = [&](double w) { return sd(w); };
    auto rt = detail::fourier_cos_tail(jcoth, end, t, tol);
    auto it = detail::fourier_sin_tail(j, end, t, tol);
    r.value += rt.value;
    i.value -= it.value;
  }
  return {r.value / kPi, i.value / kPi};
}

// ---------------------------------------------------------------------------
// EtaTable

EtaTable::EtaTable(int steps, double dt, EndpointPolicy policy, std::vector<std::complex<double>> lower,
                   double quadrature_error)
    : steps_(steps), dt_(dt), policy_(policy), lower_(std::move(lower)), quadrature_error_(quadrature_error) {
  if (steps < 0) throw IndexError("EtaTable needs steps >= 0");
  const auto n = static_cast<std::size_t>(steps) + 1;
  if (lower_.size() != n * (n + 1) / 2) throw IndexError("EtaTable storage has the wrong length");
}

EtaTable EtaTable::zeros(int steps, double dt, EndpointPolicy policy) {
  const auto n = static_cast<std::size_t>(steps) + 1;
  return EtaTable(steps, dt, policy, std::vector<std::complex<double>>(n * (n + 1) / 2), 0.0);
}

std::size_t EtaTable::slot(int k, int kp) const {
  if (kp < 0 || kp > k || k > steps_) {
    throw IndexError("eta(" + std::to_string(k) + ", " + std::to_string(kp) + ") outside 0 <= k' <= k <= " +
                     std::to_string(steps_));
  }
  const auto kk = static_cast<std::size_t>(k);
  return kk * (kk + 1) / 2 + static_cast<std::size_t>(kp);
}

std::complex<double> EtaTable::operator()(int k, int kp) const { return lower_[slot(k, kp)]; }

EtaTable EtaTable::with_imag_zeroed() const {
  EtaTable t = *this;
  for (auto& v : t.lower_) v = {v.real(), 0.0};
  return t;
}

EtaTable EtaTable::with_range_cutoff(int max_separation) const {
  EtaTable t = *this;
  for (int k = 0; k <= steps_; ++k) {
    for (int kp = 0; kp <= k; ++kp) {
      if (k - kp > max_separation) t.lower_[slot(k, kp)] = {0.0, 0.0};
    }
  }
  return t;
}

EtaTable EtaTable::with_entry(int k, int kp, std::complex<double> value) const {
  EtaTable t = *this;
  t.lower_[slot(k, kp)] = value;
  return t;
}

std::pair<double, double> eta_window(int k, int steps, double dt, EndpointPolicy policy) {
  if (k == 0) return {0.0, 0.5 * dt};
  const double centre = k * dt;
  if (policy == EndpointPolicy::classic && k == steps) return {centre - 0.5 * dt, centre};
  return {centre - 0.5 * dt, centre + 0.5 * dt};
}

namespace {

struct EtaEntry {
  std::complex<double> value;
  double error = 0.0;
};

// Double integral of C(t' - t'') over window `later` x window `earlier`,
// evaluated in the frequency domain:
//   eta = (1/pi) \int_0^inf J(w) [coth(beta w/2) Re G(w) + i Im G(w)] dw
// with G the window integral of exp(-i w (t' - t'')).
class EtaIntegrator {
 public:
  EtaIntegrator(const SpectralDensity& sd, const BathConfig& cfg) : sd_(sd), cfg_(cfg) {}

  EtaEntry diagonal(double width) const {
    const double beta = cfg_.beta;
    const double w2h = 0.5 * width * width;
    detail::RealFn re = [&](double w) {
      const double s = sinc(0.5 * w * width);
      return sd_.over_omega(w) * w_coth(w, beta) * w2h * s * s;
    };
    detail::RealFn im = [&](double w) { return -sd_.over_omega(w) * width * x_minus_sin_over_x(w * width); };
    const double end = sd_.support_end();
    const auto cuts = oscillation_cuts(sd_, end, width);
    auto r = detail::integrate(re, 0.0, end, cfg_.quadrature_tol, cuts);
    auto i = detail::integrate(im, 0.0, end, cfg_.quadrature_tol, cuts);
    double err = r.error + i.error;
    if (sd_.has_algebraic_tail()) {
      // Re: A (1 - cos w width); Im: A sin(w width) - width J/w, with A = J coth / w^2 or J / w^2.
      auto a_re = tail_re();
      auto a_im = tail_im();
      detail::RealFn j_over_w = [&](double w) { return sd_.over_omega(w); };
      const double tol = cfg_.quadrature_tol;
      auto t0 = detail::integrate_to_infinity(a_re, end, tol);
      auto t1 = detail::fourier_cos_tail(a_re, end, width, tol);
      auto t2 = detail::fourier_sin_tail(a_im, end, width, tol);
      auto t3 = detail::integrate_to_infinity(j_over_w, end, tol);
      r.value += t0.value - t1.value;
      i.value += t2.value - width * t3.value;
      err += t0.error + t1.error + t2.error + width * t3.error;
    }
    return {{r.value / kPi, i.value / kPi}, err / kPi};
  }

  EtaEntry separated(double w_later, double w_earlier, double tau) const {
    const double beta = cfg_.beta;
    const double ww = w_later * w_earlier;
    detail::RealFn shape = [=](double w) { return ww * sinc(0.5 * w * w_later) * sinc(0.5 * w * w_earlier); };
    detail::RealFn re = [&](double w) {
      return sd_.over_omega(w) * w_coth(w, beta) * shape(w) * std::cos(w * tau);
    };
    detail::RealFn im = [&](double w) { return -sd_(w) * shape(w) * std::sin(w * tau); };
    const double end = sd_.support_end();
    const auto cuts = oscillation_cuts(sd_, end, tau + 0.5 * (w_later + w_earlier));
    auto r = detail::integrate(re, 0.0, end, cfg_.quadrature_tol, cuts);
    auto i = detail::integrate(im, 0.0, end, cfg_.quadrature_tol, cuts);
    double err = r.error + i.error;
    if (sd_.has_algebraic_tail()) {
      // w^2 Re G = cos((tau-p)w) + cos((tau+p)w) - cos((tau-q)w) - cos((tau+q)w)
      // w^2 Im G = -[sin((tau+p)w) + sin((tau-p)w) - sin((tau+q)w) - sin((tau-q)w)]
      const double p = 0.5 * (w_later - w_earlier);
      const double q = 0.5 * (w_later + w_earlier);
      auto a_re = tail_re();
      auto a_im = tail_im();
      const double tol = cfg_.quadrature_tol;
      const double nus[4] = {tau - p, tau + p, tau - q, tau + q};
      const double signs[4] = {1.0, 1.0, -1.0, -1.0};
      for (int n = 0; n < 4; ++n) {
        auto c = detail::fourier_cos_tail(a_re, end, nus[n], tol);
        auto s = detail::fourier_sin_tail(a_im, end, nus[n], tol);
        r.value += signs[n] * c.value;
        i.value -= signs[n] * s.value;
        err += c.error + s.error;
      }
    }
    return {{r.value / kPi, i.value / kPi}, err / kPi};
  }

 private:
  detail::RealFn tail_re() const {
    return [this](double w) { return sd_.over_omega(w) * w_coth(w, cfg_.beta) / (w * w); };
  }
  detail::RealFn tail_im() const {
    return [this](double w) { return sd_.over_omega(w) / w; };
  }

  const SpectralDensity& sd_;
  const BathConfig& cfg_;
};

EtaEntry eta_entry(const EtaIntegrator& integ, int k, int kp, int steps, double dt, EndpointPolicy policy) {
  auto [a, b] = eta_window(k, steps, dt, policy);
  if (k == kp) return integ.diagonal(b - a);
  auto [c, d] = eta_window(kp, steps, dt, policy);
  return integ.separated(b - a, d - c, 0.5 * (a + b) - 0.5 * (c + d));
}

}  // namespace

EtaTable compute_eta(const SpectralDensity& sd, const BathConfig& cfg, int steps) {
  if (steps < 1) throw ConfigError("compute_eta requires N >= 1");
  if (!(cfg.beta > 0.0)) throw ConfigError("beta must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.quadrature_tol > 0.0)) throw ConfigError("quadrature tolerance must be positive");
  if (sd.is_zero()) return EtaTable::zeros(steps, cfg.dt, cfg.endpoint_policy);
  try {
    sd.over_omega(0.0);
  } catch (const DomainError& e) {
    throw QuadratureError(std::string("eta: ") + e.what(), std::numeric_limits<double>::infinity());
  }

  const EtaIntegrator integ(sd, cfg);
  const auto n = static_cast<std::size_t>(steps) + 1;
  std::vector<std::complex<double>> lower(n * (n + 1) / 2);
  double err = 0.0;
  auto put = [&lower](int k, int kp, std::complex<double> v) {
    lower[static_cast<std::size_t>(k) * (k + 1) / 2 + kp] = v;
  };
  const bool classic = cfg.endpoint_policy == EndpointPolicy::classic;
  // Rows that are not shifted copies of each other: k' = 0 and (classic) k = N.
  const int stationary_last = classic ? steps - 1 : steps;
  for (int k = 0; k <= stationary_last; ++k) {
    auto e = eta_entry(integ, k, 0, steps, cfg.dt, cfg.endpoint_policy);
    put(k, 0, e.value);
    err = std::max(err, e.error);
  }
  for (int sep = 0; sep + 1 <= stationary_last; ++sep) {
    auto e = eta_entry(integ, 1 + sep, 1, steps, cfg.dt, cfg.endpoint_policy);
    err = std::max(err, e.error);
    for (int kp = 1; kp + sep <= stationary_last; ++kp) put(kp + sep, kp, e.value);
  }
  if (classic) {
    for (int kp = 0; kp <= steps; ++kp) {
      auto e = eta_entry(integ, steps, kp, steps, cfg.dt, cfg.endpoint_policy);
      put(steps, kp, e.value);
      err = std::max(err, e.error);
    }
  }
  return EtaTable(steps, cfg.dt, cfg.endpoint_policy, std::move(lower), err);
}

}  // namespace pctnpi
