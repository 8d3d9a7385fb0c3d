#include "quadrature.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "pctnpi/errors.hpp"

namespace pctnpi::detail {

namespace {

constexpr std::size_t kPanelBudget = 60000;
constexpr double kRoundoffFloor = 1024 * std::numeric_limits<double>::epsilon();

// Error a panel carries beyond what rounding already explains; refining a
// panel cannot push its estimate below the rounding level.
double excess(const QuadResult& r) { return std::max(0.0, r.error - kRoundoffFloor * r.l1); }

struct Panel {
  double a, b;
  QuadResult r;
  bool operator<(const Panel& o) const { return excess(r) < excess(o.r); }
};

Panel gk_panel(const RealFn& f, double a, double b) {
  Panel p{a, b, {}};
  double err = 0.0, l1 = 0.0;
  p.r.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &err, &l1);
  p.r.error = err;
  p.r.l1 = l1;
  return p;
}

template <class Integrator>
Integrator& ooura(double tol) {
  thread_local std::map<double, std::unique_ptr<Integrator>> cache;
  auto& slot = cache[tol];
  if (!slot) slot = std::make_unique<Integrator>(std::max(tol, 1e-14));
  return *slot;
}

}  // namespace

QuadResult integrate(const RealFn& f, double a, double b, double tol, std::span<const double> cuts) {
  if (!(b > a)) return {};
  std::priority_queue<Panel> heap;
  double lo = a;
  for (double c : cuts) {
    if (c > lo && c < b) {
      heap.push(gk_panel(f, lo, c));
      lo = c;
    }
  }
  heap.push(gk_panel(f, lo, b));

  auto totals = [&heap]() {
    // Summed in a fixed order so the result does not depend on heap layout.
    std::vector<Panel> all;
    auto copy = heap;
    while (!copy.empty()) {
      all.push_back(copy.top());
      copy.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    QuadResult t;
    for (const auto& p : all) {
      t.value += p.r.value;
      t.error += p.r.error;
      t.l1 += p.r.l1;
    }
    return t;
  };

  double err_sum = 0.0, val_sum = 0.0, l1_sum = 0.0;
  {
    auto t = totals();
    err_sum = t.error;
    val_sum = t.value;
    l1_sum = t.l1;
  }
  auto converged = [&] { return err_sum <= std::max(tol * std::abs(val_sum), kRoundoffFloor * l1_sum); };
  while (heap.size() < kPanelBudget) {
    if (converged()) return totals();
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    Panel left = gk_panel(f, worst.a, mid);
    Panel right = gk_panel(f, mid, worst.b);
    err_sum += left.r.error + right.r.error - worst.r.error;
    val_sum += left.r.value + right.r.value - worst.r.value;
    l1_sum += left.r.l1 + right.r.l1 - worst.r.l1;
    heap.push(left);
    heap.push(right);
  }
  auto t = totals();
  if (converged()) return t;
  char msg[160];
  std::snprintf(msg, sizeof msg, "adaptive quadrature did not converge on [%g, %g]: value %.6e, |f| integral %.6e",
                a, b, t.value, t.l1);
  throw QuadratureError(msg, t.error);
}

QuadResult integrate_to_infinity(const RealFn& f, double a, double tol) {
  RealFn mapped = [&f, a](double u) {
    const double one_minus = 1.0 - u;
    const double w = a + u / one_minus;
    return f(w) / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, tol);
}

QuadResult fourier_cos_tail(const RealFn& f, double a, double nu, double tol) {
  const double w = std::abs(nu);
  if (w == 0.0) return integrate_to_infinity(f, a, tol);
  auto shifted = [&f, a](double u) { return f(a + u); };
  auto [ic, ec] = ooura<boost::math::quadrature::ooura_fourier_cos<double>>(tol).integrate(shifted, w);
  auto [is, es] = ooura<boost::math::quadrature::ooura_fourier_sin<double>>(tol).integrate(shifted, w);
  const double c = std::cos(w * a), s = std::sin(w * a);
  QuadResult r;
  r.value = c * ic - s * is;
  r.error = std::abs(ec * ic) + std::abs(es * is);
  r.l1 = std::abs(ic) + std::abs(is);
  if (!std::isfinite(r.value)) throw QuadratureError("oscillatory tail integral diverged", r.error);
  return r;
}

QuadResult fourier_sin_tail(const RealFn& f, double a, double nu, double tol) {
  const double w = std::abs(nu);
  if (w == 0.0) return {};
  auto shifted = [&f, a](double u) { return f(a + u); };
  auto [ic, ec] = ooura<boost::math::quadrature::ooura_fourier_cos<double>>(tol).integrate(shifted, w);
  auto [is, es] = ooura<boost::math::quadrature::ooura_fourier_sin<double>>(tol).integrate(shifted, w);
  const double c = std::cos(w * a), s = std::sin(w * a);
  const double sign = nu < 0 ? -1.0 : 1.0;
  QuadResult r;
  r.value = sign * (s * ic + c * is);
  r.error = std::abs(ec * ic) + std::abs(es * is);
  r.l1 = std::abs(ic) + std::abs(is);
  if (!std::isfinite(r.value)) throw QuadratureError("oscillatory tail integral diverged", r.error);
  return r;
}

}  // namespace pctnpi::detail
