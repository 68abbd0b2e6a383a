#pragma once

// Two-sided Student t p-value by adaptive Simpson integration of the density
// over [0, |t|]. Shares no code with the incomplete-beta path.

#include <cmath>

namespace oracle {

inline double t_density(double x, double df) {
  const double log_c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  return std::exp(log_c - (df + 1) / 2 * std::log1p(x * x / df));
}

namespace detail {

template <class F>
double simpson(F& f, double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6 * (fa + 4 * fm + fb);
}

template <class F>
double adaptive(F& f, double a, double b, double fa, double fm, double fb, double whole, double eps, int depth) {
  const double m = (a + b) / 2;
  const double lm = (a + m) / 2, rm = (m + b) / 2;
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15 * eps) return left + right + delta / 15;
  return adaptive(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}

}  // namespace detail

inline double t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  const double x = std::fabs(t);
  if (x == 0.0) return 1.0;
  auto f = [df](double u) { return t_density(u, df); };
  // Integrate piecewise so each panel sees a smooth, bounded-curvature stretch.
  double mass = 0.0;
  double a = 0.0;
  while (a < x) {
    const double b = std::min(x, a < 8 ? a + 0.5 : a * 2);
    const double fa = f(a), fb = f(b), fm = f((a + b) / 2);
    mass += detail::adaptive(f, a, b, fa, fm, fb, detail::simpson(f, a, b, fa, fm, fb), 1e-13, 50);
    a = b;
  }
  return std::max(0.0, 1.0 - 2.0 * mass);
}

}  // namespace oracle
