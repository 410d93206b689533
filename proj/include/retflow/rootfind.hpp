#ifndef RETFLOW_ROOTFIND_HPP
#define RETFLOW_ROOTFIND_HPP

#include <cmath>
#include <stdexcept>
#include <utility>

namespace retflow {

struct RootResult {
  double x;
  int iterations;
  bool converged;
};

/// Safeguarded Newton on a bracketed monotone root: Newton steps are taken
/// while they stay inside the current bracket and shrink the residual,
/// otherwise the iteration falls back to bisection. The derivative may be
/// unbounded at an endpoint (fractional-power source terms are singular at
/// sigma = 0); bisection keeps the iteration well defined there.
///
/// Requires g(lo) and g(hi) of opposite sign (or zero). Tolerances are on
/// the residual and on the bracket width.
template <class G, class DG>
RootResult newton_bisect(G&& g, DG&& dg, double lo, double hi, double gtol,
                         double xtol, int max_iter = 200) {
  if (lo > hi) std::swap(lo, hi);
  double glo = g(lo);
  double ghi = g(hi);
  if (glo == 0.0) return {lo, 0, true};
  if (ghi == 0.0) return {hi, 0, true};
  if (std::signbit(glo) == std::signbit(ghi))
    throw std::invalid_argument("newton_bisect: root not bracketed");

  double x = 0.5 * (lo + hi);
  double gx = g(x);
  for (int it = 1; it <= max_iter; ++it) {
    if (std::abs(gx) <= gtol || (hi - lo) <= xtol * (1.0 + std::abs(x)))
      return {x, it, true};
    // keep the bracket valid
    if (std::signbit(gx) == std::signbit(glo)) {
      lo = x;
      glo = gx;
    } else {
      hi = x;
      ghi = gx;
    }
    double d = dg(x);
    double xn = (d != 0.0 && std::isfinite(d)) ? x - gx / d : lo - 1.0;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisect
    x = xn;
    gx = g(x);
  }
  return {x, max_iter, std::abs(gx) <= 1e3 * gtol};
}

}  // namespace retflow

#endif
