#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "scurv/errors.hpp"

namespace scurv {

namespace detail {

template <typename Scalar, typename F>
Scalar simpson_step(F& f, Scalar a, Scalar b, Scalar fa, Scalar fm, Scalar fb, Scalar whole,
                    Scalar tol, int depth) {
  const Scalar m = (a + b) / 2;
  const Scalar lm = (a + m) / 2;
  const Scalar rm = (m + b) / 2;
  const Scalar flm = f(lm);
  const Scalar frm = f(rm);
  const Scalar left = (m - a) / 6 * (fa + 4 * flm + fm);
  const Scalar right = (b - m) / 6 * (fm + 4 * frm + fb);
  const Scalar delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] with absolute tolerance tol.
/// The interval is pre-split into `panels` pieces so that integrands with
/// narrow features are not missed by the first Simpson estimate.
template <typename Scalar, typename F>
Scalar adaptive_simpson(F&& f, Scalar a, Scalar b, Scalar tol, int panels = 8, int max_depth = 40) {
  if (a == b) return Scalar(0);
  Scalar sum = 0;
  const Scalar width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const Scalar lo = a + width * p;
    const Scalar hi = p + 1 == panels ? b : a + width * (p + 1);
    const Scalar flo = f(lo);
    const Scalar fhi = f(hi);
    const Scalar fm = f((lo + hi) / 2);
    const Scalar whole = (hi - lo) / 6 * (flo + 4 * fm + fhi);
    sum += detail::simpson_step(f, lo, hi, flo, fm, fhi, whole, tol / panels, max_depth);
  }
  return sum;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order);

}  // namespace scurv
