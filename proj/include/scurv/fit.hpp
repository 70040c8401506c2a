#pragma once

#include <span>

namespace scurv {

/// Small-radius expansion ratio(r) = intercept + r2 * r^2 + r4 * r^4.
struct ExpansionFit {
  double intercept = 1.0;
  double r2 = 0.0;
  double r4 = 0.0;
  double condition = 0.0;  // condition number of the normal equations
  bool ill_conditioned = false;
};

/// Fits ratio(r) = 1 + c2 r^2 (+ c4 r^4) by least squares on (ratio - 1) with
/// weights r^-4, i.e. ordinary least squares on (ratio - 1)/r^2.
ExpansionFit fit_fixed_intercept(std::span<const double> radii, std::span<const double> ratios,
                                 bool quartic);

/// Fits ratio(r) = a + b r^2 by (optionally weighted) least squares; used
/// where the r -> 0 limit itself is the unknown.
ExpansionFit fit_free_intercept(std::span<const double> radii, std::span<const double> ratios,
                                std::span<const double> weights = {});

}  // namespace scurv
