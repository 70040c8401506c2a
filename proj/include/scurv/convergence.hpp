#pragma once

#include <span>
#include <vector>

#include "scurv/certifier.hpp"
#include "scurv/mm_space.hpp"

namespace scurv {

/// Point assignment between two finite spaces; total on the source.
struct MapBetweenSpaces {
  const FiniteMMSpace* source = nullptr;
  const FiniteMMSpace* target = nullptr;
  std::vector<int> assignment;
};

struct DistortionReport {
  double distortion = 0;           // max |d_X(a, b) - d_Y(f a, f b)|
  double surjectivity_defect = 0;  // max_y min_x d_Y(f x, y)
  double epsilon = 0;              // max of the two
};

/// Smallest epsilon for which the map is an epsilon-isometry.
DistortionReport epsilon_isometry_defect(const MapBetweenSpaces& map);

/// sup over subsets |mu(A) - nu(A)| for atomic measures on a common index set.
double total_variation_distance(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);

/// f_* mu as a mass vector on the target.
Eigen::VectorXd pushforward(const MapBetweenSpaces& map);

struct InflationCheck {
  int point = 0;       // limit point of the ledger entry
  int preimage = 0;    // x_i with f_i(x_i) nearest to the limit point
  double r = 0;
  double gamma = 0;
  bool inclusion = false;  // f_i^{-1}(B_r(x)) inside B_{r + 4 eps_i}(x_i)
  double member_measure = 0;
  double model_bound = 0;  // (1 - delta) model volume at r + 4 eps_i
  double sigma = 0;
  bool holds = false;
};

struct StabilityStep {
  DistortionReport distortion;
  double tv = 0;
  double sc_radius = 0;
  std::vector<InflationCheck> inflation;
  int inflation_skipped = 0;  // entries with r + 4 eps_i beyond the certified radius
  bool inflation_holds = false;
};

struct StabilityReport {
  std::vector<StabilityStep> steps;
  bool epsilon_nonincreasing = false;
  bool tv_decreasing = false;
  bool tv_nonincreasing = false;
  CertificateResult limit_certificate;
  double radius_tolerance = 0;
  bool limit_pass = false;  // passes with sc_radius >= R (1 - tolerance)
  bool inflation_all = false;
};

struct StabilityConfig {
  double radius_tolerance = 0.05;
  int inflation_entries = 8;
  CertifierConfig certifier;
};

/// Replays the stability theorem on a finite sequence converging to `limit`.
/// Every member must carry a passing certificate at (n, kappa) with radius R.
StabilityReport stability_experiment(const std::vector<FiniteMMSpace>& sequence,
                                     const std::vector<std::vector<int>>& maps, const FiniteMMSpace& limit, int n,
                                     double kappa, double big_r, const StabilityConfig& config = {});

struct PointedSpace {
  FiniteMMSpace space;
  int base = 0;
  double lambda = 1;
};

/// lambda_i X restricted to the closed lambda_i r0 ball around p, with p as base point.
std::vector<PointedSpace> tangent_rescale_sequence(const FiniteMMSpace& space, int p,
                                                   const std::vector<double>& lambdas, double r0);

}  // namespace scurv
