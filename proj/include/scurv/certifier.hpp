#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scurv/mm_space.hpp"

namespace scurv {

/// Knobs of a volumic certificate. Empty grids are generated from the space.
struct CertifierConfig {
  double slack = 1e-6;            // relative strictness slack delta
  double grid_ratio = 1.15;       // epsilon grid ratio, from 2h to R
  int gamma_points = 32;          // log-spaced on (sqrt(2/kappa)(1+1e-3), 8 sqrt(2/kappa)]
  double gamma_max_factor = 8.0;
  double sigma_factor = 2.0;      // margins within this many sigmas are inconclusive
  double familywise_alpha = 0.05; // widen the band to a Bonferroni level over all comparisons; 0 disables
  double min_radius = 0.0;        // pass iff sc_radius >= this; 0 means "the largest tested radius"
  int ledger_size = 16;
  bool require_ndim = true;
  double ndim_tolerance = 0.05;
  std::vector<double> eps_grid;
  std::vector<double> gamma_grid;
};

/// One comparison mu(B_eps(x)) against a model ball. gamma is 0 for the
/// Euclidean comparison.
struct MarginEntry {
  int point = 0;
  double eps = 0;
  double gamma = 0;
  double margin = 0;  // mu(B) - (1 - delta) * model volume
  double sigma = 0;
};

struct CertificateResult {
  int n = 0;
  double kappa = 0;
  bool pass = false;
  double sc_radius = 0;
  double min_radius = 0;
  double slack = 0;
  double sigma_factor = 0;  // effective band, after the family-wise correction
  std::string sampling;
  double resolution = 0;
  std::vector<double> eps_grid;
  std::vector<double> gamma_grid;
  std::vector<double> gamma_radius;  // r_{X,gamma} per gamma-grid entry
  std::vector<MarginEntry> worst_margins;
  long long comparisons = 0;
  long long violations = 0;    // margins beyond sigma_factor * sigma
  long long inconclusive = 0;  // positive margins within the sigma band
  std::string note;
};

/// Upper standard-normal quantile z with P(Z > z) = alpha / comparisons,
/// never below `base`. Returns `base` when alpha <= 0.
double familywise_band(double base, double alpha, long long comparisons);

std::vector<double> epsilon_grid(double h, double big_r, double ratio = 1.15);
std::vector<double> gamma_grid(double kappa, int points = 32, double max_factor = 8.0);

/// Euclidean comparison mu(B_eps(x)) <= vol_E(B_eps) for all x and grid eps.
CertificateResult certify_nonneg(const FiniteMMSpace& space, int n, double big_r,
                                 const CertifierConfig& config = {});

/// Strict comparison against S^2(gamma) x R^{n-2} for every gamma on the grid.
CertificateResult certify_kappa(const FiniteMMSpace& space, int n, double kappa, double big_r,
                                const CertifierConfig& config = {});

/// Same as above over precomputed ball measures; the table radii are the epsilon grid.
CertificateResult certify_nonneg(const FiniteMMSpace& space, int n, const BallTable& table,
                                 const CertifierConfig& config = {});
CertificateResult certify_kappa(const FiniteMMSpace& space, int n, double kappa, const BallTable& table,
                                const CertifierConfig& config = {});

struct LowerBoundEstimate {
  double kappa_hat = 0;
  bool nonneg_pass = false;
  double kappa_floor = 0;  // smallest bound the sampling noise can resolve at radius R
  int evaluations = 0;
  std::vector<std::pair<double, bool>> trace;
};

/// Largest kappa (2% relative bisection) with a passing certificate, or 0.
LowerBoundEstimate estimate_lower_bound(const FiniteMMSpace& space, int n, double big_r,
                                        const CertifierConfig& config = {}, double rel_tol = 0.02);

struct BgViolation {
  int point = 0;
  double r = 0;
  double big_r = 0;
  double ratio = 0;  // mu(B_r) / mu(B_R)
  double bound = 0;  // model profile ratio
  double sigma = 0;
};

struct BgReport {
  int n = 0;
  double kappa = 0;
  std::vector<double> radii;
  long long checked = 0;
  long long violation_count = 0;
  double sigma_factor = 0;  // effective band
  std::vector<BgViolation> violations;  // worst first, truncated to the ledger size
  bool consistent() const { return violation_count == 0; }
};

struct BgConfig {
  double r_max = 0;  // 0: min(profile cap, half the diameter of the space)
  double grid_ratio = 1.15;
  double sigma_factor = 2.0;
  double familywise_alpha = 0.05;
  int ledger_size = 16;
};

/// Generalized Bishop-Gromov ratio test over all points and grid pairs r < R.
BgReport bishop_gromov_check(const FiniteMMSpace& space, int n, double kappa, const BgConfig& config = {});

struct CdReport {
  int n = 0;
  double kappa_cd = 0;
  double certified_kappa = 0;
  double slack = 0;
  bool ndim_pass = false;
  bool bg_consistent = false;
  bool preconditions_hold = false;
  bool conclusion_holds = false;
  BgReport bg;
  CertificateResult certificate;
};

/// Empirical check of CD(kappa, n) => Sc^{vol_n} >= n kappa: the certificate is
/// run at n kappa (1 - slack), or the Euclidean comparison when kappa = 0.
CdReport verify_cd_theorem(const FiniteMMSpace& space, int n, double kappa, double big_r, double slack = 0.1,
                           const CertifierConfig& config = {}, const BgConfig& bg_config = {});

}  // namespace scurv
