#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace scurv {

class FiniteMMSpace;

/// How the atoms of a space were produced. Determines the standard error
/// attached to ball measures: exact spaces carry none, lattice and stratified
/// samples carry the boundary-shell error, i.i.d. samples the binomial one.
enum class Sampling { exact, lattice, stratified, iid };

std::string to_string(Sampling s);
Sampling sampling_from_string(const std::string& s);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Full pairwise distance matrix.
struct DenseMetric {
  Eigen::MatrixXd dist;
};

/// Exact distances computed on demand from coordinates in a model geometry.
struct EmbeddedMetric {
  enum class Kind { euclidean, sphere, flat_torus, hyperbolic };
  Kind kind = Kind::euclidean;
  RowMatrix coords;         // one row per atom; hyperboloid coordinates for `hyperbolic`
  double radius = 1.0;      // sphere radius
  Eigen::VectorXd periods;  // flat torus side lengths
};

/// Pythagorean product of two spaces; atom (i, j) has index i * |second| + j.
struct ProductMetric {
  std::shared_ptr<const FiniteMMSpace> first;
  std::shared_ptr<const FiniteMMSpace> second;
};

/// Induced metric on a subset of a parent space.
struct SubsetMetric {
  std::shared_ptr<const FiniteMMSpace> parent;
  std::vector<int> indices;
};

using Metric = std::variant<DenseMetric, EmbeddedMetric, ProductMetric, SubsetMetric>;

/// Finite metric measure space (X, d, mu) with a declared dimension n.
///
/// Immutable after construction. Distances are `scale * base(i, j)` where
/// `base` is given by the metric backend, so rescaling never touches the
/// backend data. Closed balls use the inclusive comparison d <= r (1 + 1e-12).
class FiniteMMSpace {
 public:
  FiniteMMSpace(Metric metric, Eigen::VectorXd mass, int dim_hint, Sampling sampling = Sampling::exact,
                double scale = 1.0, std::string provenance = {});

  std::size_t size() const { return static_cast<std::size_t>(mass_.size()); }
  int dim_hint() const { return dim_hint_; }
  Sampling sampling() const { return sampling_; }
  double scale() const { return scale_; }
  double resolution() const { return resolution_; }
  const Eigen::VectorXd& mass() const { return mass_; }
  double total_mass() const { return total_mass_; }
  const Metric& metric() const { return metric_; }
  const std::string& provenance() const { return provenance_; }

  double distance(int i, int j) const;
  void distances_from(int i, std::span<double> out) const;
  double max_distance() const;

  /// Monotone surrogate of the distance used for fast ball counting:
  /// d(i, j) <= r  iff  key(i, j) <= key_threshold(r).
  void keys_from(int i, std::span<double> out) const;
  double key_threshold(double r) const;

  void check_index(int i) const;

 private:
  double base_distance(int i, int j) const;
  void base_distances_from(int i, std::span<double> out) const;
  double compute_resolution() const;
  double key_to_distance(double key) const;

  Metric metric_;
  Eigen::VectorXd mass_;
  int dim_hint_;
  Sampling sampling_;
  double scale_;
  double total_mass_ = 0;
  double resolution_ = 0;
  std::string provenance_;
};

/// Relative inclusion tolerance for closed balls.
inline constexpr double kBallTolerance = 1e-12;

double ball_measure(const FiniteMMSpace& space, int center, double r);

/// Ball measures and atom counts for every center and every radius of a
/// nondecreasing radius grid. One O(N^2) sweep.
struct BallTable {
  std::vector<double> radii;
  std::vector<int> centers;
  Eigen::MatrixXd measure;  // centers x radii
  Eigen::MatrixXi count;
};

BallTable ball_table(const FiniteMMSpace& space, std::span<const double> radii,
                     std::span<const int> centers = {});

/// Standard error of a ball measure under the space's sampling scheme.
double ball_sigma(const FiniteMMSpace& space, double measure, int count, double r);

/// Per-point check of mu(B_r)/vol_E(B_r) -> 1 via a fit against r^2.
struct NdimReport {
  int n = 0;
  double r_lo = 0, r_hi = 0;
  std::vector<double> radii;
  std::vector<double> intercepts;
  double max_deviation = 0;
  double tolerance = 0;
  bool pass = false;
  std::string note;
};

NdimReport ndim_condition_fit(const FiniteMMSpace& space, int n, double r_lo, double r_hi,
                              double tolerance = 0.05, double grid_ratio = 1.15);

/// lambda X = (X, lambda d, lambda^n mu) with n the declared dimension.
FiniteMMSpace scale_space(const FiniteMMSpace& space, double lambda);

inline constexpr std::size_t kDefaultProductBudget = 50000;

FiniteMMSpace product_space(const FiniteMMSpace& first, const FiniteMMSpace& second,
                            std::size_t budget = kDefaultProductBudget);

/// Subspace with inherited distances and masses.
FiniteMMSpace restrict_space(const FiniteMMSpace& space, std::vector<int> indices);

struct IsometryCheck {
  bool isometric = false;
  bool bijective = false;
  double distance_defect = 0;  // max |d_Y(f a, f b) - d_X(a, b)|
  double mass_defect = 0;      // max relative mismatch of pushforward masses
};

IsometryCheck check_isometry(std::span<const int> map, const FiniteMMSpace& source,
                             const FiniteMMSpace& target);

/// Brute-force dense distance matrix (small spaces only).
Eigen::MatrixXd distance_matrix(const FiniteMMSpace& space);

}  // namespace scurv
