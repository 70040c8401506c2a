#include "scurv/mm_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "scurv/errors.hpp"
#include "scurv/fit.hpp"
#include "scurv/model_spaces.hpp"

namespace scurv {

std::string to_string(Sampling s) {
  switch (s) {
    case Sampling::exact: return "exact";
    case Sampling::lattice: return "lattice";
    case Sampling::stratified: return "stratified";
    case Sampling::iid: return "iid";
  }
  return "exact";
}

Sampling sampling_from_string(const std::string& s) {
  if (s == "exact") return Sampling::exact;
  if (s == "lattice") return Sampling::lattice;
  if (s == "stratified") return Sampling::stratified;
  if (s == "iid") return Sampling::iid;
  throw DomainError("unknown sampling scheme '" + s + "'");
}

namespace {

double wrap_delta(double d, double period) {
  d = std::abs(d);
  d = std::fmod(d, period);
  return std::min(d, period - d);
}

double embedded_key(const EmbeddedMetric& m, int i, int j) {
  using Kind = EmbeddedMetric::Kind;
  const auto a = m.coords.row(i);
  const auto b = m.coords.row(j);
  switch (m.kind) {
    case Kind::euclidean: return (a - b).squaredNorm();
    case Kind::sphere: return -a.dot(b) / (m.radius * m.radius);
    case Kind::flat_torus: {
      double s = 0;
      for (Eigen::Index k = 0; k < m.coords.cols(); ++k) {
        const double d = wrap_delta(a(k) - b(k), m.periods(k));
        s += d * d;
      }
      return s;
    }
    case Kind::hyperbolic: {
      const double c = a(0) * b(0) - a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
      return std::max(c, 1.0);
    }
  }
  return 0;
}

double embedded_key_to_distance(const EmbeddedMetric& m, double key) {
  using Kind = EmbeddedMetric::Kind;
  switch (m.kind) {
    case Kind::euclidean:
    case Kind::flat_torus: return std::sqrt(std::max(key, 0.0));
    case Kind::sphere: return m.radius * std::acos(std::clamp(-key, -1.0, 1.0));
    case Kind::hyperbolic: return std::acosh(std::max(key, 1.0));
  }
  return 0;
}

double embedded_threshold(const EmbeddedMetric& m, double r) {
  using Kind = EmbeddedMetric::Kind;
  switch (m.kind) {
    case Kind::euclidean:
    case Kind::flat_torus: return r * r;
    case Kind::sphere: {
      const double angle = r / m.radius;
      return angle >= std::numbers::pi ? std::numeric_limits<double>::infinity() : -std::cos(angle);
    }
    case Kind::hyperbolic: return std::cosh(r);
  }
  return r;
}

}  // namespace

FiniteMMSpace::FiniteMMSpace(Metric metric, Eigen::VectorXd mass, int dim_hint, Sampling sampling,
                             double scale, std::string provenance)
    : metric_(std::move(metric)),
      mass_(std::move(mass)),
      dim_hint_(dim_hint),
      sampling_(sampling),
      scale_(scale),
      provenance_(std::move(provenance)) {
  if (mass_.size() == 0) throw DomainError("FiniteMMSpace: empty point set");
  if (dim_hint_ < 1) throw DomainError("FiniteMMSpace: dimension must be >= 1");
  if (!(scale_ > 0)) throw DomainError("FiniteMMSpace: scale must be positive");
  for (Eigen::Index i = 0; i < mass_.size(); ++i) {
    if (!(mass_(i) > 0) || !std::isfinite(mass_(i))) {
      throw DomainError("FiniteMMSpace: atom " + std::to_string(i) + " has nonpositive mass");
    }
  }
  total_mass_ = mass_.sum();
  const auto n = mass_.size();
  struct {
    Eigen::Index n;
    void operator()(const DenseMetric& d) const {
      if (d.dist.rows() != n || d.dist.cols() != n) throw DomainError("FiniteMMSpace: distance matrix shape");
      const double maxd = d.dist.cwiseAbs().maxCoeff();
      const double tol = 1e-9 * std::max(maxd, 1e-300);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d.dist(i, i) != 0) throw DomainError("FiniteMMSpace: nonzero diagonal");
        for (Eigen::Index j = 0; j < n; ++j) {
          if (d.dist(i, j) < 0 || d.dist(i, j) != d.dist(j, i)) {
            throw DomainError("FiniteMMSpace: distances must be symmetric and nonnegative");
          }
        }
      }
      if (n <= 2000) {
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k)
              if (d.dist(i, k) > d.dist(i, j) + d.dist(j, k) + tol) {
                throw DomainError("FiniteMMSpace: triangle inequality violated at (" + std::to_string(i) +
                                  "," + std::to_string(j) + "," + std::to_string(k) + ")");
              }
      }
    }
    void operator()(const EmbeddedMetric& e) const {
      if (e.coords.rows() != n) throw DomainError("FiniteMMSpace: coordinate rows != atoms");
      if (e.kind == EmbeddedMetric::Kind::flat_torus && e.periods.size() != e.coords.cols()) {
        throw DomainError("FiniteMMSpace: torus periods do not match coordinate dimension");
      }
      if (e.kind == EmbeddedMetric::Kind::sphere && !(e.radius > 0)) {
        throw DomainError("FiniteMMSpace: sphere radius must be positive");
      }
    }
    void operator()(const ProductMetric& p) const {
      if (!p.first || !p.second || static_cast<Eigen::Index>(p.first->size() * p.second->size()) != n) {
        throw DomainError("FiniteMMSpace: product factor sizes");
      }
    }
    void operator()(const SubsetMetric& s) const {
      if (!s.parent || static_cast<Eigen::Index>(s.indices.size()) != n) {
        throw DomainError("FiniteMMSpace: subset size");
      }
      for (int idx : s.indices) s.parent->check_index(idx);
    }
  } validator{n};
  std::visit(validator, metric_);
  resolution_ = compute_resolution();
}

void FiniteMMSpace::check_index(int i) const {
  if (i < 0 || static_cast<std::size_t>(i) >= size()) {
    throw DomainError("point id " + std::to_string(i) + " out of range [0, " + std::to_string(size()) + ")");
  }
}

double FiniteMMSpace::base_distance(int i, int j) const {
  struct {
    int i, j;
    double operator()(const DenseMetric& d) const { return d.dist(i, j); }
    double operator()(const EmbeddedMetric& e) const {
      if (i == j) return 0.0;
      return embedded_key_to_distance(e, embedded_key(e, i, j));
    }
    double operator()(const ProductMetric& p) const {
      const int n2 = static_cast<int>(p.second->size());
      const double a = p.first->distance(i / n2, j / n2);
      const double b = p.second->distance(i % n2, j % n2);
      return std::sqrt(a * a + b * b);
    }
    double operator()(const SubsetMetric& s) const { return s.parent->distance(s.indices[i], s.indices[j]); }
  } visitor{i, j};
  return std::visit(visitor, metric_);
}

double FiniteMMSpace::distance(int i, int j) const { return scale_ * base_distance(i, j); }

void FiniteMMSpace::base_distances_from(int i, std::span<double> out) const {
  const int n = static_cast<int>(size());
  if (const auto* e = std::get_if<EmbeddedMetric>(&metric_)) {
    for (int j = 0; j < n; ++j) out[j] = j == i ? 0.0 : embedded_key_to_distance(*e, embedded_key(*e, i, j));
    return;
  }
  for (int j = 0; j < n; ++j) out[j] = base_distance(i, j);
}

void FiniteMMSpace::distances_from(int i, std::span<double> out) const {
  check_index(i);
  base_distances_from(i, out);
  for (double& d : out) d *= scale_;
}

void FiniteMMSpace::keys_from(int i, std::span<double> out) const {
  const int n = static_cast<int>(size());
  if (const auto* e = std::get_if<EmbeddedMetric>(&metric_)) {
    if (e->kind == EmbeddedMetric::Kind::sphere || e->kind == EmbeddedMetric::Kind::euclidean) {
      Eigen::Map<Eigen::VectorXd> keys(out.data(), n);
      const Eigen::RowVectorXd x = e->coords.row(i);
      if (e->kind == EmbeddedMetric::Kind::sphere) {
        keys.noalias() = e->coords * (x.transpose() * (-1.0 / (e->radius * e->radius)));
      } else {
        keys = (e->coords.rowwise() - x).rowwise().squaredNorm();
      }
    } else {
      for (int j = 0; j < n; ++j) out[j] = embedded_key(*e, i, j);
    }
    if (e->kind == EmbeddedMetric::Kind::sphere) out[i] = -1.0;
    if (e->kind == EmbeddedMetric::Kind::hyperbolic) out[i] = 1.0;
    return;
  }
  if (const auto* p = std::get_if<ProductMetric>(&metric_)) {
    const int n2 = static_cast<int>(p->second->size());
    const int n1 = static_cast<int>(p->first->size());
    std::vector<double> a(n1), b(n2);
    p->first->distances_from(i / n2, a);
    p->second->distances_from(i % n2, b);
    for (int x = 0; x < n1; ++x)
      for (int y = 0; y < n2; ++y) out[x * n2 + y] = a[x] * a[x] + b[y] * b[y];
    return;
  }
  base_distances_from(i, out);
}

double FiniteMMSpace::key_threshold(double r) const {
  const double base = r * (1 + kBallTolerance) / scale_;
  if (const auto* e = std::get_if<EmbeddedMetric>(&metric_)) return embedded_threshold(*e, base);
  if (std::holds_alternative<ProductMetric>(metric_)) return base * base;
  return base;
}

double FiniteMMSpace::max_distance() const {
  const int n = static_cast<int>(size());
  std::vector<double> row(n);
  double best = 0;
  for (int i = 0; i < n; ++i) {
    distances_from(i, row);
    best = std::max(best, *std::max_element(row.begin(), row.end()));
  }
  return best;
}

double FiniteMMSpace::key_to_distance(double key) const {
  if (const auto* e = std::get_if<EmbeddedMetric>(&metric_)) return scale_ * embedded_key_to_distance(*e, key);
  if (std::holds_alternative<ProductMetric>(metric_)) return scale_ * std::sqrt(std::max(key, 0.0));
  return scale_ * key;
}

double FiniteMMSpace::compute_resolution() const {
  const int n = static_cast<int>(size());
  if (n == 1) return 0.0;
  std::vector<double> nearest;
  nearest.reserve(n);
  std::vector<double> keys(n);
  for (int i = 0; i < n; ++i) {
    keys_from(i, keys);
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (j == i || keys[j] >= best) continue;
      if (key_to_distance(keys[j]) > 0) best = keys[j];
    }
    if (std::isfinite(best)) nearest.push_back(key_to_distance(best));
  }
  if (nearest.empty()) return 0.0;
  const auto mid = nearest.size() / 2;
  std::nth_element(nearest.begin(), nearest.begin() + mid, nearest.end());
  if (nearest.size() % 2 == 1) return nearest[mid];
  const double upper = nearest[mid];
  const double lower = *std::max_element(nearest.begin(), nearest.begin() + mid);
  return 0.5 * (lower + upper);
}

double ball_measure(const FiniteMMSpace& space, int center, double r) {
  space.check_index(center);
  if (r < 0) throw DomainError("ball_measure: negative radius");
  std::vector<double> keys(space.size());
  space.keys_from(center, keys);
  const double threshold = space.key_threshold(r);
  double total = 0;
  for (std::size_t j = 0; j < keys.size(); ++j)
    if (keys[j] <= threshold || static_cast<int>(j) == center) total += space.mass()(j);
  return total;
}

BallTable ball_table(const FiniteMMSpace& space, std::span<const double> radii, std::span<const int> centers) {
  BallTable table;
  table.radii.assign(radii.begin(), radii.end());
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (radii[k] < radii[k - 1]) throw DomainError("ball_table: radii must be nondecreasing");
  for (double r : radii)
    if (r < 0) throw DomainError("ball_table: negative radius");
  const int n = static_cast<int>(space.size());
  if (centers.empty()) {
    table.centers.resize(n);
    for (int i = 0; i < n; ++i) table.centers[i] = i;
  } else {
    table.centers.assign(centers.begin(), centers.end());
    for (int c : table.centers) space.check_index(c);
  }
  const auto kcount = static_cast<Eigen::Index>(radii.size());
  const auto ccount = static_cast<Eigen::Index>(table.centers.size());
  table.measure = Eigen::MatrixXd::Zero(ccount, kcount);
  table.count = Eigen::MatrixXi::Zero(ccount, kcount);
  std::vector<double> thresholds(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) thresholds[k] = space.key_threshold(radii[k]);
  std::vector<double> keys(n);
  std::vector<double> bin_mass(radii.size() + 1);
  std::vector<int> bin_count(radii.size() + 1);
  const auto& mass = space.mass();
  for (Eigen::Index c = 0; c < ccount; ++c) {
    const int center = table.centers[c];
    space.keys_from(center, keys);
    std::fill(bin_mass.begin(), bin_mass.end(), 0.0);
    std::fill(bin_count.begin(), bin_count.end(), 0);
    const double outer = thresholds.back();
    for (int j = 0; j < n; ++j) {
      if (keys[j] > outer && j != center) continue;
      // First radius whose closed ball contains j.
      const auto bin = j == center ? 0
                                   : std::lower_bound(thresholds.begin(), thresholds.end(), keys[j]) -
                                         thresholds.begin();
      bin_mass[bin] += mass(j);
      bin_count[bin] += 1;
    }
    double running = 0;
    int running_count = 0;
    for (Eigen::Index k = 0; k < kcount; ++k) {
      running += bin_mass[k];
      running_count += bin_count[k];
      table.measure(c, k) = running;
      table.count(c, k) = running_count;
    }
  }
  return table;
}

double ball_sigma(const FiniteMMSpace& space, double measure, int count, double r) {
  if (count <= 0) return 0.0;
  const double atom = measure / count;
  const double n_atoms = static_cast<double>(space.size());
  switch (space.sampling()) {
    case Sampling::exact: return 0.0;
    case Sampling::iid: return atom * std::sqrt(count * std::max(0.0, 1.0 - count / n_atoms));
    case Sampling::lattice:
    case Sampling::stratified: {
      if (!(r > 0)) return 0.0;
      // Atoms whose cells straddle the sphere of radius r: a shell of width
      // 2h holds about n * count * 2h / r of them, each a Bernoulli with
      // variance averaging 1/6.
      const double shell = space.dim_hint() * count * 2.0 * space.resolution() / r;
      return atom * std::sqrt(shell / 6.0);
    }
  }
  return 0.0;
}

NdimReport ndim_condition_fit(const FiniteMMSpace& space, int n, double r_lo, double r_hi, double tolerance,
                              double grid_ratio) {
  NdimReport report;
  report.n = n;
  report.r_lo = r_lo;
  report.r_hi = r_hi;
  report.tolerance = tolerance;
  const double h = space.resolution();
  if (n < 1) throw DomainError("ndim_condition_fit: dimension must be >= 1");
  if (!(r_hi > r_lo)) throw PreconditionError("ndim_condition_fit: window needs r_hi > r_lo");
  if (r_lo < 2 * h * (1 - 1e-9)) {
    throw PreconditionError("ndim_condition_fit: window start " + std::to_string(r_lo) +
                            " is below twice the resolution h = " + std::to_string(h));
  }
  for (double r = r_lo; r <= r_hi * (1 + 1e-12); r *= grid_ratio) report.radii.push_back(r);
  if (report.radii.size() < 3) {
    report.radii = {r_lo, 0.5 * (r_lo + r_hi), r_hi};
  }
  const BallTable table = ball_table(space, report.radii);
  std::vector<double> ratios(report.radii.size());
  std::vector<double> weights(report.radii.size());
  report.intercepts.resize(table.centers.size());
  for (std::size_t c = 0; c < table.centers.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    for (std::size_t k = 0; k < report.radii.size(); ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      const double mu = table.measure(ci, ki);
      ratios[k] = mu / euclidean_ball_volume(n, report.radii[k]);
      // Inverse-variance weights; the floor keeps exact spaces equally weighted.
      const double rel = ball_sigma(space, mu, table.count(ci, ki), report.radii[k]) / mu;
      weights[k] = 1.0 / (rel * rel + 1e-6);
    }
    const ExpansionFit fit = fit_free_intercept(report.radii, ratios, weights);
    report.intercepts[c] = fit.intercept;
    report.max_deviation = std::max(report.max_deviation, std::abs(fit.intercept - 1.0));
  }
  report.pass = report.max_deviation <= tolerance;
  report.note = "r -> 0 limit extrapolated from radii in [" + std::to_string(r_lo) + ", " +
                std::to_string(r_hi) + "]; scales below 2h are not resolved";
  return report;
}

FiniteMMSpace scale_space(const FiniteMMSpace& space, double lambda) {
  if (!(lambda > 0)) throw DomainError("scale_space: lambda must be positive");
  const double mass_factor = std::pow(lambda, space.dim_hint());
  Eigen::VectorXd mass = space.mass() * mass_factor;
  return FiniteMMSpace(space.metric(), std::move(mass), space.dim_hint(), space.sampling(),
                       space.scale() * lambda, space.provenance());
}

FiniteMMSpace product_space(const FiniteMMSpace& first, const FiniteMMSpace& second, std::size_t budget) {
  const std::size_t total = first.size() * second.size();
  if (total > budget) {
    throw ResourceError("product_space: " + std::to_string(total) + " atoms exceeds budget " +
                        std::to_string(budget));
  }
  const auto n1 = static_cast<Eigen::Index>(first.size());
  const auto n2 = static_cast<Eigen::Index>(second.size());
  Eigen::VectorXd mass(n1 * n2);
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index j = 0; j < n2; ++j) mass(i * n2 + j) = first.mass()(i) * second.mass()(j);
  auto combine = [](Sampling a, Sampling b) {
    if (a == Sampling::iid || b == Sampling::iid) return Sampling::iid;
    if (a == Sampling::stratified || b == Sampling::stratified) return Sampling::stratified;
    if (a == Sampling::lattice || b == Sampling::lattice) return Sampling::lattice;
    return Sampling::exact;
  };
  ProductMetric metric{std::make_shared<const FiniteMMSpace>(first), std::make_shared<const FiniteMMSpace>(second)};
  return FiniteMMSpace(std::move(metric), std::move(mass), first.dim_hint() + second.dim_hint(),
                       combine(first.sampling(), second.sampling()));
}

FiniteMMSpace restrict_space(const FiniteMMSpace& space, std::vector<int> indices) {
  if (indices.empty()) throw DomainError("restrict_space: empty subset");
  Eigen::VectorXd mass(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    space.check_index(indices[k]);
    mass(static_cast<Eigen::Index>(k)) = space.mass()(indices[k]);
  }
  SubsetMetric metric{std::make_shared<const FiniteMMSpace>(space), std::move(indices)};
  return FiniteMMSpace(std::move(metric), std::move(mass), space.dim_hint(), space.sampling());
}

IsometryCheck check_isometry(std::span<const int> map, const FiniteMMSpace& source, const FiniteMMSpace& target) {
  IsometryCheck result;
  const int n = static_cast<int>(source.size());
  if (static_cast<int>(map.size()) != n) throw PreconditionError("check_isometry: map must be total on the source");
  std::vector<int> hits(target.size(), 0);
  for (int v : map) {
    target.check_index(v);
    ++hits[v];
  }
  result.bijective = source.size() == target.size() && std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
  std::vector<double> row_x(n), row_y(target.size());
  double max_dist = 0;
  for (int a = 0; a < n; ++a) {
    source.distances_from(a, row_x);
    target.distances_from(map[a], row_y);
    for (int b = 0; b < n; ++b) {
      result.distance_defect = std::max(result.distance_defect, std::abs(row_y[map[b]] - row_x[b]));
      max_dist = std::max(max_dist, row_x[b]);
    }
  }
  // Pushforward f_* mu compared with the target measure atom by atom.
  Eigen::VectorXd pushed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target.size()));
  for (int a = 0; a < n; ++a) pushed(map[a]) += source.mass()(a);
  for (Eigen::Index y = 0; y < pushed.size(); ++y) {
    const double ref = target.mass()(y);
    result.mass_defect = std::max(result.mass_defect, std::abs(pushed(y) - ref) / ref);
  }
  result.isometric = result.bijective && result.distance_defect <= 1e-9 * std::max(1.0, max_dist) &&
                     result.mass_defect <= 1e-12;
  return result;
}

Eigen::MatrixXd distance_matrix(const FiniteMMSpace& space) {
  const int n = static_cast<int>(space.size());
  Eigen::MatrixXd d(n, n);
  std::vector<double> row(n);
  for (int i = 0; i < n; ++i) {
    space.distances_from(i, row);
    for (int j = 0; j < n; ++j) d(i, j) = row[j];
  }
  return d;
}

}  // namespace scurv
