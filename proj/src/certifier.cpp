#include "scurv/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "scurv/errors.hpp"
#include "scurv/model_spaces.hpp"

namespace scurv {

namespace {

// Entries sort by how far they exceed the tolerance band, then by position,
// so the ledger does not depend on evaluation order.
double excess(const MarginEntry& e, double sigma_factor) { return e.margin - sigma_factor * e.sigma; }

struct Ledger {
  std::size_t capacity;
  double sigma_factor;
  std::vector<MarginEntry> entries;

  bool before(const MarginEntry& a, const MarginEntry& b) const {
    const double ea = excess(a, sigma_factor);
    const double eb = excess(b, sigma_factor);
    if (ea != eb) return ea > eb;
    if (a.point != b.point) return a.point < b.point;
    if (a.eps != b.eps) return a.eps < b.eps;
    return a.gamma < b.gamma;
  }

  void add(const MarginEntry& e) {
    entries.push_back(e);
    if (entries.size() >= 4 * capacity + 64) shrink();
  }

  void shrink() {
    if (entries.size() <= capacity) return;
    std::nth_element(entries.begin(), entries.begin() + static_cast<long>(capacity), entries.end(),
                     [this](const MarginEntry& a, const MarginEntry& b) { return before(a, b); });
    entries.resize(capacity);
  }

  std::vector<MarginEntry> finish() {
    shrink();
    std::sort(entries.begin(), entries.end(),
              [this](const MarginEntry& a, const MarginEntry& b) { return before(a, b); });
    return entries;
  }
};

void check_common(const FiniteMMSpace& space, int n, const std::vector<double>& eps,
                  const CertifierConfig& config) {
  if (n < 1) throw DomainError("certify: dimension must be >= 1");
  if (space.size() < 2) throw PreconditionError("certify: need at least two atoms to resolve a scale");
  if (eps.empty()) throw PreconditionError("certify: empty epsilon grid");
  const double h = space.resolution();
  if (eps.back() < 4 * h * (1 - 1e-12)) {
    throw PreconditionError("certify: test radius " + std::to_string(eps.back()) +
                            " is below 4h = " + std::to_string(4 * h));
  }
  if (config.require_ndim) {
    const NdimReport nd = ndim_condition_fit(space, n, 2 * h, eps.back(), config.ndim_tolerance,
                                             config.grid_ratio);
    if (!nd.pass) {
      throw PreconditionError("certify: the " + std::to_string(n) +
                              "-dimensional condition fails (max intercept deviation " +
                              std::to_string(nd.max_deviation) + ")");
    }
  }
}

// Runs the comparison for one family of model volumes per gamma.
CertificateResult run(const FiniteMMSpace& space, int n, double kappa, const BallTable& table,
                      const std::vector<double>& gammas, const CertifierConfig& config) {
  CertificateResult res;
  res.n = n;
  res.kappa = kappa;
  res.slack = config.slack;
  res.sampling = to_string(space.sampling());
  res.resolution = space.resolution();
  res.eps_grid = table.radii;
  res.gamma_grid = gammas;
  res.min_radius = config.min_radius > 0 ? config.min_radius : table.radii.back();

  const double strict = kappa > 0 ? 1 - config.slack : 1.0;
  const auto n_eps = static_cast<Eigen::Index>(table.radii.size());
  const auto n_pts = static_cast<Eigen::Index>(table.centers.size());

  // Sigma depends only on the table, not on the model.
  Eigen::MatrixXd sigma(n_pts, n_eps);
  for (Eigen::Index c = 0; c < n_pts; ++c)
    for (Eigen::Index k = 0; k < n_eps; ++k)
      sigma(c, k) = ball_sigma(space, table.measure(c, k), table.count(c, k), table.radii[k]);

  const std::vector<double> family = gammas.empty() ? std::vector<double>{0.0} : gammas;
  const double band = space.sampling() == Sampling::exact
                          ? config.sigma_factor
                          : familywise_band(config.sigma_factor, config.familywise_alpha,
                                            static_cast<long long>(n_pts) * n_eps * static_cast<long long>(family.size()));
  res.sigma_factor = band;
  Ledger ledger{static_cast<std::size_t>(std::max(config.ledger_size, 0)), band, {}};
  double sc = std::numeric_limits<double>::infinity();
  for (double gamma : family) {
    double r_gamma = -1;
    for (Eigen::Index k = 0; k < n_eps; ++k) {
      const double eps = table.radii[k];
      const double model = gamma > 0 ? product_ball_volume(gamma, n, eps) : euclidean_ball_volume(n, eps);
      const double bound = strict * model;
      bool violated = false;
      for (Eigen::Index c = 0; c < n_pts; ++c) {
        const MarginEntry e{table.centers[c], eps, gamma, table.measure(c, k) - bound, sigma(c, k)};
        ++res.comparisons;
        if (e.margin > band * e.sigma) {
          violated = true;
          ++res.violations;
        } else if (e.margin > 0) {
          ++res.inconclusive;
        }
        if (ledger.capacity > 0) ledger.add(e);
      }
      if (violated && r_gamma < 0) r_gamma = k == 0 ? 0.0 : table.radii[k - 1];
    }
    if (r_gamma < 0) r_gamma = table.radii.back();
    res.gamma_radius.push_back(r_gamma);
    sc = std::min(sc, r_gamma);
  }
  res.sc_radius = sc;
  res.pass = res.sc_radius >= res.min_radius;
  res.worst_margins = ledger.finish();
  std::ostringstream note;
  note << "strict comparisons use slack " << config.slack << "; margins within " << band
       << " sigma are inconclusive (" << res.inconclusive << " of " << res.comparisons
       << "); sc_radius is the infimum over the tested grid only";
  res.note = note.str();
  return res;
}

std::vector<double> resolve_eps(const FiniteMMSpace& space, double big_r, const CertifierConfig& config) {
  if (!config.eps_grid.empty()) return config.eps_grid;
  if (!(big_r > 0)) throw DomainError("certify: radius must be positive");
  return epsilon_grid(space.resolution(), big_r, config.grid_ratio);
}

}  // namespace

double familywise_band(double base, double alpha, long long comparisons) {
  if (!(alpha > 0) || comparisons < 1) return base;
  const double tail = alpha / static_cast<double>(comparisons);
  // Solve erfc(z / sqrt 2) / 2 = tail by bisection; the tail is monotone in z.
  double lo = 0, hi = 40;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(mid / std::numbers::sqrt2) > tail) lo = mid;
    else hi = mid;
  }
  return std::max(base, 0.5 * (lo + hi));
}

std::vector<double> epsilon_grid(double h, double big_r, double ratio) {
  if (!(ratio > 1)) throw DomainError("epsilon_grid: ratio must exceed 1");
  std::vector<double> grid;
  for (double e = 2 * h; e < big_r * (1 - 1e-12); e *= ratio) grid.push_back(e);
  grid.push_back(big_r);
  return grid;
}

std::vector<double> gamma_grid(double kappa, int points, double max_factor) {
  if (!(kappa > 0)) throw DomainError("gamma_grid: kappa must be positive");
  if (points < 1) throw DomainError("gamma_grid: need at least one point");
  const double g0 = std::sqrt(2 / kappa);
  const double lo = std::log(g0 * (1 + 1e-3));
  const double hi = std::log(g0 * max_factor);
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = points == 1 ? std::exp(lo) : std::exp(lo + (hi - lo) * i / (points - 1));
  return grid;
}

CertificateResult certify_nonneg(const FiniteMMSpace& space, int n, const BallTable& table,
                                 const CertifierConfig& config) {
  check_common(space, n, table.radii, config);
  return run(space, n, 0.0, table, {}, config);
}

CertificateResult certify_kappa(const FiniteMMSpace& space, int n, double kappa, const BallTable& table,
                                const CertifierConfig& config) {
  if (!(kappa > 0)) throw DomainError("certify_kappa: kappa must be positive; use certify_nonneg");
  if (n < 2) throw DomainError("certify_kappa: the product model needs n >= 2");
  check_common(space, n, table.radii, config);
  const std::vector<double> gammas = config.gamma_grid.empty()
                                         ? gamma_grid(kappa, config.gamma_points, config.gamma_max_factor)
                                         : config.gamma_grid;
  return run(space, n, kappa, table, gammas, config);
}

CertificateResult certify_nonneg(const FiniteMMSpace& space, int n, double big_r, const CertifierConfig& config) {
  const auto eps = resolve_eps(space, big_r, config);
  check_common(space, n, eps, config);
  CertifierConfig inner = config;
  inner.require_ndim = false;
  return certify_nonneg(space, n, ball_table(space, eps), inner);
}

CertificateResult certify_kappa(const FiniteMMSpace& space, int n, double kappa, double big_r,
                                const CertifierConfig& config) {
  if (!(kappa > 0)) throw DomainError("certify_kappa: kappa must be positive; use certify_nonneg");
  const auto eps = resolve_eps(space, big_r, config);
  check_common(space, n, eps, config);
  CertifierConfig inner = config;
  inner.require_ndim = false;
  return certify_kappa(space, n, kappa, ball_table(space, eps), inner);
}

LowerBoundEstimate estimate_lower_bound(const FiniteMMSpace& space, int n, double big_r,
                                        const CertifierConfig& config, double rel_tol) {
  LowerBoundEstimate est;
  const auto eps = resolve_eps(space, big_r, config);
  check_common(space, n, eps, config);
  CertifierConfig inner = config;
  inner.require_ndim = false;
  inner.ledger_size = 0;
  const BallTable table = ball_table(space, eps);
  est.nonneg_pass = certify_nonneg(space, n, table, inner).pass;
  ++est.evaluations;
  if (!est.nonneg_pass) return est;

  // A bound kappa shrinks model balls at radius R by about kappa R^2/(6(n+2)).
  // Below the noise of the largest balls (two sigma bands, one for the space
  // and one for a hypothetical space matching the model) it is not resolvable.
  const auto last = static_cast<Eigen::Index>(eps.size()) - 1;
  std::vector<double> rel(table.centers.size());
  for (std::size_t c = 0; c < rel.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    rel[c] = ball_sigma(space, table.measure(ci, last), table.count(ci, last), eps.back()) / table.measure(ci, last);
  }
  std::nth_element(rel.begin(), rel.begin() + static_cast<long>(rel.size() / 2), rel.end());
  const double rel_sigma = rel[rel.size() / 2];
  const double band = space.sampling() == Sampling::exact
                          ? config.sigma_factor
                          : familywise_band(config.sigma_factor, config.familywise_alpha,
                                            static_cast<long long>(table.centers.size() * eps.size()) *
                                                std::max(config.gamma_points, 1));
  est.kappa_floor = 6.0 * (n + 2) * 2 * band * rel_sigma / (eps.back() * eps.back());

  auto passes = [&](double kappa) {
    const bool ok = certify_kappa(space, n, kappa, table, inner).pass;
    ++est.evaluations;
    est.trace.emplace_back(kappa, ok);
    return ok;
  };
  double lo = 0, hi = 0;
  double probe = std::max(1.0, est.kappa_floor);
  if (passes(probe)) {
    lo = probe;
    for (hi = 2 * probe; passes(hi); hi *= 2) {
      lo = hi;
      if (hi > 1e12) return est;
    }
  } else {
    hi = probe;
    for (lo = probe / 2; lo >= est.kappa_floor && !passes(lo); lo /= 2) hi = lo;
    if (lo < est.kappa_floor) return est;
  }
  while ((hi - lo) > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (passes(mid)) lo = mid;
    else hi = mid;
  }
  est.kappa_hat = lo >= est.kappa_floor ? lo : 0.0;
  return est;
}

BgReport bishop_gromov_check(const FiniteMMSpace& space, int n, double kappa, const BgConfig& config) {
  if (kappa < 0) throw DomainError("bishop_gromov_check: kappa must be nonnegative");
  if (n < 2) throw DomainError("bishop_gromov_check: dimension must be >= 2");
  BgReport rep;
  rep.n = n;
  rep.kappa = kappa;
  const double h = space.resolution();
  double r_max = config.r_max;
  if (!(r_max > 0)) r_max = std::min(bg_radius_cap(n, kappa), 0.5 * space.max_distance());
  r_max = std::min(r_max, bg_radius_cap(n, kappa));
  if (!(r_max > 2 * h)) throw PreconditionError("bishop_gromov_check: no radii between 2h and the cap");
  rep.radii = epsilon_grid(h, r_max, config.grid_ratio);
  const BallTable table = ball_table(space, rep.radii);
  const auto n_r = static_cast<Eigen::Index>(rep.radii.size());
  std::vector<double> profile(rep.radii.size());
  for (std::size_t k = 0; k < rep.radii.size(); ++k) {
    // bg_ratio(r, R) = profile(r) (r/R)^n / profile(R); cache the profile once.
    profile[k] = bg_ratio(n, kappa, rep.radii[k], rep.radii.back());
  }
  const long long pairs = static_cast<long long>(n_r) * (n_r - 1) / 2;
  const double band = space.sampling() == Sampling::exact
                          ? config.sigma_factor
                          : familywise_band(config.sigma_factor, config.familywise_alpha,
                                            static_cast<long long>(table.centers.size()) * pairs);
  rep.sigma_factor = band;
  std::vector<BgViolation> all;
  for (std::size_t c = 0; c < table.centers.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    for (Eigen::Index a = 0; a < n_r; ++a) {
      const double ma = table.measure(ci, a);
      const double sa = ball_sigma(space, ma, table.count(ci, a), rep.radii[a]) / ma;
      for (Eigen::Index b = a + 1; b < n_r; ++b) {
        const double mb = table.measure(ci, b);
        const double sb = ball_sigma(space, mb, table.count(ci, b), rep.radii[b]) / mb;
        const double ratio = ma / mb;
        const double bound = profile[a] / profile[b];
        const double sigma = ratio * std::hypot(sa, sb);
        ++rep.checked;
        if (ratio < bound * (1 - 1e-12) - band * sigma) {
          ++rep.violation_count;
          all.push_back({table.centers[c], rep.radii[a], rep.radii[b], ratio, bound, sigma});
          if (all.size() > 4 * static_cast<std::size_t>(config.ledger_size) + 64) {
            auto worse = [](const BgViolation& x, const BgViolation& y) {
              const double dx = x.bound - x.ratio, dy = y.bound - y.ratio;
              if (dx != dy) return dx > dy;
              if (x.point != y.point) return x.point < y.point;
              if (x.r != y.r) return x.r < y.r;
              return x.big_r < y.big_r;
            };
            std::sort(all.begin(), all.end(), worse);
            all.resize(config.ledger_size);
          }
        }
      }
    }
  }
  std::sort(all.begin(), all.end(), [](const BgViolation& x, const BgViolation& y) {
    const double dx = x.bound - x.ratio, dy = y.bound - y.ratio;
    if (dx != dy) return dx > dy;
    if (x.point != y.point) return x.point < y.point;
    if (x.r != y.r) return x.r < y.r;
    return x.big_r < y.big_r;
  });
  if (all.size() > static_cast<std::size_t>(config.ledger_size)) all.resize(config.ledger_size);
  rep.violations = std::move(all);
  return rep;
}

CdReport verify_cd_theorem(const FiniteMMSpace& space, int n, double kappa, double big_r, double slack,
                           const CertifierConfig& config, const BgConfig& bg_config) {
  CdReport rep;
  rep.n = n;
  rep.kappa_cd = kappa;
  rep.slack = slack;
  rep.certified_kappa = n * kappa * (1 - slack);
  const double h = space.resolution();
  rep.ndim_pass = ndim_condition_fit(space, n, 2 * h, big_r, config.ndim_tolerance, config.grid_ratio).pass;
  rep.bg = bishop_gromov_check(space, n, kappa, bg_config);
  rep.bg_consistent = rep.bg.consistent();
  rep.preconditions_hold = rep.ndim_pass && rep.bg_consistent;
  CertifierConfig inner = config;
  inner.require_ndim = false;
  rep.certificate = kappa > 0 ? certify_kappa(space, n, rep.certified_kappa, big_r, inner)
                              : certify_nonneg(space, n, big_r, inner);
  rep.conclusion_holds = rep.certificate.pass;
  return rep;
}

}  // namespace scurv
