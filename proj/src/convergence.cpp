#include "scurv/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scurv/errors.hpp"
#include "scurv/model_spaces.hpp"

namespace scurv {

namespace {

void validate(const MapBetweenSpaces& map) {
  if (!map.source || !map.target) throw PreconditionError("map: source and target required");
  if (map.assignment.size() != map.source->size()) throw PreconditionError("map: assignment must be total");
  for (int y : map.assignment) map.target->check_index(y);
}

}  // namespace

DistortionReport epsilon_isometry_defect(const MapBetweenSpaces& map) {
  validate(map);
  const auto& x = *map.source;
  const auto& y = *map.target;
  const int nx = static_cast<int>(x.size());
  const int ny = static_cast<int>(y.size());
  DistortionReport rep;
  std::vector<double> dx(nx), dy(ny);
  std::vector<double> nearest(ny, std::numeric_limits<double>::infinity());
  for (int a = 0; a < nx; ++a) {
    x.distances_from(a, dx);
    y.distances_from(map.assignment[a], dy);
    for (int b = 0; b < nx; ++b) rep.distortion = std::max(rep.distortion, std::abs(dx[b] - dy[map.assignment[b]]));
    for (int t = 0; t < ny; ++t) nearest[t] = std::min(nearest[t], dy[t]);
  }
  rep.surjectivity_defect = *std::max_element(nearest.begin(), nearest.end());
  rep.epsilon = std::max(rep.distortion, rep.surjectivity_defect);
  return rep;
}

double total_variation_distance(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu) {
  if (mu.size() != nu.size()) throw DomainError("total_variation_distance: index sets differ");
  const Eigen::ArrayXd diff = (mu - nu).array();
  const double pos = diff.max(0.0).sum();
  const double neg = (-diff).max(0.0).sum();
  return std::max(pos, neg);
}

Eigen::VectorXd pushforward(const MapBetweenSpaces& map) {
  validate(map);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.target->size()));
  for (std::size_t a = 0; a < map.assignment.size(); ++a) out(map.assignment[a]) += map.source->mass()(static_cast<Eigen::Index>(a));
  return out;
}

StabilityReport stability_experiment(const std::vector<FiniteMMSpace>& sequence,
                                     const std::vector<std::vector<int>>& maps, const FiniteMMSpace& limit, int n,
                                     double kappa, double big_r, const StabilityConfig& config) {
  if (sequence.empty()) throw PreconditionError("stability_experiment: empty sequence");
  if (maps.size() != sequence.size()) throw PreconditionError("stability_experiment: one map per member required");
  auto certify = [&](const FiniteMMSpace& s, const CertifierConfig& cfg) {
    return kappa > 0 ? certify_kappa(s, n, kappa, big_r, cfg) : certify_nonneg(s, n, big_r, cfg);
  };
  StabilityReport rep;
  rep.radius_tolerance = config.radius_tolerance;
  CertifierConfig limit_cfg = config.certifier;
  limit_cfg.ledger_size = std::max(limit_cfg.ledger_size, config.inflation_entries);
  rep.limit_certificate = certify(limit, limit_cfg);
  rep.limit_pass = rep.limit_certificate.sc_radius >= big_r * (1 - config.radius_tolerance);
  const double strict = kappa > 0 ? 1 - config.certifier.slack : 1.0;

  std::vector<double> dy(limit.size());
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const FiniteMMSpace& member = sequence[i];
    const CertificateResult cert = certify(member, config.certifier);
    if (!cert.pass || cert.sc_radius < big_r * (1 - 1e-12)) {
      throw PreconditionError("stability_experiment: member " + std::to_string(i) +
                              " is not certified up to radius " + std::to_string(big_r));
    }
    const MapBetweenSpaces map{&member, &limit, maps[i]};
    StabilityStep step;
    step.distortion = epsilon_isometry_defect(map);
    step.tv = total_variation_distance(pushforward(map), limit.mass());
    step.sc_radius = cert.sc_radius;
    const double eps = step.distortion.epsilon;

    // f_i^{-1}(B_r(x)) lies in B_{r + 4 eps}(x_i); its measure is then bounded
    // by the member's own certificate at the inflated radius.
    const auto& ledger = rep.limit_certificate.worst_margins;
    const int m = static_cast<int>(member.size());
    std::vector<double> dm(m);
    step.inflation_holds = true;
    for (int e = 0; e < std::min<int>(config.inflation_entries, static_cast<int>(ledger.size())); ++e) {
      const MarginEntry& entry = ledger[e];
      InflationCheck chk;
      chk.point = entry.point;
      chk.r = entry.eps;
      chk.gamma = entry.gamma;
      const double r_in = entry.eps + 4 * eps;
      if (r_in > big_r * (1 + 1e-12)) {
        ++step.inflation_skipped;
        continue;
      }
      limit.distances_from(entry.point, dy);
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < m; ++a) {
        if (dy[map.assignment[a]] < best) {
          best = dy[map.assignment[a]];
          chk.preimage = a;
        }
      }
      member.distances_from(chk.preimage, dm);
      chk.inclusion = true;
      for (int a = 0; a < m; ++a) {
        if (dy[map.assignment[a]] <= entry.eps * (1 + kBallTolerance) && dm[a] > r_in * (1 + kBallTolerance)) {
          chk.inclusion = false;
        }
      }
      chk.member_measure = ball_measure(member, chk.preimage, r_in);
      int count = 0;
      for (int a = 0; a < m; ++a) count += dm[a] <= r_in * (1 + kBallTolerance) ? 1 : 0;
      chk.sigma = ball_sigma(member, chk.member_measure, count, r_in);
      chk.model_bound = strict * (entry.gamma > 0 ? product_ball_volume(entry.gamma, n, r_in) : euclidean_ball_volume(n, r_in));
      chk.holds = chk.inclusion && chk.member_measure - chk.model_bound <= cert.sigma_factor * chk.sigma;
      step.inflation_holds = step.inflation_holds && chk.holds;
      step.inflation.push_back(chk);
    }
    rep.steps.push_back(std::move(step));
  }
  rep.epsilon_nonincreasing = rep.tv_decreasing = rep.tv_nonincreasing = true;
  rep.inflation_all = true;
  for (std::size_t i = 0; i < rep.steps.size(); ++i) {
    rep.inflation_all = rep.inflation_all && rep.steps[i].inflation_holds;
    if (i == 0) continue;
    const auto& prev = rep.steps[i - 1];
    const auto& cur = rep.steps[i];
    if (cur.distortion.epsilon > prev.distortion.epsilon) rep.epsilon_nonincreasing = false;
    if (!(cur.tv < prev.tv)) rep.tv_decreasing = false;
    if (cur.tv > prev.tv) rep.tv_nonincreasing = false;
  }
  return rep;
}

std::vector<PointedSpace> tangent_rescale_sequence(const FiniteMMSpace& space, int p,
                                                   const std::vector<double>& lambdas, double r0) {
  space.check_index(p);
  if (!(r0 > 0)) throw DomainError("tangent_rescale_sequence: r0 must be positive");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0)) throw DomainError("tangent_rescale_sequence: factors must be positive");
    if (k > 0 && !(lambdas[k] > lambdas[k - 1])) throw DomainError("tangent_rescale_sequence: factors must increase");
  }
  std::vector<double> d(space.size());
  space.distances_from(p, d);
  std::vector<int> ball;
  int base = 0;
  for (int j = 0; j < static_cast<int>(d.size()); ++j) {
    if (d[j] <= r0 * (1 + kBallTolerance)) {
      if (j == p) base = static_cast<int>(ball.size());
      ball.push_back(j);
    }
  }
  // The lambda r0 ball of lambda X is the image of the r0 ball of X.
  const FiniteMMSpace patch = restrict_space(space, ball);
  std::vector<PointedSpace> out;
  for (double lambda : lambdas) out.push_back({scale_space(patch, lambda), base, lambda});
  return out;
}

}  // namespace scurv
