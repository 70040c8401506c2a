#include "scurv/fit.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "scurv/errors.hpp"

namespace scurv {

namespace {

ExpansionFit solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& rhs) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  ExpansionFit fit;
  fit.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  fit.ill_conditioned = !(fit.condition < 1e8);
  Eigen::VectorXd coef = svd.solve(rhs);
  fit.r2 = coef(0);
  if (coef.size() > 1) fit.r4 = coef(1);
  return fit;
}

}  // namespace

ExpansionFit fit_fixed_intercept(std::span<const double> radii, std::span<const double> ratios,
                                 bool quartic) {
  const auto m = static_cast<Eigen::Index>(radii.size());
  if (m != static_cast<Eigen::Index>(ratios.size())) throw DomainError("fit: size mismatch");
  if (m < (quartic ? 2 : 1)) throw DomainError("fit: too few samples");
  Eigen::MatrixXd design(m, quartic ? 2 : 1);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double r2 = radii[i] * radii[i];
    design(i, 0) = 1.0;
    if (quartic) design(i, 1) = r2;
    rhs(i) = (ratios[i] - 1.0) / r2;
  }
  ExpansionFit fit = solve(design, rhs);
  fit.intercept = 1.0;
  return fit;
}

ExpansionFit fit_free_intercept(std::span<const double> radii, std::span<const double> ratios,
                                std::span<const double> weights) {
  const auto m = static_cast<Eigen::Index>(radii.size());
  if (m != static_cast<Eigen::Index>(ratios.size())) throw DomainError("fit: size mismatch");
  if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != m) throw DomainError("fit: weight size");
  if (m < 2) throw DomainError("fit: too few samples");
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double w = weights.empty() ? 1.0 : std::sqrt(weights[i]);
    design(i, 0) = w;
    design(i, 1) = w * radii[i] * radii[i];
    rhs(i) = w * ratios[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd coef = svd.solve(rhs);
  const auto& sv = svd.singularValues();
  ExpansionFit fit;
  fit.intercept = coef(0);
  fit.r2 = coef(1);
  fit.condition = sv(1) > 0 ? sv(0) / sv(1) : std::numeric_limits<double>::infinity();
  fit.ill_conditioned = !(fit.condition < 1e8);
  return fit;
}

}  // namespace scurv
