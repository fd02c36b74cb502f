#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>

#include "klpred/model.hpp"

namespace klpred {

// Marginal m(z; v) of Z ~ N(mu, vI) with mu drawn from the prior.  Improper
// priors are carried up to one fixed constant per prior shape; every
// downstream formula uses only log-marginal differences under a single
// prior, so the constant drops out.
struct MarginalValue {
  double log_value = 0.0;
  double abs_error_bound = 0.0;  // on log_value; 0 for closed forms
};

// One evaluation of log m with its first two derivative summaries and
// propagated error bounds.  grad is the gradient of log m; lap_ratio is
// laplacian(m)/m = laplacian(log m) + |grad|^2.
struct MarginalDerivatives {
  double log_value = 0.0;
  Eigen::VectorXd grad;
  double lap_ratio = 0.0;
  double log_error = 0.0;   // bound on log_value
  double grad_error = 0.0;  // per-component bound on grad
  double lap_error = 0.0;   // bound on lap_ratio

  // laplacian(sqrt m)/sqrt m = lap_ratio/2 - |grad|^2/4, pointwise.
  double sqrt_ratio() const {
    return 0.5 * lap_ratio - 0.25 * grad.squaredNorm();
  }
  double sqrt_ratio_error() const {
    return 0.5 * lap_error + 0.5 * grad.lpNorm<1>() * grad_error;
  }
};

MarginalValue log_marginal(const Prior& prior, const Eigen::VectorXd& z,
                           double v);

MarginalDerivatives marginal_derivatives(const Prior& prior,
                                         const Eigen::VectorXd& z, double v);

Eigen::VectorXd grad_log_marginal(const Prior& prior, const Eigen::VectorXd& z,
                                  double v);

double laplacian_ratio(const Prior& prior, const Eigen::VectorXd& z, double v);

double sqrt_laplacian_ratio(const Prior& prior, const Eigen::VectorXd& z,
                            double v);

// Posterior mean E(mu | Z = x) = x + v grad_log_marginal(x; v).
Eigen::VectorXd posterior_mean(const Prior& prior, const Eigen::VectorXd& x,
                               double v);

// Radial view of log m for priors symmetric about one center: g(u) is
// log m at z = center + sqrt(v) u e1, and g1, g2 its u-derivatives
// (g1, g2 need u > 0 except where noted in the implementation).  Empty for
// subspace and mixture priors.
struct RadialProfile {
  std::function<double(double)> g;
  std::function<double(double)> g1;
  std::function<double(double)> g2;
};

std::optional<RadialProfile> radial_profile(const Prior& prior, int p,
                                            double v);

}  // namespace klpred
