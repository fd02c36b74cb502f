#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "klpred/model.hpp"
#include "klpred/predictive.hpp"

namespace klpred {

// Every estimate is bit-reproducible from (inputs, n, seed): one serial
// draw stream per call, no shared state.
struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

// KL(N(mu1, v1 I) || N(mu2, tau I)) with sq_dist = |mu1 - mu2|^2.
double gaussian_kl(int p, double v1, double tau, double sq_dist);

// Monte Carlo E_{y ~ N(mu, v_y I)} [log p(y|mu) - log density(y|x)].
RiskEstimate kl_loss(const PredictiveDensity& density,
                     const Eigen::VectorXd& mu, const Eigen::VectorXd& x,
                     std::uint64_t n, std::uint64_t seed);

// Exact KL loss where the predictive is Gaussian: the invariant and plug-in
// kinds always, the Bayes kind under a plain Gaussian prior.
std::optional<double> kl_loss_closed_form(const PredictiveDensity& density,
                                          const Eigen::VectorXd& mu,
                                          const Eigen::VectorXd& x);

// Risk: the loss averaged over x ~ N(mu, v_x I); one y draw per x draw.
RiskEstimate kl_risk(const PredictiveDensity& density,
                     const Eigen::VectorXd& mu, std::uint64_t n,
                     std::uint64_t seed);

// Direct estimate of risk(invariant) - risk(Bayes(prior)) through the
// marginal representation: E log m(mu + sqrt(v_w) Z; v_w) -
// E log m(mu + sqrt(v_x) Z; v_x) with one shared Z draw per sample, which
// cancels most of the variance and every improper-prior constant.
RiskEstimate risk_difference(const Prior& prior, const GaussianModel& model,
                             const Eigen::VectorXd& mu, std::uint64_t n,
                             std::uint64_t seed);

// (p/2) log(1 + v_x/v_y): the constant risk of the best-invariant density.
double risk_u_closed_form(const GaussianModel& model);

// Exact KL risk of the Bayes rule under a Gaussian prior with variance
// sigma2 and squared center offset |mu - b|^2.
double kl_risk_gaussian_closed_form(const GaussianModel& model, double sigma2,
                                    double sq_dist_mu_center);

// Unbiased quadratic-risk-reduction estimate in its two algebraic forms,
//   |grad log m|^2 - 2 lap m / m   and   -4 lap sqrt(m) / sqrt(m),
// the first from analytic derivatives, the second from an independent
// finite-difference Laplacian of sqrt(m) itself.
struct UrePair {
  double grad_form;
  double sqrt_form;
};
UrePair stein_ure(const Prior& prior, const Eigen::VectorXd& z, double v);

// Monte Carlo E |posterior_mean(X) - mu|^2 with X ~ N(mu, v I).
RiskEstimate quadratic_risk(const Prior& prior, double v,
                            const Eigen::VectorXd& mu, std::uint64_t n,
                            std::uint64_t seed);

// Two independent estimates of the quadratic-risk reduction over the
// maximum-likelihood rule: directly (lhs), and as -2 v^2 d/dv E log m(Z; v)
// by a central difference in v with common random numbers (rhs).
struct Eq25Sides {
  RiskEstimate lhs;
  RiskEstimate rhs;
};
Eq25Sides check_eq25(const Prior& prior, double v, const Eigen::VectorXd& mu,
                     std::uint64_t n, std::uint64_t seed, double dv = 0.0);

// Average-risk gap r(invariant) - r(Bayes) under the prior N(0, sigma2 I),
// in closed form: (p/2) log((v_x + sigma2)/(v_w + sigma2)); O(1/sigma2).
double bayes_risk_gap(const GaussianModel& model, double sigma2);

}  // namespace klpred
