#include "klpred/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "klpred/fd.hpp"
#include "klpred/marginals.hpp"
#include "klpred/rng.hpp"
#include "klpred/util.hpp"

namespace klpred {

namespace {

void check_mu(const GaussianModel& model, const Eigen::VectorXd& mu,
              const char* who) {
  if (mu.size() != model.p)
    throw std::invalid_argument(std::string(who) +
                                ": mu must have dimension p");
  if (!mu.allFinite())
    throw std::invalid_argument(std::string(who) + ": mu must be finite");
}

void check_n(std::uint64_t n, const char* who) {
  if (n < 2)
    throw std::invalid_argument(std::string(who) + ": n must be >= 2");
}

// Streaming mean and standard error over one pass of samples.
struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t count = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }

  RiskEstimate finish(std::uint64_t seed) const {
    const double nd = static_cast<double>(count);
    const double mean = sum / nd;
    double var = (sum_sq - nd * mean * mean) / (nd - 1.0);
    if (var < 0.0) var = 0.0;  // rounding at (near-)constant samples
    return RiskEstimate{mean, std::sqrt(var / nd), count, seed};
  }
};

// Conjugate closed form for the Bayes predictive under a Gaussian prior:
// N(b + rho (x - b), (v_y + rho v_x) I) with rho = sigma2/(sigma2 + v_x).
struct GaussianPredictive {
  double rho;
  double tau;  // predictive variance per coordinate
};

GaussianPredictive gaussian_predictive(const GaussianModel& model,
                                       double sigma2) {
  const double rho = sigma2 / (sigma2 + model.v_x);
  return {rho, model.v_y + rho * model.v_x};
}

}  // namespace

double gaussian_kl(int p, double v1, double tau, double sq_dist) {
  if (!(v1 > 0.0) || !(tau > 0.0))
    throw std::invalid_argument("gaussian_kl: variances must be positive");
  return 0.5 * p * (v1 / tau - 1.0 + std::log(tau / v1)) +
         sq_dist / (2.0 * tau);
}

RiskEstimate kl_loss(const PredictiveDensity& density,
                     const Eigen::VectorXd& mu, const Eigen::VectorXd& x,
                     std::uint64_t n, std::uint64_t seed) {
  const GaussianModel& model = density.model;
  check_mu(model, mu, "kl_loss");
  check_mu(model, x, "kl_loss");
  check_n(n, "kl_loss");

  const bool bayes = std::holds_alternative<BayesKind>(density.kind);
  const Prior* prior =
      bayes ? &std::get<BayesKind>(density.kind).prior : nullptr;
  const double log_m_x =
      bayes ? log_marginal(*prior, x, model.v_x).log_value : 0.0;
  const double sd_y = std::sqrt(model.v_y);

  Rng rng(seed);
  Accumulator acc;
  for (std::uint64_t i = 0; i < n; ++i) {
    const Eigen::VectorXd y = mu + sd_y * rng.normal_vec(model.p);
    const double log_true =
        log_normal_density((y - mu).squaredNorm(), model.v_y, model.p);
    double log_hat;
    if (bayes) {
      log_hat = log_marginal(*prior, weighted_mean(model, x, y), model.v_w)
                    .log_value -
                log_m_x + log_density_u(model, x, y);
    } else {
      log_hat = log_density(density, x, y);
    }
    acc.add(log_true - log_hat);
  }
  return acc.finish(seed);
}

std::optional<double> kl_loss_closed_form(const PredictiveDensity& density,
                                          const Eigen::VectorXd& mu,
                                          const Eigen::VectorXd& x) {
  const GaussianModel& model = density.model;
  check_mu(model, mu, "kl_loss_closed_form");
  check_mu(model, x, "kl_loss_closed_form");
  if (std::holds_alternative<UniformKind>(density.kind))
    return gaussian_kl(model.p, model.v_y, model.v_x + model.v_y,
                       (mu - x).squaredNorm());
  if (std::holds_alternative<PlugInKind>(density.kind))
    return gaussian_kl(model.p, model.v_y, model.v_y, (mu - x).squaredNorm());
  const Prior& prior = std::get<BayesKind>(density.kind).prior;
  const auto* g = prior.get_if<GaussianPrior>();
  if (g == nullptr) return std::nullopt;
  const GaussianPredictive gp = gaussian_predictive(model, g->sigma2);
  Eigen::VectorXd b = g->center.size() ? g->center
                                       : Eigen::VectorXd::Zero(model.p);
  const Eigen::VectorXd mean = b + gp.rho * (x - b);
  return gaussian_kl(model.p, model.v_y, gp.tau, (mu - mean).squaredNorm());
}

RiskEstimate kl_risk(const PredictiveDensity& density,
                     const Eigen::VectorXd& mu, std::uint64_t n,
                     std::uint64_t seed) {
  const GaussianModel& model = density.model;
  check_mu(model, mu, "kl_risk");
  check_n(n, "kl_risk");

  const bool bayes = std::holds_alternative<BayesKind>(density.kind);
  const Prior* prior =
      bayes ? &std::get<BayesKind>(density.kind).prior : nullptr;
  const double sd_x = std::sqrt(model.v_x);
  const double sd_y = std::sqrt(model.v_y);

  Rng rng(seed);
  Accumulator acc;
  for (std::uint64_t i = 0; i < n; ++i) {
    const Eigen::VectorXd x = mu + sd_x * rng.normal_vec(model.p);
    const Eigen::VectorXd y = mu + sd_y * rng.normal_vec(model.p);
    const double log_true =
        log_normal_density((y - mu).squaredNorm(), model.v_y, model.p);
    double log_hat;
    if (bayes) {
      log_hat = log_marginal(*prior, weighted_mean(model, x, y), model.v_w)
                    .log_value -
                log_marginal(*prior, x, model.v_x).log_value +
                log_density_u(model, x, y);
    } else {
      log_hat = log_density(density, x, y);
    }
    acc.add(log_true - log_hat);
  }
  return acc.finish(seed);
}

RiskEstimate risk_difference(const Prior& prior, const GaussianModel& model,
                             const Eigen::VectorXd& mu, std::uint64_t n,
                             std::uint64_t seed) {
  check_mu(model, mu, "risk_difference");
  check_n(n, "risk_difference");
  const double sd_w = std::sqrt(model.v_w);
  const double sd_x = std::sqrt(model.v_x);

  Rng rng(seed);
  Accumulator acc;
  for (std::uint64_t i = 0; i < n; ++i) {
    const Eigen::VectorXd z = rng.normal_vec(model.p);
    acc.add(log_marginal(prior, mu + sd_w * z, model.v_w).log_value -
            log_marginal(prior, mu + sd_x * z, model.v_x).log_value);
  }
  return acc.finish(seed);
}

double risk_u_closed_form(const GaussianModel& model) {
  return 0.5 * model.p * std::log1p(model.v_x / model.v_y);
}

double kl_risk_gaussian_closed_form(const GaussianModel& model, double sigma2,
                                    double sq_dist_mu_center) {
  const GaussianPredictive gp = gaussian_predictive(model, sigma2);
  const double sq_mean =
      gp.rho * gp.rho * model.p * model.v_x +
      (1.0 - gp.rho) * (1.0 - gp.rho) * sq_dist_mu_center;
  return 0.5 * model.p *
             (model.v_y / gp.tau - 1.0 + std::log(gp.tau / model.v_y)) +
         sq_mean / (2.0 * gp.tau);
}

UrePair stein_ure(const Prior& prior, const Eigen::VectorXd& z, double v) {
  const MarginalDerivatives d = marginal_derivatives(prior, z, v);
  UrePair out;
  out.grad_form = d.grad.squaredNorm() - 2.0 * d.lap_ratio;

  const double log_m_z = d.log_value;
  auto sqrt_m = [&](const Eigen::VectorXd& zz) {
    return std::exp(0.5 * (log_marginal(prior, zz, v).log_value - log_m_z));
  };
  const double scale = std::fmax(1.0, z.norm());
  const double noise = 0.5 * d.log_error + 1e-15;
  out.sqrt_form = -4.0 * fd_laplacian(sqrt_m, z, scale, noise).value;
  return out;
}

RiskEstimate quadratic_risk(const Prior& prior, double v,
                            const Eigen::VectorXd& mu, std::uint64_t n,
                            std::uint64_t seed) {
  if (!(v > 0.0)) throw std::invalid_argument("quadratic_risk: v must be > 0");
  if (mu.size() < 1 || !mu.allFinite())
    throw std::invalid_argument("quadratic_risk: bad mu");
  check_n(n, "quadratic_risk");
  const int p = static_cast<int>(mu.size());
  const double sd = std::sqrt(v);

  Rng rng(seed);
  Accumulator acc;
  for (std::uint64_t i = 0; i < n; ++i) {
    const Eigen::VectorXd x = mu + sd * rng.normal_vec(p);
    acc.add((posterior_mean(prior, x, v) - mu).squaredNorm());
  }
  return acc.finish(seed);
}

Eq25Sides check_eq25(const Prior& prior, double v, const Eigen::VectorXd& mu,
                     std::uint64_t n, std::uint64_t seed, double dv) {
  if (!(v > 0.0)) throw std::invalid_argument("check_eq25: v must be > 0");
  if (mu.size() < 1 || !mu.allFinite())
    throw std::invalid_argument("check_eq25: bad mu");
  check_n(n, "check_eq25");
  if (dv <= 0.0) dv = 0.01 * v;
  if (!(v - dv > 0.0))
    throw std::invalid_argument("check_eq25: dv must be below v");
  const int p = static_cast<int>(mu.size());
  const double sd = std::sqrt(v);
  const double sd_hi = std::sqrt(v + dv);
  const double sd_lo = std::sqrt(v - dv);

  Rng rng(seed);
  Accumulator lhs, rhs;
  for (std::uint64_t i = 0; i < n; ++i) {
    const Eigen::VectorXd z = rng.normal_vec(p);
    const Eigen::VectorXd x = mu + sd * z;
    lhs.add(v * z.squaredNorm() -
            (posterior_mean(prior, x, v) - mu).squaredNorm());
    const double hi = log_marginal(prior, mu + sd_hi * z, v + dv).log_value;
    const double lo = log_marginal(prior, mu + sd_lo * z, v - dv).log_value;
    rhs.add(-2.0 * v * v * (hi - lo) / (2.0 * dv));
  }
  return {lhs.finish(seed), rhs.finish(seed)};
}

double bayes_risk_gap(const GaussianModel& model, double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("bayes_risk_gap: sigma2 must be positive");
  return 0.5 * model.p *
         std::log((model.v_x + sigma2) / (model.v_w + sigma2));
}

}  // namespace klpred
