#include "klpred/marginals.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "klpred/quadrature.hpp"
#include "klpred/special.hpp"
#include "klpred/util.hpp"

namespace klpred {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadRelTol = 1e-11;  // holds the log-scale bound near 1e-12

struct LogValue {
  double log_value = 0.0;
  double error = 0.0;
};

void check_inputs(const Eigen::VectorXd& z, double v, const char* who) {
  if (z.size() < 1)
    throw std::invalid_argument(std::string(who) + ": z must be nonempty");
  if (!z.allFinite())
    throw std::invalid_argument(std::string(who) + ": z must be finite");
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(who) + ": v must be positive");
}

Eigen::VectorXd diff_from_center(const Eigen::VectorXd& z,
                                 const Eigen::VectorXd& center) {
  if (center.size() == 0) return z;
  if (center.size() != z.size())
    throw std::invalid_argument("marginals: center and z dimensions differ");
  return z - center;
}

const Eigen::VectorXd* center_of(const Prior& prior) {
  if (const auto* g = prior.get_if<GaussianPrior>()) return &g->center;
  if (const auto* h = prior.get_if<HarmonicPrior>()) return &h->center;
  if (const auto* s = prior.get_if<ScaleMixturePrior>()) return &s->center;
  return nullptr;
}

// ---- scale mixture quadrature ----------------------------------------
// m(z; v) = integral over s of N(z; center, (v + s v0) I) h(s) ds, mapped
// to t in [0, 1) by s = t/(1-t).  Everything is evaluated on the log scale
// with one shift shared by the three integrals
//   S0 = integral f,  S2 = integral f/tau,  S3 = integral f/tau^2
// whose positive-integrand ratios give the gradient and Laplacian.

double log_mixing(const MixingDensity& h, double s, double log1p_s) {
  if (const auto* st = std::get_if<StrawdermanMixing>(&h))
    return (st->a - 2.0) * log1p_s;
  if (const auto* ig = std::get_if<InverseGammaMixing>(&h)) {
    if (s <= 0.0) return -kInf;
    return -(ig->alpha + 1.0) * std::log(s) - ig->beta / s;
  }
  return std::get<CustomMixing>(h).log_h(s);
}

struct MixQuad {
  const ScaleMixturePrior* prior;
  double rho;  // squared distance of z from the prior center
  double v;
  int p_eff;

  double log_f0(double t) const {
    const double one_m = 1.0 - t;
    if (one_m <= 0.0) return -kInf;
    const double log1p_s = -std::log(one_m);
    const double s = t / one_m;
    const double tau = v + s * prior->v0;
    const double lh = log_mixing(prior->h, s, log1p_s);
    if (lh == -kInf) return -kInf;
    return log_normal_density(rho, tau, p_eff) + lh + 2.0 * log1p_s;
  }

  double tau_of(double t) const { return v + prior->v0 * t / (1.0 - t); }

  // The shift only needs to be within a few hundred of the true maximum to
  // keep exp in range; a coarse grid with dyadic refinement toward t = 1
  // (where large-|z| mass concentrates) is enough.
  double find_shift() const {
    double best = -kInf;
    for (int j = 0; j < 64; ++j) best = std::max(best, log_f0(j / 64.0));
    for (int k = 7; k <= 50; ++k)
      best = std::max(best, log_f0(1.0 - std::ldexp(1.0, -k)));
    return best;
  }
};

QuadResult integrate_mix(const MixQuad& q, double shift, int tau_power) {
  auto f = [&](double t) {
    const double l = q.log_f0(t) - shift;
    if (l < -745.0) return 0.0;
    double val = std::exp(l);
    if (tau_power > 0) {
      const double tau = q.tau_of(t);
      val /= tau;
      if (tau_power > 1) val /= tau;
    }
    return val;
  };
  QuadResult r = integrate_adaptive(f, 0.0, 1.0, 0.0, kQuadRelTol, 4000);
  if (!r.converged)
    throw std::runtime_error(
        "log_marginal: scale mixture quadrature did not converge "
        "(achieved error bound " +
        format_double(r.value != 0.0 ? r.error / std::fabs(r.value) : r.error) +
        ")");
  return r;
}

LogValue scale_mixture_log(const ScaleMixturePrior& sm, double rho, double v,
                           int p_eff) {
  MixQuad q{&sm, rho, v, p_eff};
  const double shift = q.find_shift();
  if (!std::isfinite(shift))
    throw std::runtime_error(
        "log_marginal: mixing density vanishes on the whole scan grid");
  QuadResult s0 = integrate_mix(q, shift, 0);
  if (!(s0.value > 0.0))
    throw std::runtime_error("log_marginal: scale mixture integral is zero");
  return {shift + std::log(s0.value), s0.error / s0.value};
}

struct MixFull {
  double log_value, log_err;
  double i2, i2_err;  // S2/S0 and its bound
  double i3, i3_err;  // S3/S0 and its bound
};

MixFull scale_mixture_full(const ScaleMixturePrior& sm, double rho, double v,
                           int p_eff) {
  MixQuad q{&sm, rho, v, p_eff};
  const double shift = q.find_shift();
  if (!std::isfinite(shift))
    throw std::runtime_error(
        "log_marginal: mixing density vanishes on the whole scan grid");
  QuadResult s0 = integrate_mix(q, shift, 0);
  QuadResult s2 = integrate_mix(q, shift, 1);
  QuadResult s3 = integrate_mix(q, shift, 2);
  if (!(s0.value > 0.0))
    throw std::runtime_error("log_marginal: scale mixture integral is zero");
  MixFull out;
  out.log_value = shift + std::log(s0.value);
  out.log_err = s0.error / s0.value;
  out.i2 = s2.value / s0.value;
  out.i2_err = (s2.error + out.i2 * s0.error) / s0.value;
  out.i3 = s3.value / s0.value;
  out.i3_err = (s3.error + out.i3 * s0.error) / s0.value;
  return out;
}

// ---- recursive evaluation ---------------------------------------------

LogValue eval_log(const Prior& prior, const Eigen::VectorXd& z, double v,
                  int p_eff);
MarginalDerivatives eval_full(const Prior& prior, const Eigen::VectorXd& z,
                              double v, int p_eff);

Eigen::VectorXd subspace_point(const SubspacePrior& s,
                               const Eigen::VectorXd& z) {
  if (s.basis.cols() == 0) return z;
  const Eigen::VectorXd* b = center_of(*s.base);
  if (b != nullptr && b->size() == z.size()) {
    Eigen::VectorXd d = z - *b;
    return z - s.basis * (s.basis.transpose() * d);
  }
  return z - s.basis * (s.basis.transpose() * z);
}

struct LogVisitor {
  const Eigen::VectorXd& z;
  double v;
  int p_eff;

  LogValue operator()(const UniformPrior&) const { return {0.0, 0.0}; }

  LogValue operator()(const GaussianPrior& g) const {
    const double rho = diff_from_center(z, g.center).squaredNorm();
    return {log_normal_density(rho, v + g.sigma2, p_eff), 0.0};
  }

  // m(z; v) = r^{2-p} P(p/2-1, r^2/(2v)) exactly for the |mu|^{2-p} prior;
  // written as (2v)^{-(p/2-1)} [P(c, x) x^{-c}] so r = 0 is regular.
  LogValue operator()(const HarmonicPrior& h) const {
    const double c = 0.5 * p_eff - 1.0;
    const double rho = diff_from_center(z, h.center).squaredNorm();
    const double x = rho / (2.0 * v);
    return {-c * std::log(2.0 * v) + log_gamma_p_scaled(c, x), 0.0};
  }

  LogValue operator()(const ScaleMixturePrior& s) const {
    const double rho = diff_from_center(z, s.center).squaredNorm();
    return scale_mixture_log(s, rho, v, p_eff);
  }

  LogValue operator()(const SubspacePrior& s) const {
    return eval_log(*s.base, subspace_point(s, z), v,
                    p_eff - static_cast<int>(s.basis.cols()));
  }

  LogValue operator()(const MixturePrior& m) const {
    std::vector<double> logs, errs;
    logs.reserve(m.components.size());
    errs.reserve(m.components.size());
    for (std::size_t j = 0; j < m.components.size(); ++j) {
      if (m.weights[j] <= 0.0) continue;
      LogValue c = eval_log(m.components[j], z, v, p_eff);
      logs.push_back(std::log(m.weights[j]) + c.log_value);
      errs.push_back(c.error);
    }
    LogValue out;
    out.log_value = log_sum_exp(logs);
    if (!std::isfinite(out.log_value)) return out;
    for (std::size_t j = 0; j < logs.size(); ++j)
      out.error += std::exp(logs[j] - out.log_value) * errs[j];
    return out;
  }
};

struct FullVisitor {
  const Eigen::VectorXd& z;
  double v;
  int p_eff;

  MarginalDerivatives operator()(const UniformPrior&) const {
    MarginalDerivatives out;
    out.grad = Eigen::VectorXd::Zero(z.size());
    return out;
  }

  MarginalDerivatives operator()(const GaussianPrior& g) const {
    MarginalDerivatives out;
    const double tau = v + g.sigma2;
    const Eigen::VectorXd d = diff_from_center(z, g.center);
    out.log_value = log_normal_density(d.squaredNorm(), tau, p_eff);
    out.grad = -d / tau;
    out.lap_ratio = d.squaredNorm() / (tau * tau) - p_eff / tau;
    return out;
  }

  // Radial derivatives through Q(c, x) = x^c e^{-x} / gamma(c, x) at
  // x = r^2/(2v):
  //   grad log m = (Q-c)/x * d/v,    lap m / m = -2 Q / v.
  // The product rule for lap m/m,
  //   2 Q' + (p-2)(Q-c)/x + 2(Q-c)^2/x,
  // collapses to -2Q because p-2 = 2c and Q' = -Q(Q-c)/x - Q; the
  // collapsed form is exact at every x, including x = 0 where Q -> c
  // recovers lap m/m -> -(p-2)/v.
  MarginalDerivatives operator()(const HarmonicPrior& h) const {
    MarginalDerivatives out;
    const double c = 0.5 * p_eff - 1.0;
    const Eigen::VectorXd d = diff_from_center(z, h.center);
    const double x = d.squaredNorm() / (2.0 * v);
    const GammaRatio gr = lower_gamma_ratio(c, x);
    out.log_value = -c * std::log(2.0 * v) + log_gamma_p_scaled(c, x);
    out.grad = (gr.q_minus_a_over_x / v) * d;
    out.lap_ratio = -2.0 * gr.q / v;
    return out;
  }

  MarginalDerivatives operator()(const ScaleMixturePrior& s) const {
    MarginalDerivatives out;
    const Eigen::VectorXd d = diff_from_center(z, s.center);
    const double rho = d.squaredNorm();
    const MixFull m = scale_mixture_full(s, rho, v, p_eff);
    out.log_value = m.log_value;
    out.log_error = m.log_err;
    out.grad = -m.i2 * d;
    out.grad_error = m.i2_err * d.cwiseAbs().maxCoeff();
    out.lap_ratio = rho * m.i3 - p_eff * m.i2;
    out.lap_error = rho * m.i3_err + p_eff * m.i2_err;
    return out;
  }

  // The base sees the complement component only; its gradient lies in the
  // complement already, and its Laplacian formulas run at dimension p - k,
  // which is exactly the ambient trace over the complement.
  MarginalDerivatives operator()(const SubspacePrior& s) const {
    return eval_full(*s.base, subspace_point(s, z), v,
                     p_eff - static_cast<int>(s.basis.cols()));
  }

  MarginalDerivatives operator()(const MixturePrior& m) const {
    std::vector<MarginalDerivatives> parts;
    std::vector<double> logs;
    parts.reserve(m.components.size());
    logs.reserve(m.components.size());
    for (std::size_t j = 0; j < m.components.size(); ++j) {
      if (m.weights[j] <= 0.0) continue;
      parts.push_back(eval_full(m.components[j], z, v, p_eff));
      logs.push_back(std::log(m.weights[j]) + parts.back().log_value);
    }
    MarginalDerivatives out;
    out.log_value = log_sum_exp(logs);
    out.grad = Eigen::VectorXd::Zero(z.size());
    double max_log_err = 0.0, grad_scale = 0.0, lap_scale = 0.0;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      const double w = std::exp(logs[j] - out.log_value);
      out.grad += w * parts[j].grad;
      out.lap_ratio += w * parts[j].lap_ratio;
      out.log_error += w * parts[j].log_error;
      out.grad_error += w * parts[j].grad_error;
      out.lap_error += w * parts[j].lap_error;
      max_log_err = std::max(max_log_err, parts[j].log_error);
      grad_scale += w * parts[j].grad.cwiseAbs().maxCoeff();
      lap_scale += w * std::fabs(parts[j].lap_ratio);
    }
    // First-order effect of log-value error on the softmax weights.
    out.grad_error += 2.0 * max_log_err * grad_scale;
    out.lap_error += 2.0 * max_log_err * lap_scale;
    return out;
  }
};

LogValue eval_log(const Prior& prior, const Eigen::VectorXd& z, double v,
                  int p_eff) {
  return std::visit(LogVisitor{z, v, p_eff}, prior.node());
}

MarginalDerivatives eval_full(const Prior& prior, const Eigen::VectorXd& z,
                              double v, int p_eff) {
  return std::visit(FullVisitor{z, v, p_eff}, prior.node());
}

}  // namespace

MarginalValue log_marginal(const Prior& prior, const Eigen::VectorXd& z,
                           double v) {
  check_inputs(z, v, "log_marginal");
  LogValue r = eval_log(prior, z, v, static_cast<int>(z.size()));
  return {r.log_value, r.error};
}

MarginalDerivatives marginal_derivatives(const Prior& prior,
                                         const Eigen::VectorXd& z, double v) {
  check_inputs(z, v, "marginal_derivatives");
  return eval_full(prior, z, v, static_cast<int>(z.size()));
}

Eigen::VectorXd grad_log_marginal(const Prior& prior, const Eigen::VectorXd& z,
                                  double v) {
  check_inputs(z, v, "grad_log_marginal");
  return eval_full(prior, z, v, static_cast<int>(z.size())).grad;
}

double laplacian_ratio(const Prior& prior, const Eigen::VectorXd& z,
                       double v) {
  check_inputs(z, v, "laplacian_ratio");
  return eval_full(prior, z, v, static_cast<int>(z.size())).lap_ratio;
}

double sqrt_laplacian_ratio(const Prior& prior, const Eigen::VectorXd& z,
                            double v) {
  check_inputs(z, v, "sqrt_laplacian_ratio");
  return eval_full(prior, z, v, static_cast<int>(z.size())).sqrt_ratio();
}

Eigen::VectorXd posterior_mean(const Prior& prior, const Eigen::VectorXd& x,
                               double v) {
  check_inputs(x, v, "posterior_mean");
  return x + v * eval_full(prior, x, v, static_cast<int>(x.size())).grad;
}

std::optional<RadialProfile> radial_profile(const Prior& prior, int p,
                                            double v) {
  if (p < 1) throw std::invalid_argument("radial_profile: p must be >= 1");
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument("radial_profile: v must be positive");
  const bool radial = prior.get_if<UniformPrior>() != nullptr ||
                      prior.get_if<GaussianPrior>() != nullptr ||
                      prior.get_if<HarmonicPrior>() != nullptr ||
                      prior.get_if<ScaleMixturePrior>() != nullptr;
  if (!radial) return std::nullopt;

  Eigen::VectorXd center = Eigen::VectorXd::Zero(p);
  if (const Eigen::VectorXd* b = center_of(prior); b != nullptr && b->size() == p)
    center = *b;

  auto point = [center, v](double u) {
    Eigen::VectorXd z = center;
    z[0] += std::sqrt(v) * u;
    return z;
  };

  RadialProfile rp;
  rp.g = [prior, point, v, p](double u) {
    return eval_log(prior, point(u), v, p).log_value;
  };
  rp.g1 = [prior, point, v, p](double u) {
    return std::sqrt(v) * eval_full(prior, point(u), v, p).grad[0];
  };
  rp.g2 = [prior, point, v, p](double u) {
    const MarginalDerivatives d = eval_full(prior, point(u), v, p);
    const double log_lap = d.lap_ratio - d.grad.squaredNorm();
    if (u == 0.0) return v * log_lap / p;  // isotropy at the center
    return v * log_lap - (p - 1) * std::sqrt(v) * d.grad[0] / u;
  };
  return rp;
}

}  // namespace klpred
