#include "klpred/model.hpp"

#include <cmath>
#include <stdexcept>

#include "klpred/util.hpp"

namespace klpred {

namespace {

constexpr double kWeightTol = 1e-12;  // accept decimal weight inputs
constexpr double kWeightFixed = 1e-14;  // already canonical, leave alone
constexpr double kBasisTol = 1e-10;

Eigen::VectorXd materialize_center(const Eigen::VectorXd& center, int p,
                                   const char* who) {
  if (center.size() == 0) return Eigen::VectorXd::Zero(p);
  if (center.size() != p)
    throw std::invalid_argument(std::string(who) +
                                ": center dimension does not match p");
  if (!center.allFinite())
    throw std::invalid_argument(std::string(who) + ": center is not finite");
  return center;
}

// p_eff is the dimension the prior actually acts on: p at top level,
// p - k for the base of a subspace prior.
MixingDensity validate_mixing(const MixingDensity& h, int p_eff) {
  if (const auto* s = std::get_if<StrawdermanMixing>(&h)) {
    if (!std::isfinite(s->a))
      throw std::invalid_argument("validate_prior: mixing exponent a not finite");
    // h(s)(v+s v0)^{-p/2} ~ s^{a-2-p/2} at infinity; integrable iff a < 1+p/2.
    if (s->a >= 1.0 + 0.5 * p_eff)
      throw std::invalid_argument(
          "validate_prior: scale mixture marginal diverges (a >= 1 + p/2)");
    return h;
  }
  if (const auto* g = std::get_if<InverseGammaMixing>(&h)) {
    if (!(g->beta > 0.0) || !std::isfinite(g->beta))
      throw std::invalid_argument("validate_prior: beta must be positive");
    if (!std::isfinite(g->alpha))
      throw std::invalid_argument("validate_prior: alpha not finite");
    if (g->alpha <= -0.5 * p_eff)
      throw std::invalid_argument(
          "validate_prior: scale mixture marginal diverges (alpha <= -p/2)");
    return h;
  }
  const auto& c = std::get<CustomMixing>(h);
  if (!c.log_h)
    throw std::invalid_argument("validate_prior: custom mixing has no evaluator");
  for (double s : {0.0, 1e-6, 1e-3, 0.1, 0.5, 1.0, 2.0, 10.0, 1e2, 1e4, 1e6}) {
    double lh = c.log_h(s);
    if (std::isnan(lh))
      throw std::invalid_argument(
          "validate_prior: custom mixing evaluates to NaN at s=" +
          format_double(s));
  }
  return h;
}

Prior validate_impl(const Prior& prior, int p, int p_eff, bool nested);

struct ValidateVisitor {
  int p;
  int p_eff;
  bool nested;  // true when validating the base of a subspace prior

  Prior operator()(const UniformPrior&) const { return UniformPrior{}; }

  Prior operator()(const GaussianPrior& g) const {
    if (!(g.sigma2 > 0.0) || !std::isfinite(g.sigma2))
      throw std::invalid_argument("validate_prior: sigma2 must be positive");
    return GaussianPrior{g.sigma2,
                         materialize_center(g.center, p, "validate_prior")};
  }

  Prior operator()(const HarmonicPrior& h) const {
    if (p_eff < 3)
      throw std::domain_error(
          "validate_prior: harmonic prior requires dimension >= 3");
    return HarmonicPrior{materialize_center(h.center, p, "validate_prior")};
  }

  Prior operator()(const ScaleMixturePrior& s) const {
    if (!(s.v0 > 0.0) || !std::isfinite(s.v0))
      throw std::invalid_argument("validate_prior: v0 must be positive");
    return ScaleMixturePrior{validate_mixing(s.h, p_eff), s.v0,
                             materialize_center(s.center, p, "validate_prior")};
  }

  Prior operator()(const SubspacePrior& s) const {
    if (nested)
      throw std::invalid_argument(
          "validate_prior: subspace priors do not nest");
    if (!s.base)
      throw std::invalid_argument("validate_prior: subspace prior has no base");
    const Eigen::MatrixXd& b = s.basis;
    if (b.size() > 0 && b.rows() != p)
      throw std::invalid_argument(
          "validate_prior: basis row count does not match p");
    int k = static_cast<int>(b.cols());
    if (k > p)
      throw std::invalid_argument("validate_prior: basis has more than p columns");
    if (k > 0) {
      Eigen::MatrixXd gram = b.transpose() * b;
      gram -= Eigen::MatrixXd::Identity(k, k);
      if (gram.cwiseAbs().maxCoeff() > kBasisTol)
        throw std::invalid_argument(
            "validate_prior: basis columns are not orthonormal");
    }
    if (std::holds_alternative<MixturePrior>(s.base->node()) ||
        std::holds_alternative<SubspacePrior>(s.base->node()))
      throw std::invalid_argument(
          "validate_prior: subspace base must be a simple prior family");
    Prior base = validate_impl(*s.base, p, p - k, true);
    Eigen::MatrixXd basis = (k > 0) ? b : Eigen::MatrixXd(p, 0);
    return SubspacePrior{std::make_shared<const Prior>(std::move(base)),
                         std::move(basis)};
  }

  Prior operator()(const MixturePrior& m) const {
    if (m.components.empty())
      throw std::invalid_argument("validate_prior: mixture has no components");
    if (m.weights.size() != m.components.size())
      throw std::invalid_argument(
          "validate_prior: mixture weight count does not match components");
    double sum = 0.0;
    for (double w : m.weights) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw std::invalid_argument(
            "validate_prior: mixture weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > kWeightTol)
      throw std::invalid_argument(
          "validate_prior: mixture weights must sum to 1 within 1e-12");
    std::vector<double> weights = m.weights;
    if (std::abs(sum - 1.0) > kWeightFixed)
      for (double& w : weights) w /= sum;

    std::vector<Prior> comps;
    comps.reserve(m.components.size());
    for (const Prior& c : m.components)
      comps.push_back(validate_impl(c, p, p_eff, nested));

    bool all_proper = true;
    for (const Prior& c : comps) all_proper = all_proper && prior_is_proper(c);
    if (!all_proper) {
      for (const Prior& c : comps) {
        if (prior_is_proper(c))
          throw std::invalid_argument(
              "validate_prior: mixture mixes proper and improper components");
        if (!same_shape_up_to_center(comps.front(), c))
          throw std::invalid_argument(
              "validate_prior: improper mixture components must be "
              "translates of one shape");
      }
    }
    return MixturePrior{std::move(comps), std::move(weights)};
  }
};

Prior validate_impl(const Prior& prior, int p, int p_eff, bool nested) {
  return std::visit(ValidateVisitor{p, p_eff, nested}, prior.node());
}

bool mixing_same(const MixingDensity& a, const MixingDensity& b) {
  if (a.index() != b.index()) return false;
  if (const auto* s = std::get_if<StrawdermanMixing>(&a))
    return s->a == std::get<StrawdermanMixing>(b).a;
  if (const auto* g = std::get_if<InverseGammaMixing>(&a)) {
    const auto& o = std::get<InverseGammaMixing>(b);
    return g->alpha == o.alpha && g->beta == o.beta;
  }
  return false;  // custom evaluators are not comparable
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += " ";
    out += format_double(v[i]);
  }
  return out + "]";
}

struct DescribeVisitor {
  std::string operator()(const UniformPrior&) const { return "uniform"; }
  std::string operator()(const GaussianPrior& g) const {
    return "gaussian(sigma2=" + format_double(g.sigma2) +
           ", center=" + format_vector(g.center) + ")";
  }
  std::string operator()(const HarmonicPrior& h) const {
    return "harmonic(center=" + format_vector(h.center) + ")";
  }
  std::string operator()(const ScaleMixturePrior& s) const {
    std::string mix;
    if (const auto* st = std::get_if<StrawdermanMixing>(&s.h))
      mix = "strawderman(a=" + format_double(st->a) + ")";
    else if (const auto* ig = std::get_if<InverseGammaMixing>(&s.h))
      mix = "inverse-gamma(alpha=" + format_double(ig->alpha) +
            ", beta=" + format_double(ig->beta) + ")";
    else
      mix = std::string("custom(") +
            (std::get<CustomMixing>(s.h).proper ? "proper" : "improper") + ")";
    return "scale-mixture(" + mix + ", v0=" + format_double(s.v0) +
           ", center=" + format_vector(s.center) + ")";
  }
  std::string operator()(const SubspacePrior& s) const {
    return "subspace(base=" + describe(*s.base) +
           ", k=" + std::to_string(s.basis.cols()) + ")";
  }
  std::string operator()(const MixturePrior& m) const {
    std::string out = "mixture(";
    for (std::size_t i = 0; i < m.components.size(); ++i) {
      if (i > 0) out += " + ";
      out += format_double(m.weights[i]) + "*" + describe(m.components[i]);
    }
    return out + ")";
  }
};

}  // namespace

GaussianModel make_model(int p, double v_x, double v_y) {
  if (p < 1) throw std::invalid_argument("make_model: p must be >= 1");
  if (!(v_x > 0.0) || !std::isfinite(v_x))
    throw std::invalid_argument("make_model: v_x must be positive");
  if (!(v_y > 0.0) || !std::isfinite(v_y))
    throw std::invalid_argument("make_model: v_y must be positive");
  return GaussianModel{p, v_x, v_y, v_x * v_y / (v_x + v_y)};
}

Prior validate_prior(const Prior& prior, int p) {
  if (p < 1) throw std::invalid_argument("validate_prior: p must be >= 1");
  return validate_impl(prior, p, p, false);
}

bool prior_is_proper(const Prior& prior) {
  return visit_prior(
      [](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, UniformPrior>) return false;
        if constexpr (std::is_same_v<T, GaussianPrior>) return true;
        if constexpr (std::is_same_v<T, HarmonicPrior>) return false;
        if constexpr (std::is_same_v<T, ScaleMixturePrior>) {
          if (const auto* s = std::get_if<StrawdermanMixing>(&node.h))
            return s->a < 1.0;  // integral of (1+s)^(a-2) over [0,inf)
          if (const auto* g = std::get_if<InverseGammaMixing>(&node.h))
            return g->alpha > 0.0;  // gamma-integral convergence at infinity
          return std::get<CustomMixing>(node.h).proper;
        }
        if constexpr (std::is_same_v<T, SubspacePrior>) {
          if (node.basis.cols() > 0) return false;  // flat directions
          return prior_is_proper(*node.base);
        }
        if constexpr (std::is_same_v<T, MixturePrior>) {
          for (const Prior& c : node.components)
            if (!prior_is_proper(c)) return false;
          return true;
        }
      },
      prior);
}

bool same_shape_up_to_center(const Prior& a, const Prior& b) {
  if (a.node().index() != b.node().index()) return false;
  if (a.get_if<UniformPrior>()) return true;
  if (a.get_if<HarmonicPrior>()) return true;
  if (const auto* g = a.get_if<GaussianPrior>())
    return g->sigma2 == b.get_if<GaussianPrior>()->sigma2;
  if (const auto* s = a.get_if<ScaleMixturePrior>()) {
    const auto* o = b.get_if<ScaleMixturePrior>();
    return s->v0 == o->v0 && mixing_same(s->h, o->h);
  }
  if (const auto* s = a.get_if<SubspacePrior>()) {
    const auto* o = b.get_if<SubspacePrior>();
    if (s->basis.rows() != o->basis.rows() ||
        s->basis.cols() != o->basis.cols())
      return false;
    if (s->basis.size() > 0 && !(s->basis.array() == o->basis.array()).all())
      return false;
    return same_shape_up_to_center(*s->base, *o->base);
  }
  const auto* m = a.get_if<MixturePrior>();
  const auto* o = b.get_if<MixturePrior>();
  if (m->components.size() != o->components.size()) return false;
  for (std::size_t i = 0; i < m->components.size(); ++i) {
    if (m->weights[i] != o->weights[i]) return false;
    if (!same_shape_up_to_center(m->components[i], o->components[i]))
      return false;
  }
  return true;
}

std::string describe(const Prior& prior) {
  return visit_prior(DescribeVisitor{}, prior);
}

}  // namespace klpred
