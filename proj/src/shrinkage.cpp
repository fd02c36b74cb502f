#include "klpred/shrinkage.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace klpred {

Prior recenter(const Prior& prior, const Eigen::VectorXd& b) {
  if (prior.get_if<UniformPrior>() != nullptr) return prior;
  if (const auto* g = prior.get_if<GaussianPrior>()) {
    GaussianPrior out = *g;
    out.center = b;
    return Prior(std::move(out));
  }
  if (const auto* h = prior.get_if<HarmonicPrior>()) {
    HarmonicPrior out = *h;
    out.center = b;
    return Prior(std::move(out));
  }
  if (const auto* s = prior.get_if<ScaleMixturePrior>()) {
    ScaleMixturePrior out = *s;
    out.center = b;
    return Prior(std::move(out));
  }
  if (const auto* s = prior.get_if<SubspacePrior>()) {
    SubspacePrior out;
    out.base = std::make_shared<const Prior>(recenter(*s->base, b));
    out.basis = s->basis;
    return Prior(std::move(out));
  }
  const auto* m = prior.get_if<MixturePrior>();
  MixturePrior out;
  out.weights = m->weights;
  out.components.reserve(m->components.size());
  for (const Prior& c : m->components) {
    out.components.push_back(recenter(c, b));
  }
  return Prior(std::move(out));
}

Prior toward_subspace(const Prior& base, const Eigen::MatrixXd& basis) {
  if (basis.cols() == 0) return base;
  if (base.get_if<HarmonicPrior>() == nullptr &&
      base.get_if<ScaleMixturePrior>() == nullptr) {
    throw std::invalid_argument(
        "subspace shrinkage needs a harmonic or scale-mixture base");
  }
  SubspacePrior out;
  out.base = std::make_shared<const Prior>(base);
  out.basis = basis;
  return Prior(std::move(out));
}

Prior multiple_shrinkage(const std::vector<Eigen::VectorXd>& centers,
                         const std::vector<double>& weights,
                         const Prior& base) {
  if (centers.empty()) {
    throw std::invalid_argument("at least one center is required");
  }
  if (weights.size() != centers.size()) {
    throw std::invalid_argument("one weight per center is required");
  }
  if (centers.size() == 1) {
    if (std::abs(weights[0] - 1.0) > 1e-12) {
      throw std::invalid_argument("a single center must carry weight 1");
    }
    return recenter(base, centers[0]);
  }
  MixturePrior mix;
  mix.weights = weights;
  mix.components.reserve(centers.size());
  for (const auto& c : centers) {
    mix.components.push_back(recenter(base, c));
  }
  return Prior(std::move(mix));
}

}  // namespace klpred
