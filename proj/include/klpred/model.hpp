#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace klpred {

// Observation model: X ~ N(mu, v_x I), Y ~ N(mu, v_y I) in R^p, mu unknown.
// v_w is the variance of the precision-weighted mean W of X and Y.
struct GaussianModel {
  int p = 1;
  double v_x = 1.0;
  double v_y = 1.0;
  double v_w = 0.5;
};

GaussianModel make_model(int p, double v_x, double v_y);

// Prior taxonomy. Improper members are defined up to a fixed positive
// constant; every downstream quantity uses only differences of
// log-marginals under one prior, so the constant cancels.

struct UniformPrior {};

struct GaussianPrior {
  double sigma2 = 1.0;
  Eigen::VectorXd center;  // empty = origin, materialized by validate_prior
};

// pi(mu) = |mu - center|^{-(p-2)}, p >= 3.
struct HarmonicPrior {
  Eigen::VectorXd center;
};

// Mixing densities h(s) for the hierarchical prior mu|s ~ N(center, s v0 I).
struct StrawdermanMixing {
  double a = 0.5;  // h(s) = (1+s)^(a-2)
};

struct InverseGammaMixing {
  double alpha = 1.0;  // h(s) = s^(-alpha-1) exp(-beta/s)
  double beta = 1.0;
};

struct CustomMixing {
  std::function<double(double)> log_h;  // log h(s) on s >= 0, -inf allowed
  bool proper = false;  // integrability of h cannot be inferred; declare it
};

using MixingDensity =
    std::variant<StrawdermanMixing, InverseGammaMixing, CustomMixing>;

class Prior;

struct ScaleMixturePrior {
  MixingDensity h;
  double v0 = 1.0;
  Eigen::VectorXd center;
};

// Base prior applied to the component of mu orthogonal to span(basis),
// flat along the subspace itself. basis is p x k with orthonormal columns.
struct SubspacePrior {
  std::shared_ptr<const Prior> base;
  Eigen::MatrixXd basis;
};

struct MixturePrior {
  std::vector<Prior> components;
  std::vector<double> weights;
};

// Value type over the prior variants; cheap to copy (nodes are shared and
// immutable after validation).
class Prior {
 public:
  using Node = std::variant<UniformPrior, GaussianPrior, HarmonicPrior,
                            ScaleMixturePrior, SubspacePrior, MixturePrior>;

  Prior() : Prior(UniformPrior{}) {}
  Prior(UniformPrior c) : node_(box(std::move(c))) {}
  Prior(GaussianPrior c) : node_(box(std::move(c))) {}
  Prior(HarmonicPrior c) : node_(box(std::move(c))) {}
  Prior(ScaleMixturePrior c) : node_(box(std::move(c))) {}
  Prior(SubspacePrior c) : node_(box(std::move(c))) {}
  Prior(MixturePrior c) : node_(box(std::move(c))) {}

  const Node& node() const { return *node_; }

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(node_.get());
  }

 private:
  static std::shared_ptr<const Node> box(Node n) {
    return std::make_shared<const Node>(std::move(n));
  }
  std::shared_ptr<const Node> node_;
};

template <typename Visitor>
decltype(auto) visit_prior(Visitor&& vis, const Prior& prior) {
  return std::visit(std::forward<Visitor>(vis), prior.node());
}

// Checks every structural invariant for dimension p and returns the
// canonical form: centers materialized to length-p vectors, mixture
// weights renormalized exactly. Throws std::invalid_argument on parameter
// errors and std::domain_error where a family is undefined (harmonic with
// p < 3). Idempotent.
Prior validate_prior(const Prior& prior, int p);

bool prior_is_proper(const Prior& prior);

// True when the two priors are translates of one shape (identical up to
// their centers), so improper components may share one normalization.
bool same_shape_up_to_center(const Prior& a, const Prior& b);

// Compact single-line description, round-trippable numbers.
std::string describe(const Prior& prior);

}  // namespace klpred
