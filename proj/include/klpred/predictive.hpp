#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "klpred/marginals.hpp"
#include "klpred/model.hpp"

namespace klpred {

// The three predictive families: the best-invariant density N(x, (v_x+v_y)I),
// the plug-in density N(x, v_y I), and the posterior-mixed Bayes density for
// a prior, evaluated through the marginal ratio
//   p_bayes(y|x) = [m(w; v_w) / m(x; v_x)] p_u(y|x),
// w = (v_y x + v_x y)/(v_x + v_y), so improper-prior constants cancel.
struct UniformKind {};
struct PlugInKind {};
struct BayesKind {
  Prior prior;
};

struct PredictiveDensity {
  GaussianModel model;
  std::variant<UniformKind, PlugInKind, BayesKind> kind;
};

Eigen::VectorXd weighted_mean(const GaussianModel& model,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y);

double log_density_u(const GaussianModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y);

double log_density_plugin(const GaussianModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y);

double log_density_bayes(const Prior& prior, const GaussianModel& model,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double log_density(const PredictiveDensity& density, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

// Self-normalized importance-sampling estimate of the predictive mean,
// proposal p_u(.|x) (it dominates the tails of every shrinkage density
// here).  ess is the usual (sum w)^2 / sum w^2; degenerate flags
// ess < 10% of n.
struct MeanEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  double ess = 0.0;
  bool degenerate = false;
};

MeanEstimate predictive_mean(const Prior& prior, const GaussianModel& model,
                             const Eigen::VectorXd& x, std::uint64_t n,
                             std::uint64_t seed);

// Rectangular slice of the density over two y-coordinates, remaining
// coordinates pinned at the anchor (origin by default).
struct SliceGrid {
  int axis1 = 0;
  int axis2 = 1;
  double min1 = -3.0, max1 = 3.0;
  double min2 = -3.0, max2 = 3.0;
  int n1 = 61, n2 = 61;
};

struct SliceRow {
  double y1, y2, density;
};

struct SliceTable {
  std::vector<SliceRow> rows;  // row-major in the first axis
};

SliceTable density_slice(const PredictiveDensity& density,
                         const Eigen::VectorXd& x, const SliceGrid& grid,
                         const Eigen::VectorXd& anchor = Eigen::VectorXd(),
                         unsigned threads = 1);

std::string slice_to_csv(const SliceTable& table);

}  // namespace klpred
