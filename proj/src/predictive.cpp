#include "klpred/predictive.hpp"

#include <cmath>
#include <stdexcept>

#include "klpred/rng.hpp"
#include "klpred/util.hpp"

namespace klpred {

namespace {

void check_pair(const GaussianModel& model, const Eigen::VectorXd& x,
                const Eigen::VectorXd& y, const char* who) {
  if (x.size() != model.p || y.size() != model.p)
    throw std::invalid_argument(std::string(who) +
                                ": x and y must have dimension p");
  if (!x.allFinite() || !y.allFinite())
    throw std::invalid_argument(std::string(who) + ": x and y must be finite");
}

}  // namespace

Eigen::VectorXd weighted_mean(const GaussianModel& model,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y) {
  return (model.v_y * x + model.v_x * y) / (model.v_x + model.v_y);
}

double log_density_u(const GaussianModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y) {
  check_pair(model, x, y, "log_density_u");
  return log_normal_density((y - x).squaredNorm(), model.v_x + model.v_y,
                            model.p);
}

double log_density_plugin(const GaussianModel& model, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) {
  check_pair(model, x, y, "log_density_plugin");
  return log_normal_density((y - x).squaredNorm(), model.v_y, model.p);
}

double log_density_bayes(const Prior& prior, const GaussianModel& model,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  check_pair(model, x, y, "log_density_bayes");
  const Eigen::VectorXd w = weighted_mean(model, x, y);
  return log_marginal(prior, w, model.v_w).log_value -
         log_marginal(prior, x, model.v_x).log_value +
         log_density_u(model, x, y);
}

double log_density(const PredictiveDensity& density, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
  if (std::holds_alternative<UniformKind>(density.kind))
    return log_density_u(density.model, x, y);
  if (std::holds_alternative<PlugInKind>(density.kind))
    return log_density_plugin(density.model, x, y);
  return log_density_bayes(std::get<BayesKind>(density.kind).prior,
                           density.model, x, y);
}

MeanEstimate predictive_mean(const Prior& prior, const GaussianModel& model,
                             const Eigen::VectorXd& x, std::uint64_t n,
                             std::uint64_t seed) {
  if (x.size() != model.p)
    throw std::invalid_argument("predictive_mean: x must have dimension p");
  if (n < 2) throw std::invalid_argument("predictive_mean: n must be >= 2");

  const double log_m_x = log_marginal(prior, x, model.v_x).log_value;
  const double sd = std::sqrt(model.v_x + model.v_y);

  Rng rng(seed);
  Eigen::MatrixXd ys(model.p, static_cast<Eigen::Index>(n));
  Eigen::VectorXd log_w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < ys.cols(); ++i) {
    Eigen::VectorXd y = x + sd * rng.normal_vec(model.p);
    ys.col(i) = y;
    log_w[i] = log_marginal(prior, weighted_mean(model, x, y), model.v_w)
                   .log_value -
               log_m_x;
  }

  const double shift = log_w.maxCoeff();
  Eigen::VectorXd w = (log_w.array() - shift).exp();
  const double w_sum = w.sum();

  MeanEstimate out;
  out.mean = ys * w / w_sum;
  // Delta-method standard error of the self-normalized estimator.
  out.std_error = Eigen::VectorXd::Zero(model.p);
  for (Eigen::Index i = 0; i < ys.cols(); ++i) {
    const double wn = w[i] / w_sum;
    out.std_error.array() +=
        wn * wn * (ys.col(i) - out.mean).array().square();
  }
  out.std_error = out.std_error.cwiseSqrt();
  out.ess = w_sum * w_sum / w.squaredNorm();
  out.degenerate = out.ess < 0.1 * static_cast<double>(n);
  return out;
}

SliceTable density_slice(const PredictiveDensity& density,
                         const Eigen::VectorXd& x, const SliceGrid& grid,
                         const Eigen::VectorXd& anchor, unsigned threads) {
  const int p = density.model.p;
  if (x.size() != p)
    throw std::invalid_argument("density_slice: x must have dimension p");
  if (grid.n1 < 1 || grid.n2 < 1)
    throw std::invalid_argument("density_slice: grid must be nonempty");
  if (grid.axis1 < 0 || grid.axis1 >= p || grid.axis2 < 0 ||
      grid.axis2 >= p || grid.axis1 == grid.axis2)
    throw std::invalid_argument("density_slice: invalid axis pair");
  Eigen::VectorXd base = Eigen::VectorXd::Zero(p);
  if (anchor.size() != 0) {
    if (anchor.size() != p)
      throw std::invalid_argument("density_slice: anchor must have dimension p");
    base = anchor;
  }

  auto grid_value = [](double lo, double hi, int count, int i) {
    return count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  };

  SliceTable table;
  table.rows.resize(static_cast<std::size_t>(grid.n1) * grid.n2);
  parallel_for(table.rows.size(), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / grid.n2;
    const int j = static_cast<int>(idx) % grid.n2;
    Eigen::VectorXd y = base;
    y[grid.axis1] = grid_value(grid.min1, grid.max1, grid.n1, i);
    y[grid.axis2] = grid_value(grid.min2, grid.max2, grid.n2, j);
    table.rows[idx] =
        SliceRow{y[grid.axis1], y[grid.axis2],
                 std::exp(log_density(density, x, y))};
  });
  return table;
}

std::string slice_to_csv(const SliceTable& table) {
  std::string out = "y1,y2,density\n";
  for (const SliceRow& r : table.rows) {
    out += format_double(r.y1);
    out += ',';
    out += format_double(r.y2);
    out += ',';
    out += format_double(r.density);
    out += '\n';
  }
  return out;
}

}  // namespace klpred
