#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "klpred/predictive.hpp"
#include "klpred/rng.hpp"
#include "klpred/util.hpp"

using namespace klpred;

namespace {

const double kPi = std::acos(-1.0);

Eigen::VectorXd e1(int p, double scale = 1.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  v[0] = scale;
  return v;
}

Eigen::VectorXd mixed_dir(int p) {
  Eigen::VectorXd v(p);
  for (int i = 0; i < p; ++i) v[i] = std::sin(0.9 * (i + 1)) + 0.2;
  return v / v.norm();
}

}  // namespace

TEST_SUITE("predictive") {

TEST_CASE("best-invariant density closed values") {
  // N(x, (v_x+v_y) I) at y = x, p = 5, v_x = 1, v_y = 0.2
  const GaussianModel m5 = make_model(5, 1.0, 0.2);
  const Eigen::VectorXd x = 0.7 * mixed_dir(5);
  CHECK(log_density_u(m5, x, x) ==
        doctest::Approx(-2.5 * std::log(2.0 * kPi * 1.2)).epsilon(1e-12));

  const GaussianModel m1 = make_model(1, 0.5, 0.5);
  Eigen::VectorXd x1(1), y1(1);
  x1 << 0.3;
  y1 << 1.3;
  CHECK(log_density_u(m1, x1, y1) ==
        doctest::Approx(-0.5 * std::log(2.0 * kPi) - 0.5).epsilon(1e-12));
}

TEST_CASE("densities depend on x and y only through y - x where they should") {
  const GaussianModel model = make_model(4, 1.0, 0.5);
  Rng rng(11);
  const Eigen::VectorXd x = rng.normal_vec(4), y = rng.normal_vec(4),
                        shift = rng.normal_vec(4);
  CHECK(log_density_u(model, x, y) ==
        doctest::Approx(log_density_u(model, x + shift, y + shift))
            .epsilon(1e-12));
  CHECK(log_density_plugin(model, x, y) ==
        doctest::Approx(log_density_plugin(model, x + shift, y + shift))
            .epsilon(1e-12));
  // plug-in is N(x, v_y I)
  CHECK(log_density_plugin(model, x, y) ==
        doctest::Approx(log_normal_density((y - x).squaredNorm(), model.v_y,
                                           model.p))
            .epsilon(1e-12));
}

TEST_CASE("weighted mean pools x and y by precision") {
  const GaussianModel model = make_model(3, 1.0, 0.2);
  Rng rng(5);
  const Eigen::VectorXd x = rng.normal_vec(3), y = rng.normal_vec(3);
  const Eigen::VectorXd w = weighted_mean(model, x, y);
  const Eigen::VectorXd expect =
      (model.v_y * x + model.v_x * y) / (model.v_x + model.v_y);
  CHECK((w - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("gaussian-prior bayes density has a conjugate closed form") {
  // With a N(b, sigma2 I) prior the predictive is
  // N(b + rho (x - b), (v_y + rho v_x) I), rho = sigma2/(sigma2 + v_x).
  const int p = 4;
  const GaussianModel model = make_model(p, 1.0, 0.3);
  const double sigma2 = 2.0;
  const Eigen::VectorXd b = e1(p, 0.5);
  const Prior pr = validate_prior(GaussianPrior{sigma2, b}, p);
  const double rho = sigma2 / (sigma2 + model.v_x);
  Rng rng(17);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd x = 2.0 * rng.normal_vec(p);
    const Eigen::VectorXd y = 2.0 * rng.normal_vec(p);
    const Eigen::VectorXd mean = b + rho * (x - b);
    const double tau = model.v_y + rho * model.v_x;
    const double expect = log_normal_density((y - mean).squaredNorm(), tau, p);
    CHECK(log_density_bayes(pr, model, x, y) ==
          doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("uniform-prior bayes density reduces to the best-invariant one") {
  const GaussianModel model = make_model(5, 1.0, 0.2);
  const Prior pr = validate_prior(UniformPrior{}, 5);
  Rng rng(23);
  const Eigen::VectorXd x = rng.normal_vec(5), y = rng.normal_vec(5);
  CHECK(log_density_bayes(pr, model, x, y) ==
        doctest::Approx(log_density_u(model, x, y)).epsilon(1e-12));
}

TEST_CASE("bayes density integrates to one") {
  // MC integral of p_bayes(y|x) against the dominating density p_u.
  const int p = 5;
  const GaussianModel model = make_model(p, 1.0, 0.2);
  const Prior pr = validate_prior(HarmonicPrior{}, p);
  const Eigen::VectorXd x = e1(p, 1.5);
  const double sd = std::sqrt(model.v_x + model.v_y);
  Rng rng(20251106);
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd y = x + sd * rng.normal_vec(p);
    const double r =
        std::exp(log_density_bayes(pr, model, x, y) - log_density_u(model, x, y));
    sum += r;
    sum2 += r * r;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) <= 4.0 * se);
}

TEST_CASE("log_density dispatches on the kind") {
  const GaussianModel model = make_model(5, 1.0, 0.2);
  const Prior pr = validate_prior(HarmonicPrior{}, 5);
  Rng rng(3);
  const Eigen::VectorXd x = rng.normal_vec(5), y = rng.normal_vec(5);
  CHECK(log_density(PredictiveDensity{model, UniformKind{}}, x, y) ==
        log_density_u(model, x, y));
  CHECK(log_density(PredictiveDensity{model, PlugInKind{}}, x, y) ==
        log_density_plugin(model, x, y));
  CHECK(log_density(PredictiveDensity{model, BayesKind{pr}}, x, y) ==
        log_density_bayes(pr, model, x, y));
}

TEST_CASE("predictive mean matches the conjugate closed form") {
  const int p = 4;
  const GaussianModel model = make_model(p, 1.0, 0.3);
  const double sigma2 = 2.0;
  const Prior pr = validate_prior(GaussianPrior{sigma2, {}}, p);
  const Eigen::VectorXd x = e1(p, 2.0);
  const MeanEstimate est = predictive_mean(pr, model, x, 40000, 20251106);
  REQUIRE(est.mean.size() == p);
  CHECK(!est.degenerate);
  CHECK(est.ess > 4000.0);
  const double rho = sigma2 / (sigma2 + model.v_x);
  const Eigen::VectorXd expect = rho * x;
  for (int i = 0; i < p; ++i)
    CHECK(std::abs(est.mean[i] - expect[i]) <=
          4.0 * est.std_error[i] + 1e-12);
}

TEST_CASE("predictive mean under the harmonic prior shrinks toward zero") {
  const int p = 5;
  const GaussianModel model = make_model(p, 1.0, 0.2);
  const Prior pr = validate_prior(HarmonicPrior{}, p);
  const Eigen::VectorXd x = e1(p, 2.0);
  const MeanEstimate est = predictive_mean(pr, model, x, 40000, 20251106);
  CHECK(!est.degenerate);
  CHECK(est.mean.norm() < x.norm());
  CHECK(est.mean[0] > 0.0);
}

TEST_CASE("density slice covers the grid and pins the anchor") {
  const int p = 5;
  const GaussianModel model = make_model(p, 1.0, 0.2);
  const PredictiveDensity dens{model, UniformKind{}};
  const Eigen::VectorXd x = e1(p, 2.0);
  SliceGrid grid;
  grid.n1 = 21;
  grid.n2 = 11;
  grid.min1 = -1.0;
  grid.max1 = 5.0;
  const SliceTable table = density_slice(dens, x, grid);
  REQUIRE(table.rows.size() == std::size_t(grid.n1) * grid.n2);
  CHECK(table.rows.front().y1 == doctest::Approx(grid.min1));
  CHECK(table.rows.front().y2 == doctest::Approx(grid.min2));
  CHECK(table.rows.back().y1 == doctest::Approx(grid.max1));
  CHECK(table.rows.back().y2 == doctest::Approx(grid.max2));
  double best = -1.0, best_y1 = 0.0;
  for (const SliceRow& r : table.rows) {
    CHECK(r.density > 0.0);
    if (r.density > best) {
      best = r.density;
      best_y1 = r.y1;
    }
  }
  // p_u peaks at y = x; remaining coordinates anchored at the origin
  CHECK(best_y1 == doctest::Approx(2.0).epsilon(1e-12));
  const double direct = std::exp(log_density_u(
      model, x, e1(p, 2.0)));
  CHECK(best == doctest::Approx(direct).epsilon(1e-12));

  // explicit anchor moves the pinned coordinates
  const Eigen::VectorXd anchor = e1(p, 0.0) + 0.5 * mixed_dir(p);
  const SliceTable shifted = density_slice(dens, x, grid, anchor);
  Eigen::VectorXd y = anchor;
  y[grid.axis1] = shifted.rows.front().y1;
  y[grid.axis2] = shifted.rows.front().y2;
  CHECK(shifted.rows.front().density ==
        doctest::Approx(std::exp(log_density_u(model, x, y))).epsilon(1e-12));
}

TEST_CASE("slices run identically across thread counts") {
  const int p = 5;
  const GaussianModel model = make_model(p, 1.0, 0.2);
  const Prior pr = validate_prior(HarmonicPrior{}, p);
  const PredictiveDensity dens{model, BayesKind{pr}};
  const Eigen::VectorXd x = e1(p, 2.0);
  SliceGrid grid;
  grid.n1 = 13;
  grid.n2 = 13;
  const SliceTable a = density_slice(dens, x, grid, {}, 1);
  const SliceTable b = density_slice(dens, x, grid, {}, 8);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    CHECK(a.rows[i].density == b.rows[i].density);
  CHECK(slice_to_csv(a) == slice_to_csv(b));
}

TEST_CASE("shrinkage pulls the predictive mode toward the origin") {
  const int p = 5;
  const GaussianModel model = make_model(p, 1.0, 0.2);
  const Prior pr = validate_prior(HarmonicPrior{}, p);
  const Eigen::VectorXd x = e1(p, 2.0);
  // along the x axis, the bayes density must put its mass below y1 = 2
  double best_u = 0.0, best_h = 0.0, max_ratio = 0.0;
  double arg_u = -1.0, arg_h = -1.0;
  for (int i = 0; i <= 200; ++i) {
    const double y1 = -1.0 + 4.0 * i / 200.0;
    const Eigen::VectorXd y = e1(p, y1);
    const double du = std::exp(log_density_u(model, x, y));
    const double dh = std::exp(log_density_bayes(pr, model, x, y));
    if (du > best_u) {
      best_u = du;
      arg_u = y1;
    }
    if (dh > best_h) {
      best_h = dh;
      arg_h = y1;
    }
    max_ratio = std::max(max_ratio, dh / du);
  }
  CHECK(arg_u == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(arg_h > 0.0);
  CHECK(arg_h < arg_u);
  CHECK(max_ratio >= 1.0);
}

}  // TEST_SUITE
