#pragma once

#include <Eigen/Dense>
#include <functional>

namespace klpred {

struct FdValue {
  double value = 0.0;
  double error = 0.0;  // absolute error bound from the step model below
};

// Central differences with one Richardson level.  `scale` is the length over
// which f varies by O(1); `noise` an absolute bound on the error of each f
// evaluation (0 for closed forms, the quadrature bound otherwise).  Steps:
//   first derivative:  h = scale * cbrt(max(eps_f, noise))
//   second derivative: h = scale * (max(eps_f, noise))^{1/6}
// balancing truncation against rounding/noise amplification; the reported
// error combines the Richardson defect with the noise term.
FdValue fd_first(const std::function<double(double)>& f, double x,
                 double scale, double noise = 0.0);
FdValue fd_second(const std::function<double(double)>& f, double x,
                  double scale, double noise = 0.0);

struct FdVec {
  Eigen::VectorXd value;
  double error = 0.0;  // per-component bound
};

FdVec fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                  const Eigen::VectorXd& z, double scale, double noise = 0.0);

// Sum of 1-D second differences along the coordinate axes.
FdValue fd_laplacian(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& z, double scale,
                     double noise = 0.0);

}  // namespace klpred
