#include "klpred/fd.hpp"

#include <cmath>
#include <limits>

namespace klpred {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();

double eps_eff(double f0, double noise) {
  return std::fmax(kEps * std::fmax(1.0, std::fabs(f0)), noise);
}
}  // namespace

FdValue fd_first(const std::function<double(double)>& f, double x,
                 double scale, double noise) {
  const double f0 = f(x);
  const double e = eps_eff(f0, noise);
  double h = scale * std::cbrt(e);
  // Make x +/- h exactly representable relative to x.
  volatile double xp = x + h;
  h = xp - x;
  if (h == 0.0) h = scale * std::cbrt(kEps);

  auto central = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2.0 * hh); };
  const double d1 = central(h);
  const double d2 = central(2.0 * h);
  FdValue out;
  out.value = (4.0 * d1 - d2) / 3.0;  // cancels the h^2 term
  out.error = std::fabs(d1 - d2) / 3.0 + 1.5 * e / h;
  return out;
}

FdValue fd_second(const std::function<double(double)>& f, double x,
                  double scale, double noise) {
  const double f0 = f(x);
  const double e = eps_eff(f0, noise);
  double h = scale * std::pow(e, 1.0 / 6.0);
  volatile double xp = x + h;
  h = xp - x;
  if (h == 0.0) h = scale * std::pow(kEps, 1.0 / 6.0);

  auto second = [&](double hh) {
    return (f(x + hh) - 2.0 * f0 + f(x - hh)) / (hh * hh);
  };
  const double d1 = second(h);
  const double d2 = second(2.0 * h);
  FdValue out;
  out.value = (4.0 * d1 - d2) / 3.0;
  out.error = std::fabs(d1 - d2) / 4.0 + 7.0 * e / (h * h);
  return out;
}

FdVec fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                  const Eigen::VectorXd& z, double scale, double noise) {
  FdVec out;
  out.value.resize(z.size());
  out.error = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    auto fi = [&](double xi) {
      Eigen::VectorXd zz = z;
      zz[i] = xi;
      return f(zz);
    };
    FdValue d = fd_first(fi, z[i], scale, noise);
    out.value[i] = d.value;
    out.error = std::fmax(out.error, d.error);
  }
  return out;
}

FdValue fd_laplacian(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& z, double scale, double noise) {
  FdValue out;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    auto fi = [&](double xi) {
      Eigen::VectorXd zz = z;
      zz[i] = xi;
      return f(zz);
    };
    FdValue d = fd_second(fi, z[i], scale, noise);
    out.value += d.value;
    out.error += d.error;
  }
  return out;
}

}  // namespace klpred
