#include "klpred/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace klpred {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Series tail T(a, x) = sum_{n>=1} x^n / ((a+1)...(a+n)) and T/x.
// gamma(a, x) = x^a e^{-x} (1 + T) / a, valid (and fast) for x < a + 1.
struct SeriesTail {
  double t;
  double t_over_x;
};

SeriesTail gamma_series_tail(double a, double x) {
  double term = 1.0 / (a + 1.0);  // first term of T/x
  double t_over_x = term;
  for (int n = 2; n <= kMaxIter; ++n) {
    term *= x / (a + n);
    t_over_x += term;
    if (term < t_over_x * kEps) {
      return {t_over_x * x, t_over_x};
    }
  }
  throw std::runtime_error("gamma_series_tail: series did not converge");
}

// Continued fraction for Q(a, x) = 1 - P(a, x), modified Lentz.
// Returns Q(a,x) * Gamma(a) * e^{x} * x^{-a}, i.e. the bare fraction.
double upper_gamma_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("upper_gamma_cf: continued fraction did not converge");
}

}  // namespace

double log_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("log_gamma_p: a must be > 0");
  if (x < 0.0) throw std::invalid_argument("log_gamma_p: x must be >= 0");
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (x < a + 1.0) {
    SeriesTail s = gamma_series_tail(a, x);
    // P = x^a e^{-x} (1 + T) / (a Gamma(a)) = x^a e^{-x} (1 + T) / Gamma(a+1)
    return a * std::log(x) - x + std::log1p(s.t) - std::lgamma(a + 1.0);
  }
  double q = upper_gamma_cf(a, x) * std::exp(-x + a * std::log(x) - std::lgamma(a));
  return std::log1p(-q);
}

double gamma_p(double a, double x) { return std::exp(log_gamma_p(a, x)); }

double log_gamma_p_scaled(double a, double x) {
  if (!(a > 0.0))
    throw std::invalid_argument("log_gamma_p_scaled: a must be > 0");
  if (x < 0.0)
    throw std::invalid_argument("log_gamma_p_scaled: x must be >= 0");
  if (x < a + 1.0) {
    double t = (x == 0.0) ? 0.0 : gamma_series_tail(a, x).t;
    return -x + std::log1p(t) - std::lgamma(a + 1.0);
  }
  return log_gamma_p(a, x) - a * std::log(x);
}

GammaRatio lower_gamma_ratio(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("lower_gamma_ratio: a must be > 0");
  if (x < 0.0) throw std::invalid_argument("lower_gamma_ratio: x must be >= 0");
  GammaRatio r;
  if (x < a + 1.0) {
    // Q = a / (1 + T);  Q - a = -a T / (1 + T).  No cancellation.
    SeriesTail s = gamma_series_tail(a, x);
    r.q = a / (1.0 + s.t);
    r.q_minus_a = -a * s.t / (1.0 + s.t);
    r.q_minus_a_over_x = -a * s.t_over_x / (1.0 + s.t);
  } else {
    double log_gamma_lower = log_gamma_p(a, x) + std::lgamma(a);
    r.q = std::exp(a * std::log(x) - x - log_gamma_lower);
    r.q_minus_a = r.q - a;
    r.q_minus_a_over_x = r.q_minus_a / x;
  }
  r.dq_dx = r.q * (-r.q_minus_a_over_x - 1.0);
  return r;
}

double unit_sphere_area(int p) {
  if (p < 1) throw std::invalid_argument("unit_sphere_area: p must be >= 1");
  const double half_p = 0.5 * p;
  return 2.0 * std::exp(half_p * std::log(M_PI) - std::lgamma(half_p));
}

}  // namespace klpred
