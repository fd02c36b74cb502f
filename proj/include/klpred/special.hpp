#pragma once

namespace klpred {

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a),
// evaluated by the power series for x < a + 1 and by the Lentz continued
// fraction for the upper tail otherwise.
double gamma_p(double a, double x);

// log P(a, x), stable down to x -> 0 where P ~ x^a / Gamma(a+1).
double log_gamma_p(double a, double x);

// log [P(a, x) x^{-a}], finite at x = 0 where it equals -log Gamma(a+1).
// Removes the x^a factor analytically so callers can cancel it against
// their own x^{-a} terms without forming two infinities.
double log_gamma_p_scaled(double a, double x);

// Pieces of the radial profile of a Gaussian convolution of ||mu||^{-2a}
// type priors.  With x = u^2/2,
//   Q(a, x)  = x^a e^{-x} / gamma(a, x)       (-> a as x -> 0)
// the struct carries the combinations that stay accurate when Q - a is
// tiny:
//   q_minus_a        = Q - a                  (~ -a x/(a+1) near 0)
//   q_minus_a_over_x = (Q - a)/x              (-> -a/(a+1))
//   dq_dx            = Q' = Q ((a - Q)/x - 1)
struct GammaRatio {
  double q;
  double q_minus_a;
  double q_minus_a_over_x;
  double dq_dx;
};
GammaRatio lower_gamma_ratio(double a, double x);

// Surface area of the unit sphere S^{p-1} in R^p: 2 pi^{p/2} / Gamma(p/2).
double unit_sphere_area(int p);

}  // namespace klpred
