#pragma once

#include <cstddef>

namespace lorenzfit::specfun {

// Truncation control for slowly converging series.
struct SeriesControl {
  std::size_t max_terms = std::size_t{1} << 22;
  double rel_tol = 1e-12;

  // Throws DomainError unless max_terms >= 1 and 0 < rel_tol < 1.
  void validate() const;
};

struct SeriesResult {
  double value = 0.0;
  bool converged = false;
  std::size_t terms = 0;  // number of series terms summed
};

// A root of the incomplete beta ratio returned together with its complement,
// so that callers needing x/(1-x) near x = 1 keep full relative precision.
struct BetaRoot {
  double x = 0.0;
  double one_minus_x = 1.0;
};

// ln Gamma(x) for x > 0.
double ln_gamma(double x);

// ln B(p, q) = ln Gamma(p) + ln Gamma(q) - ln Gamma(p + q).
double ln_beta(double p, double q);

// Regularized incomplete beta B(x; p, q) = int_0^x t^(p-1)(1-t)^(q-1) dt / B(p, q).
double inc_beta_ratio(double x, double p, double q);

// Same as inc_beta_ratio but with the complement 1 - x supplied by the caller.
// Use when 1 - x is known more accurately than the subtraction would give.
double inc_beta_ratio(double x, double one_minus_x, double p, double q);

// x in [0, 1] with inc_beta_ratio(x, p, q) == y.  Endpoints map exactly.
double inv_inc_beta_ratio(double y, double p, double q);
BetaRoot inv_inc_beta_ratio_pair(double y, double p, double q);

// Regularized lower incomplete gamma G(x; nu) = int_0^x t^(nu-1) e^-t dt / Gamma(nu).
double inc_gamma_ratio(double x, double nu);

double std_normal_cdf(double x);
double std_normal_pdf(double x);

// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double u);

// 3F2(a1, a2, a3; b1, b2; 1).
//
// Terms are generated by the Pochhammer ratio recursion.  For convergence
// margin s = b1 + b2 - a1 - a2 - a3 > 0 the terms decay like k^-(s+1), so the
// plain partial sum is returned only once the term and the estimated tail are
// both below rel_tol relative to the sum.  Otherwise partial sums at doubling
// checkpoints are Richardson-extrapolated using the known tail exponents
// s, s+1, s+2, ...; `converged` is false when neither test passes within
// max_terms.  Terminating series (a nonpositive integer numerator) are summed
// exactly.  Throws DomainError for s <= 0 or nonpositive-integer b.
SeriesResult hyp3f2_unit(double a1, double a2, double a3, double b1, double b2,
                         const SeriesControl& ctl = {});

}  // namespace lorenzfit::specfun
