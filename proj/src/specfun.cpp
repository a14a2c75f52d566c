#include "lorenzfit/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "lorenzfit/errors.hpp"

namespace lorenzfit::specfun {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

// Stirling series is used from this point on; below it the argument is
// shifted up with the recurrence Gamma(x+1) = x Gamma(x).
constexpr double kStirlingCutoff = 12.0;

double stirling_ln_gamma(double x) {
  // Coefficients B_2k / (2k (2k-1)), k = 1..7.
  static constexpr std::array<double, 7> c = {
      1.0 / 12.0,    -1.0 / 360.0,       1.0 / 1260.0, -1.0 / 1680.0,
      1.0 / 1188.0,  -691.0 / 360360.0,  1.0 / 156.0};
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) series = series * inv2 + *it;
  series *= inv;
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double x, double p, double q) {
  constexpr int kMaxIter = 20000;
  const double qab = p + q;
  const double qap = p + 1.0;
  const double qam = p - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (q - m) * x / ((qam + m2) * (p + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw ConvergenceError("incomplete beta continued fraction did not converge");
}

// ln x and ln(1-x), each taken from whichever representation is exact.
void log_pair(double x, double y, double& lx, double& ly) {
  lx = x < 0.5 ? std::log(x) : std::log1p(-y);
  ly = y < 0.5 ? std::log(y) : std::log1p(-x);
}

void check_shapes(double p, double q, const char* fn) {
  if (!(p > 0.0) || !(q > 0.0) || !std::isfinite(p) || !std::isfinite(q)) {
    throw DomainError(std::string(fn) + ": shape parameters must be finite and positive");
  }
}

// Solves inc_beta_ratio(x; p, q) = target for a root known to lie in (0, 0.5].
// Newton iteration in z = ln x, safeguarded by a bracket.  The log scale keeps
// relative precision when the root is many orders of magnitude below 1.
double solve_lower_half(double target, double p, double q, double guess) {
  const double lnb = ln_beta(p, q);
  const double log_target = std::log(target);
  const double z_max = std::log(0.5);
  constexpr double kZmin = -745.0;

  struct Eval {
    double h;      // ln I(e^z) - ln target
    double slope;  // d h / d z
  };
  auto eval = [&](double z) {
    const double x = std::exp(z);
    const double y = -std::expm1(z);
    const double ib = inc_beta_ratio(x, y, p, q);
    const double dens = std::exp(p * z + (q - 1.0) * std::log1p(-x) - lnb);
    return Eval{std::log(ib) - log_target, dens / ib};
  };

  // Start from the supplied guess when usable, else the small-x asymptote
  // I_x ~ x^p / (p B(p, q)).
  double z = guess > 0.0 && guess <= 0.5 ? std::log(guess) : std::min((log_target + std::log(p) + lnb) / p, z_max);
  Eval e = eval(z);
  double z_hi = z_max;
  double z_lo = -std::numeric_limits<double>::infinity();
  if (e.h > 0.0) z_hi = z; else z_lo = z;

  for (int iter = 0; iter < 400; ++iter) {
    if (e.h == 0.0) return std::exp(z);
    double z_new = z - e.h / e.slope;
    if (!(e.slope > 0.0) || !std::isfinite(z_new) || z_new <= z_lo || z_new >= z_hi) {
      // Bisect; with no lower bracket yet, step down geometrically.
      z_new = std::isfinite(z_lo) ? 0.5 * (z_lo + z_hi) : z_hi - std::max(1.0, 2.0 * (z_max - z_hi));
    }
    if (z_new < kZmin) {
      // Root below the smallest double only if the floor still overshoots.
      if (std::isfinite(z_lo)) {
        z_new = 0.5 * (z_lo + z_hi);
      } else {
        const Eval f = eval(kZmin);
        if (f.h > 0.0) return 0.0;
        z_lo = kZmin;
        z_new = 0.5 * (z_lo + z_hi);
      }
    }
    const double tol = 4.0 * kEps * std::max(1.0, std::abs(z_new));
    if (std::abs(z_new - z) <= tol || (z_hi - z_lo) <= tol) return std::exp(z_new);
    z = z_new;
    e = eval(z);
    if (e.h > 0.0) z_hi = z; else z_lo = z;
  }
  throw ConvergenceError("inverse incomplete beta: root finder did not converge");
}

// Abramowitz-Stegun 26.5.22 normal approximation for p, q >= 1, else the
// two-tail power approximation; only a starting point for Newton.
double inverse_beta_guess(double y, double p, double q) {
  if (p >= 1.0 && q >= 1.0) {
    const double pp = y < 0.5 ? y : 1.0 - y;
    const double t = std::sqrt(-2.0 * std::log(pp));
    double x = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
    if (y < 0.5) x = -x;
    const double al = (x * x - 3.0) / 6.0;
    const double h = 2.0 / (1.0 / (2.0 * p - 1.0) + 1.0 / (2.0 * q - 1.0));
    const double w = x * std::sqrt(al + h) / h -
                     (1.0 / (2.0 * q - 1.0) - 1.0 / (2.0 * p - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
    return p / (p + q * std::exp(2.0 * w));
  }
  const double t = std::exp(p * std::log(p / (p + q))) / p;
  const double u = std::exp(q * std::log(q / (p + q))) / q;
  const double w = t + u;
  if (y < t / w) return std::pow(p * w * y, 1.0 / p);
  return 1.0 - std::pow(q * w * (1.0 - y), 1.0 / q);
}

bool nonpositive_integer(double v) { return v <= 0.0 && v == std::floor(v); }

}  // namespace

void SeriesControl::validate() const {
  if (max_terms < 1) throw DomainError("SeriesControl: max_terms must be >= 1");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DomainError("SeriesControl: rel_tol must be in (0, 1)");
}

double ln_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("ln_gamma: argument must be positive");
  if (std::isinf(x)) return x;
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x >= kStirlingCutoff) return stirling_ln_gamma(x);
  double shifted = x;
  double prod = 1.0;
  while (shifted < kStirlingCutoff) {
    prod *= shifted;
    shifted += 1.0;
  }
  return stirling_ln_gamma(shifted) - std::log(prod);
}

double ln_beta(double p, double q) { return ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q); }

double inc_beta_ratio(double x, double p, double q) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("inc_beta_ratio: x must be in [0, 1]");
  return inc_beta_ratio(x, 1.0 - x, p, q);
}

double inc_beta_ratio(double x, double one_minus_x, double p, double q) {
  check_shapes(p, q, "inc_beta_ratio");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("inc_beta_ratio: x must be in [0, 1]");
  if (x == 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  double lx, ly;
  log_pair(x, one_minus_x, lx, ly);
  const double front_log = p * lx + q * ly - ln_beta(p, q);
  if (x < (p + 1.0) / (p + q + 2.0)) {
    const double v = std::exp(front_log) * beta_continued_fraction(x, p, q) / p;
    return std::clamp(v, 0.0, 1.0);
  }
  const double v = 1.0 - std::exp(front_log) * beta_continued_fraction(one_minus_x, q, p) / q;
  return std::clamp(v, 0.0, 1.0);
}

BetaRoot inv_inc_beta_ratio_pair(double y, double p, double q) {
  check_shapes(p, q, "inv_inc_beta_ratio");
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("inv_inc_beta_ratio: y must be in [0, 1]");
  if (y == 0.0) return {0.0, 1.0};
  if (y == 1.0) return {1.0, 0.0};
  // Decide which half holds the root, then solve for the smaller of x and
  // 1 - x so that both are returned to full precision.
  const double mid = inc_beta_ratio(0.5, 0.5, p, q);
  const double guess = inverse_beta_guess(y, p, q);
  const bool finite_guess = std::isfinite(guess);
  if (y <= mid) {
    const double x = solve_lower_half(y, p, q, finite_guess ? guess : -1.0);
    return {x, 1.0 - x};
  }
  const double w = solve_lower_half(1.0 - y, q, p, finite_guess ? 1.0 - guess : -1.0);
  return {1.0 - w, w};
}

double inv_inc_beta_ratio(double y, double p, double q) { return inv_inc_beta_ratio_pair(y, p, q).x; }

double inc_gamma_ratio(double x, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("inc_gamma_ratio: nu must be positive");
  if (!(x >= 0.0)) throw DomainError("inc_gamma_ratio: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double log_front = -x + nu * std::log(x) - ln_gamma(nu);
  constexpr int kMaxIter = 100000;
  if (x < nu + 1.0) {
    double ap = nu;
    double del = 1.0 / nu;
    double sum = del;
    for (int n = 0; n < kMaxIter; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kEps) {
        return std::clamp(sum * std::exp(log_front), 0.0, 1.0);
      }
    }
    throw ConvergenceError("inc_gamma_ratio: series did not converge");
  }
  double b = x + 1.0 - nu;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - nu);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      return std::clamp(1.0 - std::exp(log_front) * h, 0.0, 1.0);
    }
  }
  throw ConvergenceError("inc_gamma_ratio: continued fraction did not converge");
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double std_normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("std_normal_quantile: u must be in (0, 1)");
  if (u > 0.5) return -std_normal_quantile(1.0 - u);

  // Acklam's rational approximation (relative error ~1e-9) ...
  static constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02,
                                              -2.759285104469687e+02, 1.383577518672690e+02,
                                              -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02,
                                              -1.556989798598866e+02, 6.680131188771972e+01,
                                              -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01,
                                              -2.400758277161838e+00, -2.549732539343734e+00,
                                              4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01,
                                              2.445134137142996e+00, 3.754408661907416e+00};
  double x;
  if (u < 0.02425) {
    const double t = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  } else {
    const double t = u - 0.5;
    const double r = t * t;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * t /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  // ... refined by Halley steps against the erfc-based cdf.
  for (int i = 0; i < 2; ++i) {
    const double e = std_normal_cdf(x) - u;
    const double g = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= g / (1.0 + 0.5 * x * g);
  }
  return x;
}

SeriesResult hyp3f2_unit(double a1, double a2, double a3, double b1, double b2, const SeriesControl& ctl) {
  ctl.validate();
  if (nonpositive_integer(b1) || nonpositive_integer(b2)) {
    throw DomainError("hyp3f2_unit: denominator parameter is a nonpositive integer");
  }
  const std::array<double, 3> num = {a1, a2, a3};
  const auto ratio = [&](double k) {
    return (a1 + k) * (a2 + k) * (a3 + k) / ((b1 + k) * (b2 + k) * (k + 1.0));
  };

  // Neumaier-compensated running sum.
  double sum = 0.0;
  double comp = 0.0;
  auto add = [&](double t) {
    const double s = sum + t;
    if (std::abs(sum) >= std::abs(t)) comp += (sum - s) + t;
    else comp += (t - s) + sum;
    sum = s;
  };

  const bool terminating = std::any_of(num.begin(), num.end(), nonpositive_integer);
  if (terminating) {
    double t = 1.0;
    std::size_t k = 0;
    for (; k < ctl.max_terms && t != 0.0; ++k) {
      add(t);
      t *= ratio(static_cast<double>(k));
    }
    return {sum + comp, t == 0.0, k};
  }

  const double margin = b1 + b2 - a1 - a2 - a3;
  if (!(margin > 0.0)) {
    throw DomainError("hyp3f2_unit: series diverges at unit argument (b1+b2-a1-a2-a3 <= 0)");
  }

  // Asymptotic regime check for the extrapolation: checkpoints well beyond
  // the parameter magnitudes.
  double scale = 1.0;
  for (double v : {a1, a2, a3, b1, b2}) scale = std::max(scale, std::abs(v));

  constexpr std::size_t kFirstCheckpoint = 32;
  constexpr std::size_t kMaxOrder = 8;
  std::vector<std::vector<double>> table;  // Richardson table, row per checkpoint
  std::size_t next_checkpoint = kFirstCheckpoint;
  double best = 0.0;
  double prev_diag = std::numeric_limits<double>::quiet_NaN();

  double t = 1.0;
  for (std::size_t k = 0; k < ctl.max_terms; ++k) {
    add(t);
    const double total = sum + comp;
    const double kd = static_cast<double>(k);
    if (std::abs(t) <= ctl.rel_tol * std::abs(total) &&
        std::abs(t) * (kd + 1.0) / margin <= ctl.rel_tol * std::abs(total)) {
      return {total, true, k + 1};
    }
    t *= ratio(kd);

    if (k + 1 == next_checkpoint) {
      next_checkpoint *= 2;
      std::vector<double> row{total};
      if (!table.empty()) {
        const auto& prev = table.back();
        const std::size_t order = std::min(prev.size(), kMaxOrder);
        for (std::size_t m = 1; m <= order; ++m) {
          const double factor = std::pow(2.0, margin + static_cast<double>(m - 1)) - 1.0;
          row.push_back(row[m - 1] + (row[m - 1] - prev[m - 1]) / factor);
        }
      }
      table.push_back(std::move(row));
      const double diag = table.back().back();
      best = diag;
      if (static_cast<double>(k + 1) >= 8.0 * scale && table.back().size() >= 3 && std::isfinite(prev_diag) &&
          std::abs(diag - prev_diag) <= ctl.rel_tol * std::abs(diag)) {
        return {diag, true, k + 1};
      }
      prev_diag = diag;
    }
  }
  return {table.empty() ? sum + comp : best, false, ctl.max_terms};
}

}  // namespace lorenzfit::specfun
