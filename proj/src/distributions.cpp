#include "lorenzfit/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lorenzfit/errors.hpp"

namespace lorenzfit {

using specfun::inc_beta_ratio;
using specfun::inc_gamma_ratio;
using specfun::inv_inc_beta_ratio_pair;
using specfun::ln_beta;
using specfun::ln_gamma;
using specfun::std_normal_cdf;
using specfun::std_normal_quantile;

namespace {

void require_mean(const FamilySpec& spec, const char* what) {
  if (!spec.mean_exists()) {
    throw ExistenceError(std::string(what) + " undefined: " + spec.to_string() + " has no finite mean");
  }
}

void require_moment(const FamilySpec& spec, double k) {
  if (!spec.moment_exists(k)) {
    std::ostringstream os;
    os << "moment of order " << k << " does not exist for " << spec.to_string();
    throw ExistenceError(os.str());
  }
}

// cdf of GB2(a, b, p, q) with the v / (1 - v) split done without cancellation.
double gb2_cdf(double x, const Gb2Params& g) {
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double t = std::pow(x / g.b, g.a);
  if (std::isinf(t)) return 1.0;
  return inc_beta_ratio(t / (1.0 + t), 1.0 / (1.0 + t), g.p, g.q);
}

// GB2 Gini via the hypergeometric representation.
double gb2_gini_series(double a, double p, double q, const specfun::SeriesControl& ctl) {
  const double ia = 1.0 / a;
  const double prefactor = std::exp(ln_beta(2.0 * q - ia, 2.0 * p + ia) - ln_beta(p, q) - ln_beta(p + ia, q - ia));
  const auto j1 = specfun::hyp3f2_unit(1.0, p + q, 2.0 * p + ia, p + 1.0, 2.0 * (p + q), ctl);
  const auto j2 = specfun::hyp3f2_unit(1.0, p + q, 2.0 * p + ia, p + ia + 1.0, 2.0 * (p + q), ctl);
  if (!j1.converged || !j2.converged) {
    std::ostringstream os;
    os << "3F2 series for the GB2 Gini did not converge (a=" << a << ", p=" << p << ", q=" << q << ")";
    throw GiniSeriesNotConverged(os.str());
  }
  return prefactor * (j1.value / p - j2.value / (p + ia));
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::GB2: return "gb2";
    case Family::B2: return "b2";
    case Family::SM: return "sm";
    case Family::Dagum: return "dagum";
    case Family::Lognormal: return "ln";
    case Family::Fisk: return "fisk";
    case Family::Weibull: return "weibull";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : kAllFamilies) {
    if (family_name(f) == name) return f;
  }
  if (name == "lognormal") return Family::Lognormal;
  if (name == "singh-maddala") return Family::SM;
  throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

std::size_t parameter_count(Family f) {
  switch (f) {
    case Family::GB2: return 4;
    case Family::B2:
    case Family::SM:
    case Family::Dagum: return 3;
    case Family::Lognormal:
    case Family::Fisk:
    case Family::Weibull: return 2;
  }
  return 0;
}

std::size_t shape_count(Family f) { return parameter_count(f) - 1; }

std::string_view gini_method_name(GiniMethod m) {
  switch (m) {
    case GiniMethod::ClosedForm: return "closed_form";
    case GiniMethod::Hypergeometric: return "hypergeometric";
    case GiniMethod::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

FamilySpec::FamilySpec(Family family, std::vector<double> params) : family_(family), params_(std::move(params)) {
  if (params_.size() != parameter_count(family_)) {
    throw std::invalid_argument("FamilySpec: " + std::string(family_name(family_)) + " takes " +
                                std::to_string(parameter_count(family_)) + " parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const bool free_location = family_ == Family::Lognormal && i == 0;
    if (!std::isfinite(params_[i]) || (!free_location && !(params_[i] > 0.0))) {
      throw std::invalid_argument("FamilySpec: invalid parameter in " + to_string());
    }
  }
}

FamilySpec FamilySpec::gb2(double a, double b, double p, double q) { return {Family::GB2, {a, b, p, q}}; }
FamilySpec FamilySpec::b2(double b, double p, double q) { return {Family::B2, {b, p, q}}; }
FamilySpec FamilySpec::sm(double a, double b, double q) { return {Family::SM, {a, b, q}}; }
FamilySpec FamilySpec::dagum(double a, double b, double p) { return {Family::Dagum, {a, b, p}}; }
FamilySpec FamilySpec::lognormal(double mu, double sigma) { return {Family::Lognormal, {mu, sigma}}; }
FamilySpec FamilySpec::fisk(double a, double b) { return {Family::Fisk, {a, b}}; }
FamilySpec FamilySpec::weibull(double a, double b) { return {Family::Weibull, {a, b}}; }

FamilySpec FamilySpec::from_shapes(Family family, std::span<const double> s, double scale) {
  if (s.size() != shape_count(family)) throw std::invalid_argument("from_shapes: wrong number of shape parameters");
  switch (family) {
    case Family::GB2: return gb2(s[0], scale, s[1], s[2]);
    case Family::B2: return b2(scale, s[0], s[1]);
    case Family::SM: return sm(s[0], scale, s[1]);
    case Family::Dagum: return dagum(s[0], scale, s[1]);
    case Family::Lognormal: return lognormal(std::log(scale), s[0]);
    case Family::Fisk: return fisk(s[0], scale);
    case Family::Weibull: return weibull(s[0], scale);
  }
  throw std::logic_error("unreachable");
}

std::vector<double> FamilySpec::shapes() const {
  const auto& v = params_;
  switch (family_) {
    case Family::GB2: return {v[0], v[2], v[3]};
    case Family::B2: return {v[1], v[2]};
    case Family::SM: return {v[0], v[2]};
    case Family::Dagum: return {v[0], v[2]};
    case Family::Lognormal: return {v[1]};
    case Family::Fisk: return {v[0]};
    case Family::Weibull: return {v[0]};
  }
  return {};
}

double FamilySpec::scale() const {
  switch (family_) {
    case Family::B2: return params_[0];
    case Family::Lognormal: return std::exp(params_[0]);
    default: return params_[1];
  }
}

FamilySpec FamilySpec::with_scale(double scale) const {
  const auto s = shapes();
  return from_shapes(family_, s, scale);
}

Gb2Params FamilySpec::as_gb2() const {
  const auto& v = params_;
  switch (family_) {
    case Family::GB2: return {v[0], v[1], v[2], v[3]};
    case Family::B2: return {1.0, v[0], v[1], v[2]};
    case Family::SM: return {v[0], v[1], 1.0, v[2]};
    case Family::Dagum: return {v[0], v[1], v[2], 1.0};
    case Family::Fisk: return {v[0], v[1], 1.0, 1.0};
    default: throw std::logic_error("as_gb2: " + std::string(family_name(family_)) + " is not a GB2 member");
  }
}

bool FamilySpec::moment_exists(double k) const {
  if (family_ == Family::Lognormal) return true;
  if (family_ == Family::Weibull) return k > -params_[0];
  const Gb2Params g = as_gb2();
  return -g.a * g.p < k && k < g.a * g.q;
}

std::string FamilySpec::to_string() const {
  std::ostringstream os;
  os.precision(10);
  os << family_name(family_) << '(';
  for (std::size_t i = 0; i < params_.size(); ++i) os << (i ? ", " : "") << params_[i];
  os << ')';
  return os.str();
}

double pdf(const FamilySpec& spec, double x) {
  if (!(x >= 0.0)) throw DomainError("pdf: x must be nonnegative");
  const auto v = spec.params();
  switch (spec.family()) {
    case Family::Lognormal: {
      if (x == 0.0) return 0.0;
      const double z = (std::log(x) - v[0]) / v[1];
      return specfun::std_normal_pdf(z) / (x * v[1]);
    }
    case Family::Weibull: {
      const double a = v[0], b = v[1];
      const double t = std::pow(x / b, a);
      return a / x * t * std::exp(-t);
    }
    default: {
      const Gb2Params g = spec.as_gb2();
      if (x == 0.0) return 0.0;
      const double lt = g.a * std::log(x / g.b);
      const double log_f = std::log(g.a) + g.p * lt - std::log(x) - ln_beta(g.p, g.q) -
                           (g.p + g.q) * (lt > 0.0 ? lt + std::log1p(std::exp(-lt)) : std::log1p(std::exp(lt)));
      return std::exp(log_f);
    }
  }
}

double cdf(const FamilySpec& spec, double x) {
  if (!(x >= 0.0)) throw DomainError("cdf: x must be nonnegative");
  if (std::isinf(x)) return 1.0;
  const auto v = spec.params();
  switch (spec.family()) {
    case Family::GB2:
    case Family::B2: return gb2_cdf(x, spec.as_gb2());
    case Family::SM: {
      const double t = std::pow(x / v[1], v[0]);
      return -std::expm1(-v[2] * std::log1p(t));
    }
    case Family::Dagum: {
      if (x == 0.0) return 0.0;
      const double t = std::pow(x / v[1], -v[0]);
      return std::exp(-v[2] * std::log1p(t));
    }
    case Family::Fisk: {
      const double t = std::pow(x / v[1], v[0]);
      return std::isinf(t) ? 1.0 : t / (1.0 + t);
    }
    case Family::Lognormal: {
      if (x == 0.0) return 0.0;
      return std_normal_cdf((std::log(x) - v[0]) / v[1]);
    }
    case Family::Weibull: return -std::expm1(-std::pow(x / v[1], v[0]));
  }
  throw std::logic_error("unreachable");
}

double quantile(const FamilySpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must be in (0, 1)");
  const auto v = spec.params();
  switch (spec.family()) {
    case Family::GB2:
    case Family::B2: {
      const Gb2Params g = spec.as_gb2();
      const auto r = inv_inc_beta_ratio_pair(u, g.p, g.q);
      return g.b * std::pow(r.x / r.one_minus_x, 1.0 / g.a);
    }
    case Family::SM: return v[1] * std::pow(std::expm1(-std::log1p(-u) / v[2]), 1.0 / v[0]);
    case Family::Dagum: return v[1] * std::pow(std::expm1(-std::log(u) / v[2]), -1.0 / v[0]);
    case Family::Fisk: return v[1] * std::pow(u / (1.0 - u), 1.0 / v[0]);
    case Family::Lognormal: return std::exp(v[0] + v[1] * std_normal_quantile(u));
    case Family::Weibull: return v[1] * std::pow(-std::log1p(-u), 1.0 / v[0]);
  }
  throw std::logic_error("unreachable");
}

double lorenz(const FamilySpec& spec, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("lorenz: u must be in [0, 1]");
  require_mean(spec, "Lorenz curve");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  const auto v = spec.params();
  switch (spec.family()) {
    case Family::GB2:
    case Family::B2: {
      const Gb2Params g = spec.as_gb2();
      const auto r = inv_inc_beta_ratio_pair(u, g.p, g.q);
      return inc_beta_ratio(r.x, r.one_minus_x, g.p + 1.0 / g.a, g.q - 1.0 / g.a);
    }
    case Family::SM: {
      const double a = v[0], q = v[2];
      const double l = std::log1p(-u) / q;
      return inc_beta_ratio(-std::expm1(l), std::exp(l), 1.0 + 1.0 / a, q - 1.0 / a);
    }
    case Family::Dagum: {
      const double a = v[0], p = v[2];
      const double l = std::log(u) / p;
      return inc_beta_ratio(std::exp(l), -std::expm1(l), p + 1.0 / a, 1.0 - 1.0 / a);
    }
    case Family::Fisk: {
      const double a = v[0];
      return inc_beta_ratio(u, 1.0 - u, 1.0 + 1.0 / a, 1.0 - 1.0 / a);
    }
    case Family::Lognormal: return std_normal_cdf(std_normal_quantile(u) - v[1]);
    case Family::Weibull: return inc_gamma_ratio(-std::log1p(-u), 1.0 / v[0] + 1.0);
  }
  throw std::logic_error("unreachable");
}

double moment(const FamilySpec& spec, double k) {
  if (!(k > 0.0)) throw DomainError("moment: order k must be positive");
  require_moment(spec, k);
  const auto v = spec.params();
  switch (spec.family()) {
    case Family::GB2: {
      const double a = v[0], b = v[1], p = v[2], q = v[3];
      return std::pow(b, k) * std::exp(ln_beta(p + k / a, q - k / a) - ln_beta(p, q));
    }
    case Family::B2: {
      const double b = v[0], p = v[1], q = v[2];
      return std::pow(b, k) * std::exp(ln_beta(p + k, q - k) - ln_beta(p, q));
    }
    case Family::SM: {
      const double a = v[0], b = v[1], q = v[2];
      return std::pow(b, k) * std::exp(ln_gamma(1.0 + k / a) + ln_gamma(q - k / a) - ln_gamma(q));
    }
    case Family::Dagum: {
      const double a = v[0], b = v[1], p = v[2];
      return std::pow(b, k) * std::exp(ln_gamma(p + k / a) + ln_gamma(1.0 - k / a) - ln_gamma(p));
    }
    case Family::Fisk: {
      // Gamma(1 + k/a) Gamma(1 - k/a), the GB2 moment at p = q = 1.
      const double a = v[0], b = v[1];
      return std::pow(b, k) * std::exp(ln_gamma(1.0 + k / a) + ln_gamma(1.0 - k / a));
    }
    case Family::Lognormal: return std::exp(k * v[0] + 0.5 * k * k * v[1] * v[1]);
    case Family::Weibull: return std::pow(v[1], k) * std::exp(ln_gamma(1.0 + k / v[0]));
  }
  throw std::logic_error("unreachable");
}

double incomplete_moment_cdf(const FamilySpec& spec, double k, double x) {
  if (!(k > 0.0)) throw DomainError("incomplete_moment_cdf: order k must be positive");
  if (!(x >= 0.0)) throw DomainError("incomplete_moment_cdf: x must be nonnegative");
  require_moment(spec, k);
  if (std::isinf(x)) return 1.0;
  const auto v = spec.params();
  switch (spec.family()) {
    case Family::Lognormal: {
      if (x == 0.0) return 0.0;
      return std_normal_cdf((std::log(x) - v[0] - k * v[1] * v[1]) / v[1]);
    }
    case Family::Weibull: return inc_gamma_ratio(std::pow(x / v[1], v[0]), 1.0 + k / v[0]);
    default: {
      // The k-th moment distribution of GB2(a, b, p, q) is GB2(a, b, p + k/a, q - k/a).
      const Gb2Params g = spec.as_gb2();
      return gb2_cdf(x, {g.a, g.b, g.p + k / g.a, g.q - k / g.a});
    }
  }
}

GiniValue gini_closed(const FamilySpec& spec, const specfun::SeriesControl& ctl) {
  require_mean(spec, "Gini index");
  const auto v = spec.params();
  double g = 0.0;
  GiniMethod method = GiniMethod::ClosedForm;
  switch (spec.family()) {
    case Family::GB2:
      g = gb2_gini_series(v[0], v[2], v[3], ctl);
      method = GiniMethod::Hypergeometric;
      break;
    case Family::B2: {
      const double p = v[1], q = v[2];
      g = 2.0 * std::exp(ln_beta(2.0 * p, 2.0 * q - 1.0) - 2.0 * ln_beta(p, q)) / p;
      break;
    }
    case Family::SM: {
      const double a = v[0], q = v[2];
      g = -std::expm1(ln_gamma(q) + ln_gamma(2.0 * q - 1.0 / a) - ln_gamma(q - 1.0 / a) - ln_gamma(2.0 * q));
      break;
    }
    case Family::Dagum: {
      const double a = v[0], p = v[2];
      g = std::expm1(ln_gamma(p) + ln_gamma(2.0 * p + 1.0 / a) - ln_gamma(2.0 * p) - ln_gamma(p + 1.0 / a));
      break;
    }
    case Family::Lognormal: g = std::erf(0.5 * v[1]); break;  // 2 Phi(sigma / sqrt 2) - 1
    case Family::Fisk: g = 1.0 / v[0]; break;
    case Family::Weibull: g = -std::expm1(-std::numbers::ln2 / v[0]); break;
  }
  return {std::clamp(g, 0.0, 1.0), method, std::nullopt};
}

}  // namespace lorenzfit
