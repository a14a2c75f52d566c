#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lorenzfit/specfun.hpp"

namespace lorenzfit {

// Members of the GB2 family used for income distributions.  Lognormal is a
// limiting case and Weibull belongs to the generalized gamma branch.
enum class Family { GB2, B2, SM, Dagum, Lognormal, Fisk, Weibull };

inline constexpr std::array<Family, 7> kAllFamilies = {Family::GB2,       Family::B2,   Family::SM,     Family::Dagum,
                                                       Family::Lognormal, Family::Fisk, Family::Weibull};

// Short names used on the command line and in reports: gb2, b2, sm, dagum,
// ln, fisk, weibull.
std::string_view family_name(Family f);
Family parse_family(std::string_view name);  // throws std::invalid_argument

// Total parameter count (shapes plus scale) and shape-only count.
std::size_t parameter_count(Family f);
std::size_t shape_count(Family f);

// GB2 parameterization shared by GB2, B2, SM, Dagum and Fisk.
struct Gb2Params {
  double a, b, p, q;
};

// A family tag plus its parameter vector.
//
// Parameter order: GB2 (a, b, p, q); B2 (b, p, q); SM (a, b, q);
// Dagum (a, b, p); Lognormal (mu, sigma); Fisk (a, b); Weibull (a, b).
// b is the scale in money units; mu of the lognormal may be any real, every
// other parameter must be positive and finite.
class FamilySpec {
 public:
  FamilySpec(Family family, std::vector<double> params);

  static FamilySpec gb2(double a, double b, double p, double q);
  static FamilySpec b2(double b, double p, double q);
  static FamilySpec sm(double a, double b, double q);
  static FamilySpec dagum(double a, double b, double p);
  static FamilySpec lognormal(double mu, double sigma);
  static FamilySpec fisk(double a, double b);
  static FamilySpec weibull(double a, double b);

  // Builds a spec from shape parameters (order as in shapes()) and a scale
  // (b, or e^mu for the lognormal).
  static FamilySpec from_shapes(Family family, std::span<const double> shapes, double scale = 1.0);

  Family family() const noexcept { return family_; }
  std::span<const double> params() const noexcept { return params_; }

  // Shape parameters only: GB2 (a, p, q); B2 (p, q); SM (a, q); Dagum (a, p);
  // Lognormal (sigma); Fisk (a); Weibull (a).
  std::vector<double> shapes() const;

  // b for the scale families; e^mu for the lognormal.
  double scale() const;
  FamilySpec with_scale(double scale) const;

  // Throws std::logic_error for Lognormal and Weibull.
  Gb2Params as_gb2() const;

  // E[X^k] < infinity, for any real k (negative k are inverse moments).
  bool moment_exists(double k) const;
  bool mean_exists() const { return moment_exists(1.0); }

  std::string to_string() const;

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;

 private:
  Family family_;
  std::vector<double> params_;
};

enum class GiniMethod { ClosedForm, Hypergeometric, MonteCarlo };
std::string_view gini_method_name(GiniMethod m);

struct GiniValue {
  double value = 0.0;
  GiniMethod method = GiniMethod::ClosedForm;
  std::optional<double> mc_std_error;
};

// Raised by gini_closed when the 3F2 series behind the GB2 Gini does not
// converge within the series control; callers fall back to Monte Carlo.
class GiniSeriesNotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double pdf(const FamilySpec& spec, double x);
double cdf(const FamilySpec& spec, double x);
double quantile(const FamilySpec& spec, double u);

// Lorenz curve; throws ExistenceError when the mean does not exist.
double lorenz(const FamilySpec& spec, double u);

// E[X^k] for k > 0; throws ExistenceError when it is infinite.
double moment(const FamilySpec& spec, double k);

// F_(k)(x) = int_0^x t^k dF / E[X^k].
double incomplete_moment_cdf(const FamilySpec& spec, double k, double x);

// Gini index from the closed forms; GB2 goes through the 3F2 representation.
// The Weibull Gini is returned for every a > 0 even though it is often quoted
// with the restriction a > 1.
GiniValue gini_closed(const FamilySpec& spec, const specfun::SeriesControl& ctl = {});

}  // namespace lorenzfit
