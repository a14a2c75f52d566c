#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lorenzfit/distributions.hpp"
#include "lorenzfit/grouped.hpp"
#include "lorenzfit/optimize.hpp"

namespace lorenzfit {

enum class Method { NLS, GMM };
std::string_view method_name(Method m);

struct FitResult {
  explicit FitResult(FamilySpec s) : spec(std::move(s)) {}

  FamilySpec spec;               // scale is 1 unless recovered from the dataset mean
  Method method = Method::NLS;
  double objective = 0.0;        // RSS for NLS, M' Omega^-1 M for GMM
  std::vector<double> residuals; // L(u_j) - s_j, j = 1..J-1
  std::size_t starts_tried = 0;
  bool converged = false;
  std::size_t k = 0;             // parameter count, shapes plus scale
  bool scale_recovered = false;
  std::vector<std::string> warnings;
};

struct WeightingMatrix {
  std::vector<double> h;            // fitted group limits quantile(u_j), j < J
  double mu = 0.0;
  double mu2 = 0.0;
  std::vector<double> mu2_partial;  // int_0^{h_i} x^2 dF
  Eigen::MatrixXd W;                // J x J
  Eigen::MatrixXd Psi;              // (J-1) x J
  Eigen::MatrixXd Omega;            // (J-1) x (J-1)
  double ridge = 0.0;               // jitter added to Omega before inversion, 0 if none
};

struct FitOptions {
  optimize::Options optimizer{};
  // Every start first gets screen_iter quasi-Newton iterations; the best
  // `finalists` unconverged runs then continue under the full optimizer.
  std::size_t screen_iter = 40;
  std::size_t finalists = 3;
};

// Gini used to seed starting values: survey_gini when present, otherwise the
// lower-bound Gini of the grouped data.
double gini_anchor(const GroupedDataset& d);

// Shape-parameter starting vectors, in the order of FamilySpec::shapes().
// When no grid point reaches the anchor each falls back to the end of its
// search interval nearest it; throws ConvergenceError only if even that fails.
std::vector<std::vector<double>> starting_values(Family family, const GroupedDataset& d);

// Sum of squared Lorenz residuals at the given shapes; +inf outside the
// region where the Lorenz curve exists.
double nls_objective(Family family, std::span<const double> shapes, const GroupedDataset& d);

// L(u_j; shapes) - s_j for j = 1..J-1.  Throws ExistenceError when the
// Lorenz curve is undefined.
std::vector<double> lorenz_residuals(Family family, std::span<const double> shapes, const GroupedDataset& d);

// Multi-start NLS over the shape parameters.  The scale is recovered when
// the dataset carries a mean.
FitResult nls_fit(Family family, const GroupedDataset& d, const FitOptions& opt = {});

// Scale matching the sample mean: b, or mu for the lognormal.
double solve_scale(const FamilySpec& shapes, double sample_mean);

WeightingMatrix weighting_matrix(const FamilySpec& spec, const GroupedDataset& d);

// M' Omega^-1 M; +inf outside the existence region.
double gmm_objective(Family family, std::span<const double> shapes, const GroupedDataset& d,
                     const Eigen::MatrixXd& omega);

// Two-step GMM.  Requires d.mean; falls back to the NLS fit (method NLS,
// with a warning) when the second stage fails.
FitResult gmm_fit(Family family, const GroupedDataset& d, const FitOptions& opt = {});

// Second stage only, started from an existing NLS fit.
FitResult gmm_from_nls(const FitResult& first, const GroupedDataset& d, const FitOptions& opt = {});

}  // namespace lorenzfit
