#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lorenzfit/estimate.hpp"

namespace lorenzfit {

struct GofScores {
  double rss = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::optional<double> wssr;
  std::size_t k = 0;
  std::size_t n = 0;          // moment count J - 1
  bool rss_floored = false;   // rss was 0 and replaced by 1e-300 in the criteria
};

// Least-squares information criteria with n = J - 1:
//   aic = n ln(rss/n) + 2k,  bic = n ln(rss/n) + k ln n.
// wssr = M' Omega^-1 M when a weighting matrix is supplied.
GofScores gof_scores(const FitResult& fit, const WeightingMatrix* omega = nullptr);

enum class Criterion { AIC, BIC, WSSR, RSS };
std::string_view criterion_name(Criterion c);
Criterion parse_criterion(std::string_view name);

// scores[d][m]: model m on dataset d; missing scores are skipped pairwise.
// Entry (r, c) is the share of datasets, among those scoring both r and c,
// in which r's criterion is strictly lower.  Ties count for neither; the
// diagonal is 1.
std::vector<std::vector<double>> dominance_matrix(const std::vector<std::vector<std::optional<GofScores>>>& scores,
                                                  Criterion criterion);

// Bin edges: absolute [0, .01, .02, .05, .1, inf), relative [0, 1%, 2%, 5%, 10%, inf).
inline constexpr std::size_t kErrorBins = 5;
std::string_view absolute_bin_label(std::size_t bin);
std::string_view relative_bin_label(std::size_t bin);
std::size_t absolute_bin(double abs_error);
std::size_t relative_bin(double rel_error);

struct MethodErrors {
  std::string method;
  std::size_t count = 0;
  std::array<std::size_t, kErrorBins> absolute{};
  std::array<std::size_t, kErrorBins> relative{};
  double mean_abs_error = 0.0;
  double mean_rel_error = 0.0;
};

struct ErrorObservation {
  std::string method;
  double estimate = 0.0;
  double benchmark = 0.0;
};

// Per-method binned absolute and relative Gini errors, methods in order of
// first appearance.  Observations with a nonpositive benchmark are skipped.
std::vector<MethodErrors> error_report(const std::vector<ErrorObservation>& obs);

}  // namespace lorenzfit
