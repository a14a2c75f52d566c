#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lorenzfit {

// Lorenz-curve ordinates (u_j, s_j), j = 1..J, with (u_0, s_0) = (0, 0)
// implied.  u holds cumulative population proportions, s cumulative income
// shares; both end at 1.
//
// s is only required to be nondecreasing: a group with zero income (as in the
// maximal-inequality quintiles s = (0, 0, 0, 0, 1)) is legitimate data.
struct GroupedDataset {
  std::string id;
  std::vector<double> u;
  std::vector<double> s;
  std::optional<double> mean;
  std::optional<double> survey_gini;

  std::size_t J() const noexcept { return u.size(); }

  // Non-cumulative income shares c_j = s_j - s_{j-1}.
  std::vector<double> shares() const;
  // Non-cumulative population proportions p_j = u_j - u_{j-1}.
  std::vector<double> proportions() const;

  // Throws ValidationError listing every violated invariant.
  void validate() const;
};

// Builds a dataset from non-cumulative shares.  Shares summing to 1 within
// 1e-6 are renormalized; proportions default to J equal groups.
GroupedDataset from_shares(std::span<const double> shares,
                           std::optional<std::span<const double>> proportions = std::nullopt,
                           std::string id = {});

// Equal-population grouping u_j = j / J.
std::vector<double> equal_groups(std::size_t J);

// Gini of the linearly interpolated Lorenz curve,
// 1 - sum_j (u_j - u_{j-1})(s_j + s_{j-1}).
double lower_bound_gini(const GroupedDataset& d);

// Piecewise-linear Lorenz curve through (0, 0) and every (u_j, s_j).
double empirical_lorenz(const GroupedDataset& d, double u);

}  // namespace lorenzfit
