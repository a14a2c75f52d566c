#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "lorenzfit/grouped.hpp"
#include "lorenzfit/measures.hpp"

namespace lorenzfit {

// omega * Weibull(shape beta, scale alpha) + (1 - omega) * Normal(mu, sigma)
// truncated to x > 0.
struct MixtureSpec {
  double beta = 1.0;
  double alpha = 1.0;
  double omega = 1.0;
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const;
};

// Six bimodal parameter sets used for validation experiments.
const std::array<MixtureSpec, 6>& mixture_presets();
MixtureSpec mixture_preset(std::size_t index);  // 1-based

inline constexpr std::size_t kDefaultMixtureSampleSize = 10'000;

double mixture_pdf(const MixtureSpec& spec, double x);
double mixture_cdf(const MixtureSpec& spec, double x);

// n unit-weight draws; deterministic given seed.
Microdata sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed);

struct GroupingPolicy {
  std::size_t J = 10;
  bool equivalise = true;
  bool bottom_code = true;
  bool top_code = true;

  void validate() const;  // J >= 2
};

// Household microdata to grouped shares.  Steps, in order: divide income by
// sqrt(household size); drop nonpositive incomes; replace incomes below 1% of
// the weighted mean by that floor; cap incomes at 10 times the weighted
// median; multiply weights by household size; sort and cut into J groups of
// (as nearly as whole records allow) equal cumulative weight.  u_j is the
// realised cumulative weight fraction of each group.  Missing sizes count
// as 1.  Throws ValidationError when nothing survives filtering.
GroupedDataset microdata_to_grouped(const Microdata& m, const GroupingPolicy& policy,
                                    std::optional<std::span<const double>> household_sizes = std::nullopt,
                                    std::string id = {});

// Person-level incomes and weights after the coding steps above.
Microdata prepare_microdata(const Microdata& m, const GroupingPolicy& policy,
                            std::optional<std::span<const double>> household_sizes = std::nullopt);

// Weighted quantile, left-continuous: smallest x with cumulative weight >= p W.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double p);

}  // namespace lorenzfit
