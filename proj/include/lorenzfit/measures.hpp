#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lorenzfit/distributions.hpp"

namespace lorenzfit {

struct McConfig {
  std::size_t n = 1'000'000;
  std::uint64_t seed = 20240601;

  void validate() const;  // n >= 1000
};

// Incomes with person weights.
struct Microdata {
  std::vector<double> values;
  std::vector<double> weights;

  static Microdata unit(std::vector<double> values);
  std::size_t size() const noexcept { return values.size(); }
  void validate() const;  // equal lengths, values > 0, weights > 0
};

struct SampleMeasures {
  double gini = 0.0;
  std::vector<double> atkinson;  // one per requested epsilon
  double mean = 0.0;
};

// n draws by inverse transform, in 20 batches with independent streams
// derived from (seed, batch).  Deterministic given the config.
std::vector<double> sample_spec(const FamilySpec& spec, const McConfig& cfg);

// Gini of a simulated sample; the standard error comes from batch means.
GiniValue gini_mc(const FamilySpec& spec, const McConfig& cfg);

// A_eps from a simulated sample.  Throws ExistenceError when E[X^(1-eps)]
// is infinite and DomainError for eps < 0.
double atkinson_mc(const FamilySpec& spec, double epsilon, const McConfig& cfg);

// Gini and several Atkinson indices from one simulated sample.
SampleMeasures mc_measures(const FamilySpec& spec, std::span<const double> epsilons, const McConfig& cfg);

// Weighted Gini, 1 - sum_i (w_i / W)(L_{i-1} + L_i) over the income-sorted sample.
double weighted_gini(std::span<const double> values, std::span<const double> weights);

// Weighted Atkinson index; the log-mean form is used at eps = 1.
double weighted_atkinson(std::span<const double> values, std::span<const double> weights, double epsilon);

SampleMeasures sample_measures(const Microdata& m, std::span<const double> epsilons);

}  // namespace lorenzfit
