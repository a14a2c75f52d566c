#include "lorenzfit/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lorenzfit/errors.hpp"

namespace lorenzfit {

namespace {

constexpr std::size_t kBatches = 20;

// Uniform on the open interval (0, 1) from the top 53 bits.
double open_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::mt19937_64 batch_stream(std::uint64_t seed, std::size_t batch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), 0x6c6f727aU};
  return std::mt19937_64(seq);
}

void check_epsilon(double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("Atkinson: epsilon must be nonnegative");
}

void check_atkinson_exists(const FamilySpec& spec, double eps) {
  check_epsilon(eps);
  if (!spec.mean_exists()) throw ExistenceError("Atkinson: " + spec.to_string() + " has no finite mean");
  if (eps > 1.0 && !spec.moment_exists(1.0 - eps)) {
    throw ExistenceError("Atkinson: E[X^(1-eps)] is infinite for " + spec.to_string());
  }
}

// Gini of an ascending sorted, unit-weight sample.
double sorted_gini(std::span<const double> x) {
  long double total = 0.0L, weighted = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += x[i];
    weighted += static_cast<long double>(i + 1) * x[i];
  }
  const auto n = static_cast<long double>(x.size());
  return static_cast<double>(2.0L * weighted / (n * total) - (n + 1.0L) / n);
}

double unit_atkinson(std::span<const double> x, double eps) {
  long double sum = 0.0L;
  for (double v : x) sum += v;
  const double mean = static_cast<double>(sum / static_cast<long double>(x.size()));
  if (eps == 0.0) return 0.0;
  long double acc = 0.0L;
  if (eps == 1.0) {
    for (double v : x) acc += std::log(v / mean);
    return -std::expm1(static_cast<double>(acc / static_cast<long double>(x.size())));
  }
  for (double v : x) acc += std::pow(v / mean, 1.0 - eps);
  const double m = static_cast<double>(acc / static_cast<long double>(x.size()));
  return 1.0 - std::pow(m, 1.0 / (1.0 - eps));
}

}  // namespace

void McConfig::validate() const {
  if (n < 1000) throw DomainError("Monte Carlo sample size must be at least 1000");
}

Microdata Microdata::unit(std::vector<double> values) {
  Microdata m{std::move(values), {}};
  m.weights.assign(m.values.size(), 1.0);
  return m;
}

void Microdata::validate() const {
  std::vector<std::string> problems;
  if (values.size() != weights.size()) problems.push_back("values and weights differ in length");
  if (values.empty()) problems.push_back("no observations");
  if (std::any_of(values.begin(), values.end(), [](double v) { return !(v > 0.0) || !std::isfinite(v); }))
    problems.push_back("incomes must be positive and finite");
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w > 0.0) || !std::isfinite(w); }))
    problems.push_back("weights must be positive and finite");
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

std::vector<double> sample_spec(const FamilySpec& spec, const McConfig& cfg) {
  cfg.validate();
  std::vector<double> x(cfg.n);
  for (std::size_t b = 0; b < kBatches; ++b) {
    const std::size_t lo = cfg.n * b / kBatches, hi = cfg.n * (b + 1) / kBatches;
    auto rng = batch_stream(cfg.seed, b);
    for (std::size_t i = lo; i < hi; ++i) x[i] = quantile(spec, open_uniform(rng));
  }
  return x;
}

SampleMeasures mc_measures(const FamilySpec& spec, std::span<const double> epsilons, const McConfig& cfg) {
  if (!spec.mean_exists()) throw ExistenceError("Gini index undefined: " + spec.to_string() + " has no finite mean");
  for (double e : epsilons) check_atkinson_exists(spec, e);
  auto x = sample_spec(spec, cfg);
  SampleMeasures out;
  for (double e : epsilons) out.atkinson.push_back(unit_atkinson(x, e));
  out.mean = std::accumulate(x.begin(), x.end(), 0.0L) / static_cast<long double>(x.size());
  std::sort(x.begin(), x.end());
  out.gini = sorted_gini(x);
  return out;
}

GiniValue gini_mc(const FamilySpec& spec, const McConfig& cfg) {
  if (!spec.mean_exists()) throw ExistenceError("Gini index undefined: " + spec.to_string() + " has no finite mean");
  auto x = sample_spec(spec, cfg);
  std::vector<double> batch_g(kBatches);
  for (std::size_t b = 0; b < kBatches; ++b) {
    const std::size_t lo = cfg.n * b / kBatches, hi = cfg.n * (b + 1) / kBatches;
    std::sort(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi));
    batch_g[b] = sorted_gini(std::span<const double>(x).subspan(lo, hi - lo));
  }
  std::sort(x.begin(), x.end());
  const double g = sorted_gini(x);
  const double m = std::accumulate(batch_g.begin(), batch_g.end(), 0.0) / kBatches;
  double ss = 0.0;
  for (double v : batch_g) ss += (v - m) * (v - m);
  const double se = std::sqrt(ss / (kBatches - 1)) / std::sqrt(static_cast<double>(kBatches));
  return {std::clamp(g, 0.0, 1.0), GiniMethod::MonteCarlo, se};
}

double atkinson_mc(const FamilySpec& spec, double epsilon, const McConfig& cfg) {
  const double e[] = {epsilon};
  return mc_measures(spec, e, cfg).atkinson.front();
}

double weighted_gini(std::span<const double> values, std::span<const double> weights) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  long double W = 0.0L, Y = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i) {
    W += weights[i];
    Y += static_cast<long double>(weights[i]) * values[i];
  }
  long double cum = 0.0L, area = 0.0L;
  for (std::size_t i : order) {
    const long double prev = cum;
    cum += static_cast<long double>(weights[i]) * values[i];
    area += weights[i] / W * (prev + cum) / Y;
  }
  return std::clamp(static_cast<double>(1.0L - area), 0.0, 1.0);
}

double weighted_atkinson(std::span<const double> values, std::span<const double> weights, double epsilon) {
  check_epsilon(epsilon);
  long double W = 0.0L, Y = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i) {
    W += weights[i];
    Y += static_cast<long double>(weights[i]) * values[i];
  }
  const double mean = static_cast<double>(Y / W);
  if (epsilon == 0.0) return 0.0;
  long double acc = 0.0L;
  if (epsilon == 1.0) {
    for (std::size_t i = 0; i < values.size(); ++i) acc += weights[i] * std::log(values[i] / mean);
    return -std::expm1(static_cast<double>(acc / W));
  }
  for (std::size_t i = 0; i < values.size(); ++i) acc += weights[i] * std::pow(values[i] / mean, 1.0 - epsilon);
  return 1.0 - std::pow(static_cast<double>(acc / W), 1.0 / (1.0 - epsilon));
}

SampleMeasures sample_measures(const Microdata& m, std::span<const double> epsilons) {
  m.validate();
  SampleMeasures out;
  out.gini = weighted_gini(m.values, m.weights);
  for (double e : epsilons) out.atkinson.push_back(weighted_atkinson(m.values, m.weights, e));
  long double W = 0.0L, Y = 0.0L;
  for (std::size_t i = 0; i < m.size(); ++i) {
    W += m.weights[i];
    Y += static_cast<long double>(m.weights[i]) * m.values[i];
  }
  out.mean = static_cast<double>(Y / W);
  return out;
}

}  // namespace lorenzfit
