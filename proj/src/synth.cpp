#include "lorenzfit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lorenzfit/errors.hpp"
#include "lorenzfit/specfun.hpp"

namespace lorenzfit {

using specfun::std_normal_cdf;
using specfun::std_normal_pdf;
using specfun::std_normal_quantile;

void MixtureSpec::validate() const {
  std::vector<std::string> problems;
  if (!(beta > 0.0 && std::isfinite(beta))) problems.push_back("beta must be positive");
  if (!(alpha > 0.0 && std::isfinite(alpha))) problems.push_back("alpha must be positive");
  if (!(omega >= 0.0 && omega <= 1.0)) problems.push_back("omega must be in [0, 1]");
  if (!std::isfinite(mu)) problems.push_back("mu must be finite");
  if (!(sigma > 0.0 && std::isfinite(sigma))) problems.push_back("sigma must be positive");
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

const std::array<MixtureSpec, 6>& mixture_presets() {
  // (beta, alpha, omega, mu, sigma)
  static const std::array<MixtureSpec, 6> presets = {{
      {2.02, 1.4, 0.7, 5.24, 6.27},
      {1.79, 1.68, 0.73, 6.68, 6.5},
      {1.63, 2.03, 0.73, 8.29, 7.05},
      {1.38, 2.76, 0.82, 10.66, 3.13},
      {1.35, 2.95, 0.82, 11.77, 2.18},
      {1.25, 3.15, 0.84, 13.32, 3.02},
  }};
  return presets;
}

MixtureSpec mixture_preset(std::size_t index) {
  if (index < 1 || index > mixture_presets().size()) throw std::out_of_range("mixture preset must be 1..6");
  return mixture_presets()[index - 1];
}

double mixture_pdf(const MixtureSpec& spec, double x) {
  if (!(x > 0.0)) throw DomainError("mixture_pdf: x must be positive");
  const double t = std::pow(x / spec.alpha, spec.beta);
  const double weibull = spec.beta / x * t * std::exp(-t);
  const double normal = std_normal_pdf((x - spec.mu) / spec.sigma) / spec.sigma / std_normal_cdf(spec.mu / spec.sigma);
  return spec.omega * weibull + (1.0 - spec.omega) * normal;
}

double mixture_cdf(const MixtureSpec& spec, double x) {
  if (!(x >= 0.0)) throw DomainError("mixture_cdf: x must be nonnegative");
  const double weibull = -std::expm1(-std::pow(x / spec.alpha, spec.beta));
  const double z0 = std_normal_cdf(-spec.mu / spec.sigma);
  const double normal = (std_normal_cdf((x - spec.mu) / spec.sigma) - z0) / std_normal_cdf(spec.mu / spec.sigma);
  return spec.omega * weibull + (1.0 - spec.omega) * normal;
}

Microdata sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw DomainError("sample_mixture: n must be at least 1");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d697874U};
  std::mt19937_64 rng(seq);
  auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  const double upper = std_normal_cdf(spec.mu / spec.sigma);
  std::vector<double> x(n);
  for (auto& v : x) {
    const double pick = uniform();
    const double w = uniform();
    if (pick < spec.omega) {
      v = spec.alpha * std::pow(-std::log1p(-w), 1.0 / spec.beta);
    } else {
      // Upper-tail form of the inverse cdf on [Phi(-mu/sigma), 1): the
      // argument stays inside (0, Phi(mu/sigma)) so the draw is positive.
      v = spec.mu - spec.sigma * std_normal_quantile(w * upper);
    }
  }
  return Microdata::unit(std::move(x));
}

void GroupingPolicy::validate() const {
  if (J < 2) throw DomainError("grouping: at least two groups required");
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double p) {
  if (values.empty()) throw DomainError("weighted_quantile: empty sample");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double cum = 0.0;
  for (std::size_t i : order) {
    cum += weights[i];
    if (cum >= p * total) return values[i];
  }
  return values[order.back()];
}

Microdata prepare_microdata(const Microdata& m, const GroupingPolicy& policy,
                            std::optional<std::span<const double>> household_sizes) {
  policy.validate();
  if (m.values.size() != m.weights.size()) throw ValidationError({"values and weights differ in length"});
  if (household_sizes && household_sizes->size() != m.size()) {
    throw ValidationError({"household sizes and incomes differ in length"});
  }
  auto size_of = [&](std::size_t i) { return household_sizes ? (*household_sizes)[i] : 1.0; };

  Microdata out;
  std::vector<double> sizes;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double sz = size_of(i);
    if (!(sz > 0.0)) throw ValidationError({"household sizes must be positive"});
    if (!(m.weights[i] > 0.0)) throw ValidationError({"weights must be positive"});
    const double y = policy.equivalise ? m.values[i] / std::sqrt(sz) : m.values[i];
    if (!(y > 0.0) || !std::isfinite(y)) continue;
    out.values.push_back(y);
    out.weights.push_back(m.weights[i]);
    sizes.push_back(sz);
  }
  if (out.values.empty()) throw ValidationError({"no positive incomes after filtering"});

  // Both thresholds come from the equivalised incomes before any coding.
  double floor = 0.0, cap = 0.0;
  if (policy.bottom_code) {
    double W = 0.0, Y = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      W += out.weights[i];
      Y += out.weights[i] * out.values[i];
    }
    floor = 0.01 * Y / W;
  }
  if (policy.top_code) cap = 10.0 * weighted_quantile(out.values, out.weights, 0.5);
  for (auto& y : out.values) {
    if (policy.bottom_code && y < floor) y = floor;
    if (policy.top_code && y > cap) y = cap;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out.weights[i] *= sizes[i];
  return out;
}

GroupedDataset microdata_to_grouped(const Microdata& m, const GroupingPolicy& policy,
                                    std::optional<std::span<const double>> household_sizes, std::string id) {
  const Microdata pm = prepare_microdata(m, policy, household_sizes);
  const std::size_t n = pm.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pm.values[a] < pm.values[b]; });

  long double W = 0.0L, Y = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    W += pm.weights[i];
    Y += static_cast<long double>(pm.weights[i]) * pm.values[i];
  }

  GroupedDataset d;
  d.id = std::move(id);
  const auto J = static_cast<long double>(policy.J);
  long double cw = 0.0L, cy = 0.0L;
  std::size_t group = 1;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    cw += pm.weights[i];
    cy += static_cast<long double>(pm.weights[i]) * pm.values[i];
    // A record belongs to the first group whose cut its cumulative weight
    // does not exceed; records on a cut stay in the lower group.
    const long double frac = cw / W;
    while (group < policy.J && frac > static_cast<long double>(group) / J + 1e-12L) ++group;
    const bool last_in_group =
        k + 1 == n || (cw + pm.weights[order[k + 1]]) / W > static_cast<long double>(group) / J + 1e-12L;
    if (last_in_group) {
      d.u.push_back(static_cast<double>(frac));
      d.s.push_back(static_cast<double>(std::min(cy / Y, frac)));
    }
  }
  d.u.back() = 1.0;
  d.s.back() = 1.0;
  d.mean = static_cast<double>(Y / W);
  d.survey_gini = weighted_gini(pm.values, pm.weights);
  d.validate();
  return d;
}

}  // namespace lorenzfit
