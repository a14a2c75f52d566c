#include "lorenzfit/grouped.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lorenzfit/errors.hpp"

namespace lorenzfit {

namespace {

constexpr double kTol = 1e-12;

std::vector<double> differences(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] - prev;
    prev = v[i];
  }
  return out;
}

std::string at(const char* what, std::size_t j) {
  std::ostringstream os;
  os << what << " at j=" << j + 1;
  return os.str();
}

}  // namespace

std::vector<double> GroupedDataset::shares() const { return differences(s); }
std::vector<double> GroupedDataset::proportions() const { return differences(u); }

void GroupedDataset::validate() const {
  std::vector<std::string> problems;
  if (u.size() != s.size()) problems.push_back("u and s differ in length");
  if (u.size() < 2) problems.push_back("at least two groups required");
  const std::size_t n = std::min(u.size(), s.size());
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(u[j]) || !std::isfinite(s[j])) {
      problems.push_back(at("non-finite value", j));
      continue;
    }
    const double u_prev = j ? u[j - 1] : 0.0;
    const double s_prev = j ? s[j - 1] : 0.0;
    if (!(u[j] > u_prev)) problems.push_back(at("u not strictly increasing", j));
    if (s[j] < s_prev) problems.push_back(at("s decreasing (negative share)", j));
    if (s[j] > u[j] + kTol) problems.push_back(at("s exceeds u (Lorenz curve above the diagonal)", j));
  }
  if (n > 0 && std::abs(u[n - 1] - 1.0) > kTol) problems.push_back("last u must equal 1");
  if (n > 0 && std::abs(s[n - 1] - 1.0) > kTol) problems.push_back("last s must equal 1");
  if (mean && !(std::isfinite(*mean) && *mean > 0.0)) problems.push_back("mean must be positive");
  if (survey_gini && !(*survey_gini >= 0.0 && *survey_gini < 1.0)) problems.push_back("survey gini must be in [0, 1)");
  if (!problems.empty()) {
    if (!id.empty()) {
      for (auto& p : problems) p = id + ": " + p;
    }
    throw ValidationError(std::move(problems));
  }
}

std::vector<double> equal_groups(std::size_t J) {
  std::vector<double> u(J);
  for (std::size_t j = 0; j < J; ++j) u[j] = static_cast<double>(j + 1) / static_cast<double>(J);
  if (J) u.back() = 1.0;
  return u;
}

GroupedDataset from_shares(std::span<const double> shares, std::optional<std::span<const double>> proportions,
                           std::string id) {
  std::vector<std::string> problems;
  const std::size_t J = shares.size();
  double total = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    if (!(shares[j] >= 0.0)) problems.push_back(at("negative share", j));
    total += shares[j];
  }
  if (std::abs(total - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "shares sum to " << total << ", not 1";
    problems.push_back(os.str());
  }
  std::vector<double> u;
  if (proportions) {
    if (proportions->size() != J) {
      problems.push_back("proportions and shares differ in length");
    } else {
      double ptotal = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        if (!(proportions->data()[j] > 0.0)) problems.push_back(at("nonpositive proportion", j));
        ptotal += (*proportions)[j];
      }
      if (std::abs(ptotal - 1.0) > 1e-6) problems.push_back("proportions do not sum to 1");
      double acc = 0.0;
      for (double p : *proportions) u.push_back(acc += p / ptotal);
      if (!u.empty()) u.back() = 1.0;
    }
  } else {
    u = equal_groups(J);
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));

  GroupedDataset d;
  d.id = std::move(id);
  d.u = std::move(u);
  double acc = 0.0;
  for (double c : shares) d.s.push_back(acc += c / total);
  if (!d.s.empty()) d.s.back() = 1.0;
  d.validate();
  return d;
}

double lower_bound_gini(const GroupedDataset& d) {
  double area2 = 0.0;
  double u_prev = 0.0, s_prev = 0.0;
  for (std::size_t j = 0; j < d.J(); ++j) {
    area2 += (d.u[j] - u_prev) * (d.s[j] + s_prev);
    u_prev = d.u[j];
    s_prev = d.s[j];
  }
  return std::clamp(1.0 - area2, 0.0, 1.0);
}

double empirical_lorenz(const GroupedDataset& d, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("empirical_lorenz: u must be in [0, 1]");
  const auto it = std::lower_bound(d.u.begin(), d.u.end(), u);
  if (it == d.u.end()) return 1.0;
  const std::size_t j = static_cast<std::size_t>(it - d.u.begin());
  if (*it == u) return d.s[j];
  const double u0 = j ? d.u[j - 1] : 0.0;
  const double s0 = j ? d.s[j - 1] : 0.0;
  return s0 + (d.s[j] - s0) * (u - u0) / (d.u[j] - u0);
}

}  // namespace lorenzfit
