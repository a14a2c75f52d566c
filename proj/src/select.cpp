#include "lorenzfit/select.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lorenzfit {

namespace {

constexpr std::array<double, kErrorBins> kAbsEdges = {0.0, 0.01, 0.02, 0.05, 0.1};
constexpr std::array<double, kErrorBins> kRelEdges = {0.0, 0.01, 0.02, 0.05, 0.1};
constexpr std::array<std::string_view, kErrorBins> kAbsLabels = {"[0,0.01)", "[0.01,0.02)", "[0.02,0.05)",
                                                                 "[0.05,0.1)", "[0.1,)"};
constexpr std::array<std::string_view, kErrorBins> kRelLabels = {"[0%,1%)", "[1%,2%)", "[2%,5%)", "[5%,10%)",
                                                                 "[10%,)"};

std::size_t bin_of(double e, const std::array<double, kErrorBins>& edges) {
  std::size_t b = 0;
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (e >= edges[i]) b = i;
  return b;
}

double criterion_value(const GofScores& s, Criterion c) {
  switch (c) {
    case Criterion::AIC: return s.aic;
    case Criterion::BIC: return s.bic;
    case Criterion::RSS: return s.rss;
    case Criterion::WSSR: return s.wssr ? *s.wssr : std::numeric_limits<double>::quiet_NaN();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

GofScores gof_scores(const FitResult& fit, const WeightingMatrix* omega) {
  GofScores g;
  g.n = fit.residuals.size();
  g.k = fit.k;
  if (g.n < 1) throw std::invalid_argument("gof_scores: fit has no residuals");
  double rss = 0.0;
  for (double r : fit.residuals) rss += r * r;
  g.rss = rss;
  if (!(rss > 1e-300)) {
    rss = 1e-300;
    g.rss_floored = true;
  }
  const double n = static_cast<double>(g.n);
  const double k = static_cast<double>(g.k);
  const double base = n * std::log(rss / n);
  g.aic = base + 2.0 * k;
  g.bic = base + k * std::log(n);
  if (omega) {
    Eigen::MatrixXd om = omega->Omega;
    if (omega->ridge > 0.0) om += omega->ridge * Eigen::MatrixXd::Identity(om.rows(), om.cols());
    const Eigen::Map<const Eigen::VectorXd> m(fit.residuals.data(), static_cast<Eigen::Index>(g.n));
    const Eigen::VectorXd z = om.ldlt().solve(m);
    double q = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) q += fit.residuals[i] * z(static_cast<Eigen::Index>(i));
    g.wssr = q;
  }
  return g;
}

std::string_view criterion_name(Criterion c) {
  switch (c) {
    case Criterion::AIC: return "aic";
    case Criterion::BIC: return "bic";
    case Criterion::WSSR: return "wssr";
    case Criterion::RSS: return "rss";
  }
  return "?";
}

Criterion parse_criterion(std::string_view name) {
  for (Criterion c : {Criterion::AIC, Criterion::BIC, Criterion::WSSR, Criterion::RSS})
    if (criterion_name(c) == name) return c;
  throw std::invalid_argument("unknown criterion '" + std::string(name) + "'");
}

std::vector<std::vector<double>> dominance_matrix(const std::vector<std::vector<std::optional<GofScores>>>& scores,
                                                  Criterion criterion) {
  std::size_t models = 0;
  for (const auto& row : scores) models = std::max(models, row.size());
  std::vector<std::vector<double>> wins(models, std::vector<double>(models, 0.0));
  std::vector<std::vector<double>> pairs(models, std::vector<double>(models, 0.0));
  for (const auto& row : scores) {
    for (std::size_t r = 0; r < row.size(); ++r) {
      if (!row[r]) continue;
      const double vr = criterion_value(*row[r], criterion);
      if (std::isnan(vr)) continue;
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c == r || !row[c]) continue;
        const double vc = criterion_value(*row[c], criterion);
        if (std::isnan(vc)) continue;
        pairs[r][c] += 1.0;
        if (vr < vc) wins[r][c] += 1.0;
      }
    }
  }
  std::vector<std::vector<double>> out(models, std::vector<double>(models, 0.0));
  for (std::size_t r = 0; r < models; ++r) {
    for (std::size_t c = 0; c < models; ++c) {
      out[r][c] = r == c ? 1.0 : (pairs[r][c] > 0.0 ? wins[r][c] / pairs[r][c] : 0.0);
    }
  }
  return out;
}

std::string_view absolute_bin_label(std::size_t bin) { return kAbsLabels.at(bin); }
std::string_view relative_bin_label(std::size_t bin) { return kRelLabels.at(bin); }
std::size_t absolute_bin(double abs_error) { return bin_of(abs_error, kAbsEdges); }
std::size_t relative_bin(double rel_error) { return bin_of(rel_error, kRelEdges); }

std::vector<MethodErrors> error_report(const std::vector<ErrorObservation>& obs) {
  std::vector<MethodErrors> out;
  for (const auto& o : obs) {
    if (!(o.benchmark > 0.0) || !std::isfinite(o.estimate)) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const MethodErrors& m) { return m.method == o.method; });
    if (it == out.end()) {
      out.push_back({o.method, 0, {}, {}, 0.0, 0.0});
      it = out.end() - 1;
    }
    const double ae = std::abs(o.estimate - o.benchmark);
    const double re = ae / o.benchmark;
    ++it->absolute[absolute_bin(ae)];
    ++it->relative[relative_bin(re)];
    it->mean_abs_error += ae;
    it->mean_rel_error += re;
    ++it->count;
  }
  for (auto& m : out) {
    if (m.count) {
      m.mean_abs_error /= static_cast<double>(m.count);
      m.mean_rel_error /= static_cast<double>(m.count);
    }
  }
  return out;
}

}  // namespace lorenzfit
