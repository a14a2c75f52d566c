#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "lorenzfit/errors.hpp"
#include "lorenzfit/estimate.hpp"

namespace lorenzfit {

// Covariance of the partial income sums at the fitted group limits h_j
// (written g_j in some references).  The last group's limit is infinite, so
// its row and column use the forms in which h_J cancels.
WeightingMatrix weighting_matrix(const FamilySpec& spec, const GroupedDataset& d) {
  d.validate();
  if (!spec.moment_exists(2.0)) {
    throw ExistenceError("weighting matrix: " + spec.to_string() + " has no finite second moment");
  }
  const std::size_t J = d.J();
  const std::size_t n = J - 1;
  WeightingMatrix wm;
  wm.mu = moment(spec, 1.0);
  wm.mu2 = moment(spec, 2.0);
  wm.h.resize(n);
  wm.mu2_partial.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    wm.h[i] = quantile(spec, d.u[i]);
    wm.mu2_partial[i] = wm.mu2 * incomplete_moment_cdf(spec, 2.0, wm.h[i]);
  }

  const double mu = wm.mu;
  const auto& u = d.u;
  const auto& s = d.s;
  const auto& h = wm.h;
  const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
  wm.W.resize(idx(J), idx(J));
  for (std::size_t i = 0; i < n; ++i) {
    const double left = u[i] * h[i] - mu * s[i];
    for (std::size_t j = i; j < n; ++j) {
      const double v = wm.mu2_partial[i] + left * (h[j] - u[j] * h[j] + mu * s[j]) - h[i] * mu * s[i];
      wm.W(idx(i), idx(j)) = v;
      wm.W(idx(j), idx(i)) = v;
    }
    const double vJ = wm.mu2_partial[i] + left * mu - h[i] * mu * s[i];
    wm.W(idx(i), idx(n)) = vJ;
    wm.W(idx(n), idx(i)) = vJ;
  }
  wm.W(idx(n), idx(n)) = wm.mu2 - mu * mu;

  wm.Psi = Eigen::MatrixXd::Zero(idx(n), idx(J));
  for (std::size_t i = 0; i < n; ++i) {
    wm.Psi(idx(i), idx(i)) = 1.0 / mu;
    wm.Psi(idx(i), idx(n)) = -s[i] / mu;
  }
  wm.Omega = wm.Psi * wm.W * wm.Psi.transpose();
  wm.Omega = 0.5 * (wm.Omega + wm.Omega.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(wm.Omega, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    // Observed shares in W can leave Omega indefinite when the fit is
    // degenerate; shift past the lowest eigenvalue before adding the jitter.
    const double size = es.eigenvalues().cwiseAbs().sum() / static_cast<double>(n);
    wm.ridge = std::max(0.0, -lo) + 1e-10 * std::max(size, std::numeric_limits<double>::min());
  }
  return wm;
}

}  // namespace lorenzfit
