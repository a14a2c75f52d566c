#include "lorenzfit/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lorenzfit/errors.hpp"

namespace lorenzfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Existence bound on theta2 given theta1 for the two-shape grid procedure.
double theta2_lower_bound(Family f, double theta1) {
  switch (f) {
    case Family::B2: return 1.0;            // q > 1
    case Family::SM: return 1.0 / theta1;   // q > 1/a
    case Family::Dagum: return 0.0;         // p > 0 (a > 1 checked separately)
    default: return 0.0;
  }
}

// Root of f on [lo, hi] with f(lo), f(hi) of opposite sign: bisection
// interleaved with secant steps (Illinois variant).
double bracketed_root(const std::function<double(double)>& f, double lo, double hi, double flo, double fhi,
                      double tol) {
  int side = 0;
  for (int it = 0; it < 300; ++it) {
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx < 0) == (flo < 0)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    if (hi - lo <= tol * std::max(1.0, std::abs(lo))) return 0.5 * (lo + hi);
  }
  return 0.5 * (lo + hi);
}

// For a fixed first shape, solve G(theta1, theta2) = g on (bound + 1e-6, 1e3).
std::optional<double> solve_theta2(Family f, double theta1, double g) {
  const double lo = theta2_lower_bound(f, theta1) + 1e-6;
  const double hi = 1e3;
  auto gap = [&](double t2) {
    const std::vector<double> s{theta1, t2};
    return gini_closed(FamilySpec::from_shapes(f, s)).value - g;
  };
  double flo, fhi;
  try {
    flo = gap(lo);
    fhi = gap(hi);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (!std::isfinite(flo) || !std::isfinite(fhi) || (flo < 0) == (fhi < 0)) return std::nullopt;
  try {
    return bracketed_root(gap, lo, hi, flo, fhi, 1e-10);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// The end of (bound + 1e-6, 1e3) whose Gini is nearer g.
std::optional<double> nearest_theta2(Family f, double theta1, double g) {
  const double lo = theta2_lower_bound(f, theta1) + 1e-6;
  const double hi = 1e3;
  auto gap = [&](double t2) {
    const std::vector<double> s{theta1, t2};
    return std::abs(gini_closed(FamilySpec::from_shapes(f, s)).value - g);
  };
  try {
    const double dlo = gap(lo), dhi = gap(hi);
    if (!std::isfinite(dlo) || !std::isfinite(dhi)) return std::nullopt;
    return dlo < dhi ? lo : hi;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// When g is out of reach for the whole grid (degenerate data) each grid
// point falls back to its nearest endpoint instead.
std::vector<std::vector<double>> two_shape_grid(Family f, double g) {
  std::vector<std::vector<double>> out;
  for (int pass = 0; pass < 2 && out.empty(); ++pass) {
    for (int t1 = 1; t1 <= 20; ++t1) {
      if (f == Family::Dagum && t1 <= 1) continue;  // mean requires a > 1
      const auto t2 = pass == 0 ? solve_theta2(f, t1, g) : nearest_theta2(f, t1, g);
      if (t2) out.push_back({static_cast<double>(t1), *t2});
    }
  }
  return out;
}

std::vector<double> to_log(std::span<const double> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::log(x); });
  return out;
}

std::vector<double> from_log(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::exp(x); });
  return out;
}

bool spec_valid(Family family, std::span<const double> shapes) {
  return std::all_of(shapes.begin(), shapes.end(), [](double x) { return std::isfinite(x) && x > 0.0; }) &&
         FamilySpec::from_shapes(family, shapes).mean_exists();
}

// Plain-loop sum so that an identity weighting reproduces the RSS bit for bit.
double sum_squares(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

FitResult finish(Family family, std::span<const double> shapes, const GroupedDataset& d, Method method,
                 double objective) {
  FitResult fr(FamilySpec::from_shapes(family, shapes));
  fr.method = method;
  fr.objective = objective;
  fr.k = parameter_count(family);
  fr.residuals = lorenz_residuals(family, shapes, d);
  if (d.mean && fr.spec.mean_exists()) {
    const double scale = solve_scale(fr.spec, *d.mean);
    fr.spec = family == Family::Lognormal ? FamilySpec::lognormal(scale, shapes[0]) : fr.spec.with_scale(scale);
    fr.scale_recovered = true;
  }
  return fr;
}

}  // namespace

std::string_view method_name(Method m) { return m == Method::NLS ? "nls" : "gmm"; }

double gini_anchor(const GroupedDataset& d) {
  const double g = d.survey_gini ? *d.survey_gini : lower_bound_gini(d);
  return std::clamp(g, 1e-6, 1.0 - 1e-6);
}

std::vector<std::vector<double>> starting_values(Family family, const GroupedDataset& d) {
  const double g = gini_anchor(d);
  std::vector<std::vector<double>> starts;
  switch (family) {
    case Family::Fisk: starts.push_back({1.0 / g}); break;
    case Family::Weibull: starts.push_back({std::numbers::ln2 / -std::log1p(-g)}); break;
    case Family::Lognormal:
      starts.push_back({std::numbers::sqrt2 * specfun::std_normal_quantile(0.5 * (1.0 + g))});
      break;
    case Family::B2:
    case Family::SM:
    case Family::Dagum: starts = two_shape_grid(family, g); break;
    case Family::GB2: {
      for (const auto& pq : two_shape_grid(Family::B2, g)) starts.push_back({1.0, pq[0], pq[1]});
      for (const auto& aq : two_shape_grid(Family::SM, g)) starts.push_back({aq[0], 1.0, aq[1]});
      for (const auto& ap : two_shape_grid(Family::Dagum, g)) starts.push_back({ap[0], ap[1], 1.0});
      break;
    }
  }
  if (starts.empty()) {
    std::ostringstream os;
    os << family_name(family) << ": no starting value reproduces the Gini anchor " << g;
    throw ConvergenceError(os.str());
  }
  return starts;
}

std::vector<double> lorenz_residuals(Family family, std::span<const double> shapes, const GroupedDataset& d) {
  const FamilySpec spec = FamilySpec::from_shapes(family, shapes);
  std::vector<double> r(d.J() - 1);
  for (std::size_t j = 0; j + 1 < d.J(); ++j) r[j] = lorenz(spec, d.u[j]) - d.s[j];
  return r;
}

double nls_objective(Family family, std::span<const double> shapes, const GroupedDataset& d) {
  try {
    if (!spec_valid(family, shapes)) return kInf;
    const double v = sum_squares(lorenz_residuals(family, shapes, d));
    return std::isfinite(v) ? v : kInf;
  } catch (const std::exception&) {
    return kInf;
  }
}

FitResult nls_fit(Family family, const GroupedDataset& d, const FitOptions& opt) {
  d.validate();
  if (d.J() < shape_count(family) + 1) {
    throw std::invalid_argument(std::string(family_name(family)) + ": too few groups for the number of shapes");
  }
  const auto starts = starting_values(family, d);
  auto objective = [&](const std::vector<double>& z) {
    const auto th = from_log(z);
    return nls_objective(family, th, d);
  };

  optimize::Options screen = opt.optimizer;
  screen.max_iter = std::min(opt.screen_iter, opt.optimizer.max_iter);
  std::vector<optimize::Result> runs;
  runs.reserve(starts.size());
  for (const auto& s : starts) runs.push_back(optimize::bfgs(objective, to_log(s), screen));

  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (!runs[i].converged && std::isfinite(runs[i].f)) open.push_back(i);
  std::stable_sort(open.begin(), open.end(), [&](std::size_t a, std::size_t b) { return runs[a].f < runs[b].f; });
  if (open.size() > opt.finalists) open.resize(opt.finalists);
  for (std::size_t i : open) {
    auto r = optimize::minimize(objective, runs[i].x, opt.optimizer);
    if (r.f <= runs[i].f) {
      r.iterations += runs[i].iterations;
      runs[i] = std::move(r);
    }
  }

  std::optional<optimize::Result> best;
  std::size_t ties = 0;
  for (const auto& r : runs) {
    if (!std::isfinite(r.f)) continue;
    if (!best || r.f < best->f) {
      best = r;
    } else if (r.f == best->f) {
      ++ties;
    }
  }
  if (!best) throw ConvergenceError(std::string(family_name(family)) + ": every start failed");
  const auto shapes = from_log(best->x);
  FitResult fr = finish(family, shapes, d, Method::NLS, best->f);
  fr.starts_tried = starts.size();
  fr.converged = best->converged;
  if (ties) fr.warnings.push_back(std::to_string(ties) + " start(s) tied on RSS; first found kept");
  if (!fr.converged) fr.warnings.push_back("optimizer did not meet its convergence test");
  return fr;
}

double solve_scale(const FamilySpec& shapes, double sample_mean) {
  if (!(sample_mean > 0.0)) throw DomainError("solve_scale: sample mean must be positive");
  if (!shapes.mean_exists()) throw ExistenceError("solve_scale: " + shapes.to_string() + " has no finite mean");
  if (shapes.family() == Family::Lognormal) {
    const double sigma = shapes.params()[1];
    return std::log(sample_mean) - 0.5 * sigma * sigma;
  }
  return sample_mean / moment(shapes.with_scale(1.0), 1.0);
}

double gmm_objective(Family family, std::span<const double> shapes, const GroupedDataset& d,
                     const Eigen::MatrixXd& omega) {
  std::vector<double> m;
  try {
    if (!spec_valid(family, shapes)) return kInf;
    m = lorenz_residuals(family, shapes, d);
  } catch (const std::exception&) {
    return kInf;
  }
  const Eigen::Map<const Eigen::VectorXd> mv(m.data(), static_cast<Eigen::Index>(m.size()));
  const Eigen::VectorXd z = omega.ldlt().solve(mv);
  double q = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) q += m[i] * z(static_cast<Eigen::Index>(i));
  return std::isfinite(q) ? q : kInf;
}

FitResult gmm_from_nls(const FitResult& first, const GroupedDataset& d, const FitOptions& opt) {
  const Family family = first.spec.family();
  auto fallback = [&](const std::string& why) {
    FitResult fr = first;
    fr.warnings.push_back("GMM second stage failed, NLS result kept: " + why);
    return fr;
  };
  if (!d.mean) throw std::invalid_argument("mean required for GMM");

  WeightingMatrix wm;
  FamilySpec scaled = first.spec;
  try {
    scaled = first.spec.with_scale(1.0);
    if (family == Family::Lognormal) {
      scaled = FamilySpec::lognormal(solve_scale(scaled, *d.mean), scaled.params()[1]);
    } else {
      scaled = scaled.with_scale(solve_scale(scaled, *d.mean));
    }
    wm = weighting_matrix(scaled, d);
  } catch (const std::exception& e) {
    return fallback(e.what());
  }

  Eigen::MatrixXd omega = wm.Omega;
  if (wm.ridge > 0.0) omega += wm.ridge * Eigen::MatrixXd::Identity(omega.rows(), omega.cols());
  // Factor once; the objective reuses the factorization.
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(omega);
  if (ldlt.info() != Eigen::Success) return fallback("weighting matrix factorization failed");
  auto quad = [&](std::span<const double> th) {
    std::vector<double> m;
    try {
      if (!spec_valid(family, th)) return kInf;
      m = lorenz_residuals(family, th, d);
    } catch (const std::exception&) {
      return kInf;
    }
    const Eigen::Map<const Eigen::VectorXd> mv(m.data(), static_cast<Eigen::Index>(m.size()));
    const Eigen::VectorXd z = ldlt.solve(mv);
    double q = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) q += m[i] * z(static_cast<Eigen::Index>(i));
    return std::isfinite(q) ? q : kInf;
  };

  const auto theta0 = first.spec.shapes();
  const double f0 = quad(theta0);
  if (!std::isfinite(f0)) return fallback("objective not finite at the first-stage estimate");
  const auto r = optimize::minimize([&](const std::vector<double>& z) { return quad(from_log(z)); }, to_log(theta0),
                                    opt.optimizer);

  std::vector<double> theta = theta0;
  double f = f0;
  bool converged = true;
  if (std::isfinite(r.f) && r.f <= f0) {
    theta = from_log(r.x);
    f = r.f;
    converged = r.converged;
  }
  if (!spec_valid(family, theta)) return fallback("second stage left the existence region");

  FitResult fr = finish(family, theta, d, Method::GMM, f);
  fr.starts_tried = 1;
  fr.converged = converged;
  fr.warnings = first.warnings;
  if (wm.ridge > 0.0) fr.warnings.push_back("weighting matrix ill-conditioned; ridge added");
  if (!converged) fr.warnings.push_back("GMM optimizer did not meet its convergence test");
  return fr;
}

FitResult gmm_fit(Family family, const GroupedDataset& d, const FitOptions& opt) {
  if (!d.mean) throw std::invalid_argument("mean required for GMM");
  return gmm_from_nls(nls_fit(family, d, opt), d, opt);
}

}  // namespace lorenzfit
