#include "lorenzfit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lorenzfit::optimize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double eval(const Objective& f, const std::vector<double>& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

double norm(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

std::vector<double> gradient(const Objective& f, const std::vector<double>& x, double rel_step) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(std::abs(x[i]), 1.0);
    xp[i] = x[i] + h;
    const double fp = eval(f, xp);
    xp[i] = x[i] - h;
    const double fm = eval(f, xp);
    xp[i] = x[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
    } else {
      // One-sided near the feasibility boundary.
      const double f0 = eval(f, x);
      if (std::isfinite(fp)) g[i] = (fp - f0) / h;
      else if (std::isfinite(fm)) g[i] = (f0 - fm) / h;
      else g[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return g;
}

Result bfgs(const Objective& f, std::vector<double> x, const Options& opt) {
  const std::size_t n = x.size();
  Result r;
  double fx = eval(f, x);
  r.x = x;
  r.f = fx;
  if (!std::isfinite(fx)) return r;

  // Inverse Hessian approximation, row-major.
  std::vector<double> H(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
  std::vector<double> g = gradient(f, x, opt.fd_rel_step);

  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    r.iterations = it + 1;
    if (std::any_of(g.begin(), g.end(), [](double v) { return !std::isfinite(v); })) break;
    if (norm(g) < opt.grad_tol) {
      r.converged = true;
      break;
    }
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i] -= H[i * n + j] * g[j];
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      // Not a descent direction: reset to steepest descent.
      std::fill(H.begin(), H.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        H[i * n + i] = 1.0;
        d[i] = -g[i];
      }
      slope = -dot(g, g);
    }
    double step = 1.0;
    std::vector<double> xn(n);
    double fn = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step * d[i];
      fn = eval(f, xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // A failed search at the objective floor counts as convergence.
      r.converged = fx <= 1e-30 || norm(g) < std::sqrt(opt.grad_tol);
      break;
    }
    const std::vector<double> gn = gradient(f, xn, opt.fd_rel_step);
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
    }
    const double change = std::abs(fx - fn);
    x = xn;
    g = gn;
    const double f_prev = fx;
    fx = fn;
    r.x = x;
    r.f = fx;
    if (change <= opt.f_rel_tol * std::max(std::abs(f_prev), 1e-300) || fx == 0.0) {
      r.converged = true;
      break;
    }
    const double sy = dot(s, y);
    if (sy > 1e-14 * norm(s) * norm(y)) {
      std::vector<double> Hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * y[j];
      const double yHy = dot(y, Hy);
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          H[i * n + j] += rho * ((1.0 + rho * yHy) * s[i] * s[j] - Hy[i] * s[j] - s[i] * Hy[j]);
    }
  }
  return r;
}

Result nelder_mead(const Objective& f, std::vector<double> x0, const Options& opt, double initial_step) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += initial_step * std::max(std::abs(x0[i]), 1.0);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(f, pts[i]);

  Result r;
  const std::size_t max_iter = opt.max_iter * (n + 1);
  std::vector<std::size_t> order(n + 1);
  for (std::size_t it = 0; it < max_iter; ++it) {
    r.iterations = it + 1;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::isfinite(fv[worst]) &&
        std::abs(fv[worst] - fv[best]) <= opt.f_rel_tol * std::max(std::abs(fv[best]), 1e-300)) {
      double spread = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(pts[i][k] - pts[best][k]));
      if (spread < 1e-10 || fv[best] == 0.0) {
        r.converged = true;
        break;
      }
    }
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) c[k] += pts[i][k] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = c[k] + t * (pts[worst][k] - c[k]);
      return p;
    };
    auto xr = along(-1.0);
    const double fr = eval(f, xr);
    if (fr < fv[best]) {
      auto xe = along(-2.0);
      const double fe = eval(f, xe);
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      auto xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(f, xc);
      if (fc < (outside ? fr : fv[worst])) {
        pts[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          fv[i] = eval(f, pts[i]);
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  r.x = pts[best];
  r.f = fv[best];
  return r;
}

Result minimize(const Objective& f, std::vector<double> x0, const Options& opt) {
  Result r = bfgs(f, std::move(x0), opt);
  // The simplex is for breakdowns only; a run that used its whole budget
  // while still descending is returned as is.
  if (r.converged || !std::isfinite(r.f) || r.iterations >= opt.max_iter) return r;
  Result s = nelder_mead(f, r.x, opt);
  if (s.f <= r.f) {
    s.iterations += r.iterations;
    // Polish with a second quasi-Newton pass from the simplex optimum.
    Result t = bfgs(f, s.x, opt);
    if (t.f <= s.f) {
      t.iterations += s.iterations;
      return t;
    }
    return s;
  }
  return r;
}

}  // namespace lorenzfit::optimize
