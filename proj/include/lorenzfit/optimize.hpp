#pragma once

#include <functional>
#include <vector>

namespace lorenzfit::optimize {

// Objective over an unconstrained vector.  Returning +inf (or NaN) marks a
// point as infeasible; line searches treat it as a failed step.
using Objective = std::function<double(const std::vector<double>&)>;

struct Options {
  std::size_t max_iter = 500;
  double f_rel_tol = 1e-10;     // relative objective change
  double grad_tol = 1e-8;       // gradient norm
  double fd_rel_step = 1e-6;    // central-difference step, relative to |x_i| (absolute floor 1e-6)
};

struct Result {
  std::vector<double> x;
  double f = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Central-difference gradient.
std::vector<double> gradient(const Objective& f, const std::vector<double>& x, double rel_step);

// Quasi-Newton (BFGS) with numeric gradients and an Armijo backtracking line search.
Result bfgs(const Objective& f, std::vector<double> x0, const Options& opt = {});

// Derivative-free simplex search.
Result nelder_mead(const Objective& f, std::vector<double> x0, const Options& opt = {}, double initial_step = 0.1);

// BFGS, followed by a simplex pass and a second BFGS pass when the first
// breaks down (failed line search or non-finite gradient) before its
// iteration budget is spent.
Result minimize(const Objective& f, std::vector<double> x0, const Options& opt = {});

}  // namespace lorenzfit::optimize
