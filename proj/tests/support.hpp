#pragma once

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lorenzfit/distributions.hpp"
#include "lorenzfit/grouped.hpp"

namespace testsupport {

using lorenzfit::FamilySpec;

// Parameter grids respecting mean existence, at least 20 points per family.
inline std::vector<FamilySpec> family_grid(lorenzfit::Family f) {
  std::vector<FamilySpec> out;
  switch (f) {
    case lorenzfit::Family::GB2:
      for (double a : {1.5, 2.5, 4.0})
        for (double p : {0.6, 1.5, 3.0})
          for (double q : {0.9, 1.6, 3.5})
            if (q > 1.0 / a + 0.05) out.push_back(FamilySpec::gb2(a, 1.7, p, q));
      break;
    case lorenzfit::Family::B2:
      for (double p : {0.5, 1.0, 2.0, 4.0, 8.0})
        for (double q : {1.3, 2.0, 4.0, 9.0}) out.push_back(FamilySpec::b2(2.0, p, q));
      break;
    case lorenzfit::Family::SM:
      for (double a : {0.8, 1.5, 2.5, 4.0, 7.0})
        for (double q : {0.7, 1.5, 3.0, 6.0, 12.0})
          if (q > 1.0 / a + 0.05) out.push_back(FamilySpec::sm(a, 3.0, q));
      break;
    case lorenzfit::Family::Dagum:
      for (double a : {1.3, 2.0, 3.0, 5.0, 8.0})
        for (double p : {0.3, 0.8, 1.5, 4.0}) out.push_back(FamilySpec::dagum(a, 0.5, p));
      break;
    case lorenzfit::Family::Lognormal:
      for (double s = 0.1; s < 2.05; s += 0.1) out.push_back(FamilySpec::lognormal(0.3, s));
      break;
    case lorenzfit::Family::Fisk:
      for (double a = 1.2; a < 10.05; a += 0.44) out.push_back(FamilySpec::fisk(a, 2.0));
      break;
    case lorenzfit::Family::Weibull:
      for (double a = 0.4; a < 6.05; a += 0.28) out.push_back(FamilySpec::weibull(a, 2.0));
      break;
  }
  return out;
}

// 1 - 2 * integral of the Lorenz curve.
inline double gini_by_quadrature(const FamilySpec& spec) {
  boost::math::quadrature::tanh_sinh<double> ts(12);
  const double area = ts.integrate([&](double u) { return lorenzfit::lorenz(spec, u); }, 0.0, 1.0);
  return 1.0 - 2.0 * area;
}

// Integral of g over [0, inf) by tanh-sinh on the half line.
template <class G>
double half_line(G g) {
  boost::math::quadrature::tanh_sinh<double> ts(12);
  return ts.integrate(g, 0.0, std::numeric_limits<double>::infinity());
}

template <class G>
double interval(G g, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts(12);
  return ts.integrate(g, a, b);
}

// Shares generated exactly from a Lorenz curve at u_j = j / J.
inline lorenzfit::GroupedDataset exact_dataset(const FamilySpec& spec, std::size_t J, std::string id = "exact") {
  lorenzfit::GroupedDataset d;
  d.id = std::move(id);
  d.u = lorenzfit::equal_groups(J);
  for (double u : d.u) d.s.push_back(u == 1.0 ? 1.0 : lorenzfit::lorenz(spec, u));
  if (spec.mean_exists()) d.mean = lorenzfit::moment(spec, 1.0);
  return d;
}

}  // namespace testsupport
