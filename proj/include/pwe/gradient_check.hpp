#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace pwe {

/// Central difference (L(x + eps) - L(x - eps)) / 2 eps for one coordinate.
/// The parameter is restored before returning.
template <class Loss>
double numeric_gradient(Loss&& loss, double& parameter, double eps = 1e-4) {
  const double saved = parameter;
  parameter = saved + eps;
  const double up = loss();
  parameter = saved - eps;
  const double down = loss();
  parameter = saved;
  return (up - down) / (2 * eps);
}

/// Coordinate-wise central differences over a block of parameters.
template <class Loss>
std::vector<double> numeric_gradient(Loss&& loss, std::span<double> parameters,
                                     double eps = 1e-4) {
  std::vector<double> g(parameters.size());
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    g[i] = numeric_gradient(loss, parameters[i], eps);
  }
  return g;
}

/// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates whose true
/// gradient is zero from turning rounding noise into a large ratio.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace pwe
