#pragma once

#include <cmath>
#include <limits>
#include <span>

#include <Eigen/Core>

namespace vhem {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum(exp(values))). Returns -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> values) {
  double peak = kNegInf;
  for (double v : values) peak = std::max(peak, v);
  if (peak == kNegInf) return kNegInf;
  if (peak == std::numeric_limits<double>::infinity()) return peak;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

inline double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& values) {
  return log_sum_exp(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

/// log(x) with log(0) = -inf and no floating-point exception noise.
inline double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

/// x * log(x) with the 0 log 0 = 0 convention.
inline double x_log_x(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace vhem
