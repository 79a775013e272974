#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>

namespace ppseg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Extended-real addition. Infinities are absorbing and +inf dominates -inf,
// so a forbidden segment keeps a segmentation forbidden even when another
// segment is degenerate. Never produces NaN from non-NaN inputs.
inline double ext_add(double lhs, double rhs) noexcept {
  const double sum = lhs + rhs;
  return std::isnan(sum) ? kInf : sum;
}

// log Gamma(x) for x > 0. Recurrence shift to x >= 7 then the Stirling
// series; thread-safe (no global sign state, unlike ::lgamma).
inline double log_gamma(double x) noexcept {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(x)) return kInf;
  double shift = 0.0;
  if (x < 7.0) {
    double product = 1.0;
    while (x < 7.0) {
      product *= x;
      x += 1.0;
    }
    shift = std::log(product);
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12.0 -
             inv2 * (1.0 / 360.0 -
                     inv2 * (1.0 / 1260.0 -
                             inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
  constexpr double half_log_two_pi = 0.91893853320467274178;
  return (x - 0.5) * std::log(x) - x + half_log_two_pi + series - shift;
}

// Pairwise summation in fixed index order. Deterministic for a given input
// sequence, independent of how the values were produced.
inline double pairwise_sum(std::span<const double> values) noexcept {
  if (values.size() <= 8) {
    double total = 0.0;
    for (double v : values) total = ext_add(total, v);
    return total;
  }
  const std::size_t half = values.size() / 2;
  return ext_add(pairwise_sum(values.first(half)),
                 pairwise_sum(values.subspan(half)));
}

}  // namespace ppseg
