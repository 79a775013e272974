#pragma once

// Piecewise-constant (marked) Poisson process generators and the six-segment
// benchmark design.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ppseg/core_model.hpp"
#include "ppseg/random.hpp"

namespace ppseg {

// Returns (lambda_minus, lambda_plus) for mean intensity `mean_intensity`
// and ratio lambda_plus / lambda_minus, given the total odd-segment and
// even-segment lengths.
inline std::pair<double, double> derive_rates(double mean_intensity, double ratio,
                                              double odd_length = 17.0 / 24.0,
                                              double even_length = 7.0 / 24.0) {
  if (!(mean_intensity > 0.0) || !std::isfinite(mean_intensity)) {
    throw std::invalid_argument("mean intensity must be positive");
  }
  if (!(ratio >= 1.0) || !std::isfinite(ratio)) {
    throw std::invalid_argument("intensity ratio must be at least 1");
  }
  const double low = mean_intensity / (odd_length + ratio * even_length);
  return {low, ratio * low};
}

// K = 6 segments with boundaries [0, 7, 8, 14, 16, 20, 24] / 24. Odd
// segments (1st, 3rd, 5th) get the low rate, even ones the high rate.
struct BenchmarkDesign {
  static constexpr std::array<double, 7> kBoundaries = {
      0.0, 7.0 / 24.0, 8.0 / 24.0, 14.0 / 24.0, 16.0 / 24.0, 20.0 / 24.0, 1.0};
  static constexpr double kOddLength = 17.0 / 24.0;
  static constexpr double kEvenLength = 7.0 / 24.0;

  double mean_intensity = 100.0;
  double ratio = 1.0;
  std::optional<double> rho_odd;
  std::optional<double> rho_even;

  std::pair<double, double> rates() const {
    return derive_rates(mean_intensity, ratio, kOddLength, kEvenLength);
  }

  bool marked() const noexcept { return rho_odd.has_value(); }

  PiecewiseIntensity intensity() const {
    const auto [low, high] = rates();
    std::vector<double> values, mark_rates;
    for (std::size_t k = 0; k + 1 < kBoundaries.size(); ++k) {
      const bool odd = (k % 2 == 0);
      values.push_back(odd ? low : high);
      if (marked()) mark_rates.push_back(odd ? *rho_odd : rho_even.value_or(*rho_odd));
    }
    std::vector<double> bounds(kBoundaries.begin(), kBoundaries.end());
    if (marked()) return {std::move(bounds), std::move(values), std::move(mark_rates)};
    return {std::move(bounds), std::move(values)};
  }

  // True when neither the intensity nor the mark rate changes.
  bool constant() const noexcept {
    return ratio == 1.0 && (!marked() || rho_even.value_or(*rho_odd) == *rho_odd);
  }
};

namespace detail {

// Uniform draw strictly inside (lo, hi): boundary hits move one ulp inward.
inline double uniform_interior(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> uniform(lo, hi);
  double x = uniform(rng);
  if (x <= lo) x = std::nextafter(lo, hi);
  if (x >= hi) x = std::nextafter(hi, lo);
  return x;
}

inline std::size_t poisson_draw(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long long> poisson(mean);
  return static_cast<std::size_t>(poisson(rng));
}

}  // namespace detail

// Count-then-place: per segment draw N ~ Poisson(lambda_k * length_k) and
// N uniform positions.
inline EventSeries simulate_pp(const PiecewiseIntensity& intensity, Rng& rng) {
  std::vector<double> times;
  for (std::size_t k = 0; k < intensity.segment_count(); ++k) {
    const double lo = intensity.breakpoints()[k];
    const double hi = intensity.breakpoints()[k + 1];
    const std::size_t count = detail::poisson_draw(intensity.values()[k] * (hi - lo), rng);
    for (std::size_t i = 0; i < count; ++i) times.push_back(detail::uniform_interior(lo, hi, rng));
  }
  std::sort(times.begin(), times.end());
  return EventSeries(std::move(times));
}

// As simulate_pp, with an exponential mark of rate rho_k for each event of
// segment k.
inline MarkedEventSeries simulate_marked(const PiecewiseIntensity& intensity, Rng& rng) {
  if (!intensity.mark_rates()) {
    throw std::invalid_argument("marked simulation requires mark rates");
  }
  const auto& rho = *intensity.mark_rates();
  std::vector<std::pair<double, double>> events;
  for (std::size_t k = 0; k < intensity.segment_count(); ++k) {
    const double lo = intensity.breakpoints()[k];
    const double hi = intensity.breakpoints()[k + 1];
    const std::size_t count = detail::poisson_draw(intensity.values()[k] * (hi - lo), rng);
    std::exponential_distribution<double> mark(rho[k]);
    for (std::size_t i = 0; i < count; ++i) {
      const double t = detail::uniform_interior(lo, hi, rng);
      double x = mark(rng);
      if (x <= 0.0) x = std::numeric_limits<double>::denorm_min();
      events.emplace_back(t, x);
    }
  }
  std::sort(events.begin(), events.end());
  std::vector<double> times, marks;
  times.reserve(events.size());
  marks.reserve(events.size());
  for (const auto& [t, x] : events) {
    times.push_back(t);
    marks.push_back(x);
  }
  return MarkedEventSeries(EventSeries(std::move(times)), std::move(marks));
}

}  // namespace ppseg
