#pragma once

// Quality criteria for estimated segmentations: Hausdorff distance between
// change-point sets and the normalized L2 distance between cumulated
// intensities.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "ppseg/core_model.hpp"

namespace ppseg {

// Sorted change-points including the boundaries 0 and 1.
class ChangePointSet {
 public:
  explicit ChangePointSet(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2 || points_.front() != 0.0 || points_.back() != 1.0) {
      throw std::invalid_argument("change-point set must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i] > points_[i - 1])) {
        throw std::invalid_argument("change-points must be strictly increasing");
      }
    }
  }

  // Boundaries plus interior change-points; duplicates collapse.
  static ChangePointSet from_interior(std::span<const double> interior) {
    std::vector<double> pts{0.0};
    for (double t : interior) {
      if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("change-point outside (0, 1)");
      pts.push_back(t);
    }
    pts.push_back(1.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return ChangePointSet(std::move(pts));
  }

  std::span<const double> points() const noexcept { return points_; }

 private:
  std::vector<double> points_;
};

struct HausdorffDistances {
  double d1 = 0.0;  // worst distance from a true point to the estimate
  double d2 = 0.0;  // worst distance from an estimated point to the truth
  double d = 0.0;
};

// max over a of the distance to the nearest b; b sorted.
inline double directed_hausdorff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (double x : a) {
    const auto it = std::lower_bound(b.begin(), b.end(), x);
    double nearest = std::numeric_limits<double>::infinity();
    if (it != b.end()) nearest = *it - x;
    if (it != b.begin()) nearest = std::min(nearest, x - *(it - 1));
    worst = std::max(worst, nearest);
  }
  return worst;
}

inline HausdorffDistances hausdorff(const ChangePointSet& truth, const ChangePointSet& estimate) {
  HausdorffDistances out;
  out.d1 = directed_hausdorff(truth.points(), estimate.points());
  out.d2 = directed_hausdorff(estimate.points(), truth.points());
  out.d = std::max(out.d1, out.d2);
  return out;
}

// integral over [0, 1] of (Lambda_hat - Lambda)^2, divided by
// `normalization`. The difference is linear between merged breakpoints, so
// each piece integrates exactly as (g_u^2 + g_u g_v + g_v^2)(v - u) / 3.
inline double l2_cumulative(const PiecewiseIntensity& truth, const PiecewiseIntensity& estimate,
                            double normalization) {
  if (!(normalization > 0.0) || !std::isfinite(normalization)) {
    throw std::invalid_argument("L2 normalization must be positive");
  }
  std::vector<double> grid(truth.breakpoints().begin(), truth.breakpoints().end());
  grid.insert(grid.end(), estimate.breakpoints().begin(), estimate.breakpoints().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double integral = 0.0;
  double g_lo = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double g_hi = estimate.cumulative(grid[i]) - truth.cumulative(grid[i]);
    integral += (g_lo * g_lo + g_lo * g_hi + g_hi * g_hi) * (grid[i] - grid[i - 1]) / 3.0;
    g_lo = g_hi;
  }
  return integral / normalization;
}

}  // namespace ppseg
