#pragma once

// Event series on the unit interval, the candidate change-point grid and
// segmentations of it, and piecewise-constant intensity functions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ppseg {

// Original-scale observation window, mapped affinely onto (0, 1).
struct Window {
  double t_min = 0.0;
  double t_max = 1.0;

  double width() const noexcept { return t_max - t_min; }
  double normalize(double t) const noexcept { return (t - t_min) / width(); }
  double denormalize(double u) const noexcept { return t_min + u * width(); }

  void validate() const {
    if (!(std::isfinite(t_min) && std::isfinite(t_max) && t_min < t_max)) {
      throw std::invalid_argument("window requires finite t_min < t_max");
    }
  }

  friend bool operator==(const Window&, const Window&) = default;
};

class EventSeries {
 public:
  EventSeries() = default;

  // `times` are already normalized and must lie strictly inside (0, 1) in
  // non-decreasing order.
  explicit EventSeries(std::vector<double> times, Window window = {})
      : times_(std::move(times)), window_(window) {
    window_.validate();
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const double t = times_[i];
      if (!(t > 0.0 && t < 1.0)) {
        throw std::invalid_argument(
            "event time " + std::to_string(t) +
            " is not strictly inside (0, 1); widen the observation window");
      }
      if (i > 0) {
        if (t < times_[i - 1]) {
          throw std::invalid_argument("event times must be sorted");
        }
        if (t == times_[i - 1]) has_ties_ = true;
      }
    }
  }

  // Normalizes original-scale times through `window`; input order is free.
  static EventSeries from_original(std::span<const double> times,
                                   const Window& window) {
    window.validate();
    std::vector<double> normalized;
    normalized.reserve(times.size());
    for (double t : times) {
      if (!std::isfinite(t) || t < window.t_min || t > window.t_max) {
        throw std::invalid_argument("event time " + std::to_string(t) +
                                    " lies outside the observation window");
      }
      normalized.push_back(window.normalize(t));
    }
    std::sort(normalized.begin(), normalized.end());
    return EventSeries(std::move(normalized), window);
  }

  std::span<const double> times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  const Window& window() const noexcept { return window_; }
  bool has_ties() const noexcept { return has_ties_; }

  std::vector<double> original_times() const {
    std::vector<double> out;
    out.reserve(times_.size());
    for (double u : times_) out.push_back(window_.denormalize(u));
    return out;
  }

 private:
  std::vector<double> times_;
  Window window_;
  bool has_ties_ = false;
};

class MarkedEventSeries {
 public:
  MarkedEventSeries() = default;

  MarkedEventSeries(EventSeries base, std::vector<double> marks)
      : base_(std::move(base)), marks_(std::move(marks)) {
    if (marks_.size() != base_.size()) {
      throw std::invalid_argument("mark count differs from event count");
    }
    for (double x : marks_) {
      if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("marks must be finite and positive");
      }
    }
  }

  // Sorts (time, mark) pairs by time; marks travel with their events.
  static MarkedEventSeries from_original(std::span<const double> times,
                                         std::span<const double> marks,
                                         const Window& window) {
    if (times.size() != marks.size()) {
      throw std::invalid_argument("mark count differs from event count");
    }
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return times[l] < times[r]; });
    std::vector<double> sorted_times, sorted_marks;
    sorted_times.reserve(order.size());
    sorted_marks.reserve(order.size());
    for (std::size_t i : order) {
      sorted_times.push_back(times[i]);
      sorted_marks.push_back(marks[i]);
    }
    return MarkedEventSeries(EventSeries::from_original(sorted_times, window),
                             std::move(sorted_marks));
  }

  const EventSeries& base() const noexcept { return base_; }
  std::span<const double> times() const noexcept { return base_.times(); }
  std::span<const double> marks() const noexcept { return marks_; }
  std::size_t size() const noexcept { return base_.size(); }
  bool empty() const noexcept { return base_.empty(); }
  const Window& window() const noexcept { return base_.window(); }

  double mean_mark() const {
    if (marks_.empty()) throw std::invalid_argument("no marks to average");
    return std::accumulate(marks_.begin(), marks_.end(), 0.0) /
           static_cast<double>(marks_.size());
  }

 private:
  EventSeries base_;
  std::vector<double> marks_;
};

enum class GridSide { before, at, boundary };

inline const char* to_string(GridSide side) noexcept {
  switch (side) {
    case GridSide::before: return "before";
    case GridSide::at: return "at";
    case GridSide::boundary: return "boundary";
  }
  return "?";
}

struct GridPoint {
  std::size_t index = 0;
  GridSide side = GridSide::boundary;
  double value = 0.0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

// The 2n candidate locations {T_1-, T_1, ..., T_n-, T_n} plus the two
// boundaries. Index p encodes the side by parity: odd p = 2m-1 is "just
// before" event m, even p = 2m is "at" event m. The number of events in
// (value(0), value(p)] is therefore floor(p / 2).
class CandidateGrid {
 public:
  CandidateGrid() : CandidateGrid(EventSeries{}) {}

  explicit CandidateGrid(const EventSeries& events)
      : times_(events.times().begin(), events.times().end()),
        mark_prefix_(times_.size() + 1, 0.0) {}

  explicit CandidateGrid(const MarkedEventSeries& events)
      : times_(events.times().begin(), events.times().end()),
        mark_prefix_(times_.size() + 1, 0.0),
        has_marks_(true) {
    const auto marks = events.marks();
    for (std::size_t i = 0; i < marks.size(); ++i) {
      mark_prefix_[i + 1] = mark_prefix_[i] + marks[i];
    }
  }

  std::size_t event_count() const noexcept { return times_.size(); }
  std::size_t interior_size() const noexcept { return 2 * times_.size(); }
  std::size_t last_index() const noexcept { return 2 * times_.size() + 1; }
  bool has_marks() const noexcept { return has_marks_; }
  std::span<const double> times() const noexcept { return times_; }

  double value(std::size_t p) const {
    check_index(p);
    if (p == 0) return 0.0;
    if (p == last_index()) return 1.0;
    return times_[(p - 1) / 2];
  }

  GridSide side(std::size_t p) const {
    check_index(p);
    if (p == 0 || p == last_index()) return GridSide::boundary;
    return (p % 2 == 1) ? GridSide::before : GridSide::at;
  }

  GridPoint point(std::size_t p) const { return {p, side(p), value(p)}; }

  std::vector<GridPoint> points() const {
    std::vector<GridPoint> out;
    out.reserve(last_index() + 1);
    for (std::size_t p = 0; p <= last_index(); ++p) out.push_back(point(p));
    return out;
  }

  // Events in (0, value(p)] under before/at semantics.
  std::size_t events_upto(std::size_t p) const {
    check_index(p);
    return p / 2;
  }

  double mark_sum_upto(std::size_t p) const { return mark_prefix_[events_upto(p)]; }

 private:
  void check_index(std::size_t p) const {
    if (p > last_index()) {
      throw std::out_of_range("grid index " + std::to_string(p) +
                              " exceeds " + std::to_string(last_index()));
    }
  }

  std::vector<double> times_;
  std::vector<double> mark_prefix_;
  bool has_marks_ = false;
};

inline CandidateGrid build_grid(const EventSeries& events) { return CandidateGrid(events); }
inline CandidateGrid build_grid(const MarkedEventSeries& events) {
  return CandidateGrid(events);
}

struct SegmentStats {
  std::size_t count = 0;   // nu
  double length = 0.0;     // delta tau
  double mark_sum = 0.0;   // S, zero without marks
};

// Statistics of the segment (value(p_lo), value(p_hi)].
inline SegmentStats segment_stats(const CandidateGrid& grid, std::size_t p_lo,
                                  std::size_t p_hi) {
  if (p_hi > grid.last_index()) throw std::out_of_range("segment end beyond grid");
  if (p_lo >= p_hi) throw std::invalid_argument("segment requires p_lo < p_hi");
  return {grid.events_upto(p_hi) - grid.events_upto(p_lo),
          grid.value(p_hi) - grid.value(p_lo),
          grid.mark_sum_upto(p_hi) - grid.mark_sum_upto(p_lo)};
}

// A zero-count, zero-length segment only arises from tied event times and is
// never a member of the restricted segmentation space.
inline bool is_empty_segment(const SegmentStats& s) noexcept {
  return s.count == 0 && s.length == 0.0;
}

// Restricted count-vector space: an interior zero must have non-zero
// neighbours on both sides.
inline bool in_upsilon_star(std::span<const std::size_t> counts) noexcept {
  for (std::size_t k = 1; k + 1 < counts.size(); ++k) {
    if (counts[k] == 0 && (counts[k - 1] == 0 || counts[k + 1] == 0)) return false;
  }
  return true;
}

class Segmentation {
 public:
  // K = 1, no change-points.
  explicit Segmentation(const CandidateGrid& grid) : event_count_(grid.event_count()) {}

  static Segmentation on_grid(const CandidateGrid& grid,
                              std::span<const std::size_t> indices) {
    Segmentation seg(grid);
    std::size_t previous = 0;
    for (std::size_t p : indices) {
      if (p == 0 || p >= grid.last_index()) {
        throw std::invalid_argument("change-point index " + std::to_string(p) +
                                    " is not an interior grid point");
      }
      if (p <= previous) {
        throw std::invalid_argument("change-point indices must be strictly increasing");
      }
      if (is_empty_segment(segment_stats(grid, previous, p))) {
        throw std::invalid_argument("segmentation contains a zero-count zero-length segment");
      }
      seg.points_.push_back(grid.point(p));
      previous = p;
    }
    if (is_empty_segment(segment_stats(grid, previous, grid.last_index()))) {
      throw std::invalid_argument("segmentation contains a zero-count zero-length segment");
    }
    return seg;
  }

  std::size_t segment_count() const noexcept { return points_.size() + 1; }
  std::size_t event_count() const noexcept { return event_count_; }
  std::span<const GridPoint> change_points() const noexcept { return points_; }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    out.reserve(points_.size());
    for (const auto& gp : points_) out.push_back(gp.index);
    return out;
  }

  // 0, change-point values, 1.
  std::vector<double> boundaries() const {
    std::vector<double> out{0.0};
    for (const auto& gp : points_) out.push_back(gp.value);
    out.push_back(1.0);
    return out;
  }

  // Segment endpoints as grid indices, including the boundaries.
  std::vector<std::size_t> grid_endpoints() const {
    std::vector<std::size_t> out{0};
    for (const auto& gp : points_) out.push_back(gp.index);
    out.push_back(2 * event_count_ + 1);
    return out;
  }

  friend bool operator==(const Segmentation&, const Segmentation&) = default;

 private:
  std::vector<GridPoint> points_;
  std::size_t event_count_ = 0;
};

inline void check_consistent(const Segmentation& seg, const CandidateGrid& grid) {
  if (seg.event_count() != grid.event_count()) {
    throw std::invalid_argument("segmentation built on a different grid");
  }
  for (const auto& gp : seg.change_points()) {
    if (gp.index >= grid.last_index() || grid.value(gp.index) != gp.value) {
      throw std::invalid_argument("segmentation built on a different grid");
    }
  }
}

inline std::vector<SegmentStats> segment_table(const Segmentation& seg,
                                               const CandidateGrid& grid) {
  check_consistent(seg, grid);
  const auto ends = seg.grid_endpoints();
  std::vector<SegmentStats> out;
  out.reserve(ends.size() - 1);
  for (std::size_t k = 0; k + 1 < ends.size(); ++k) {
    out.push_back(segment_stats(grid, ends[k], ends[k + 1]));
  }
  return out;
}

inline std::vector<std::size_t> count_vector(const Segmentation& seg,
                                             const CandidateGrid& grid) {
  std::vector<std::size_t> counts;
  for (const auto& s : segment_table(seg, grid)) counts.push_back(s.count);
  return counts;
}

// Piecewise-constant intensity on [0, 1] with optional per-segment
// exponential mark rates sharing the same breakpoints.
class PiecewiseIntensity {
 public:
  PiecewiseIntensity(std::vector<double> breakpoints, std::vector<double> values,
                     std::optional<std::vector<double>> mark_rates = std::nullopt)
      : breakpoints_(std::move(breakpoints)),
        values_(std::move(values)),
        mark_rates_(std::move(mark_rates)) {
    if (breakpoints_.size() < 2 || values_.size() + 1 != breakpoints_.size()) {
      throw std::invalid_argument("intensity needs K values and K + 1 breakpoints");
    }
    if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0) {
      throw std::invalid_argument("intensity breakpoints must run from 0 to 1");
    }
    for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
      if (!(breakpoints_[k] > breakpoints_[k - 1])) {
        throw std::invalid_argument("intensity breakpoints must be strictly increasing");
      }
    }
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("intensity values must be finite and non-negative");
      }
    }
    if (mark_rates_) {
      if (mark_rates_->size() != values_.size()) {
        throw std::invalid_argument("mark rates need one value per segment");
      }
      for (double r : *mark_rates_) {
        if (!(r > 0.0) || !std::isfinite(r)) {
          throw std::invalid_argument("mark rates must be finite and positive");
        }
      }
    }
  }

  static PiecewiseIntensity constant(double value) { return {{0.0, 1.0}, {value}}; }

  std::size_t segment_count() const noexcept { return values_.size(); }
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::optional<std::vector<double>>& mark_rates() const noexcept { return mark_rates_; }

  double segment_length(std::size_t k) const { return breakpoints_[k + 1] - breakpoints_[k]; }

  // Segment containing t, with right-closed segments (b_{k-1}, b_k].
  std::size_t segment_of(double t) const {
    const auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end() - 1, t);
    return static_cast<std::size_t>(it - (breakpoints_.begin() + 1));
  }

  double rate_at(double t) const { return values_[segment_of(t)]; }

  // Lambda(t) = integral of the intensity over [0, t].
  double cumulative(double t) const {
    if (t <= 0.0) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      const double lo = breakpoints_[k];
      const double hi = breakpoints_[k + 1];
      if (t >= hi) {
        total += values_[k] * (hi - lo);
      } else {
        total += values_[k] * (t - lo);
        break;
      }
    }
    return total;
  }

  double total() const { return cumulative(1.0); }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  std::optional<std::vector<double>> mark_rates_;
};

}  // namespace ppseg
