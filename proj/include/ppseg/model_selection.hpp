#pragma once

// Choice of the number of segments by cross-validation on thinned processes,
// and the end-to-end fit.
//
// Keeping each event independently with probability f splits a Poisson
// process with intensity lambda into independent processes with intensities
// f lambda (learning) and (1 - f) lambda (test). Each replicate segments the
// learning process with a Gamma-prior contrast for every K, rescales the
// posterior-mean intensities by (1 - f) / f and scores them on the test
// process with the Poisson (or marked Poisson) negative log-likelihood.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "ppseg/contrasts.hpp"
#include "ppseg/core_model.hpp"
#include "ppseg/dp_engine.hpp"
#include "ppseg/numeric.hpp"
#include "ppseg/parallel.hpp"
#include "ppseg/random.hpp"

namespace ppseg {

struct CvConfig {
  double f = 0.8;
  std::size_t replicates = 500;
  std::size_t k_max = 12;
  std::uint64_t seed = 0;
  // K values defined in fewer replicates than this fraction are not selectable.
  double min_defined_fraction = 0.5;
  // Recompute b = a / n (and b_rho from the mean mark) on every learning set.
  bool refresh_hyperparameters = true;
  std::size_t threads = 1;

  void validate() const {
    if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("sampling fraction f must lie in (0, 1)");
    if (replicates < 1) throw std::invalid_argument("at least one replicate is required");
    if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
    if (!(min_defined_fraction > 0.0 && min_defined_fraction <= 1.0)) {
      throw std::invalid_argument("min_defined_fraction must lie in (0, 1]");
    }
  }
};

template <class Series>
struct ThinnedPair {
  Series learning;
  Series test;
};

namespace detail {

inline void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("sampling fraction f must lie in (0, 1)");
}

inline bool keep_for_learning(double f, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  return uniform(rng) < f;
}

}  // namespace detail

inline ThinnedPair<EventSeries> thin(const EventSeries& data, double f, Rng& rng) {
  detail::check_fraction(f);
  std::vector<double> learning, test;
  for (double t : data.times()) (detail::keep_for_learning(f, rng) ? learning : test).push_back(t);
  return {EventSeries(std::move(learning), data.window()),
          EventSeries(std::move(test), data.window())};
}

inline ThinnedPair<MarkedEventSeries> thin(const MarkedEventSeries& data, double f, Rng& rng) {
  detail::check_fraction(f);
  std::vector<double> lt, lx, tt, tx;
  const auto times = data.times();
  const auto marks = data.marks();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (detail::keep_for_learning(f, rng)) {
      lt.push_back(times[i]);
      lx.push_back(marks[i]);
    } else {
      tt.push_back(times[i]);
      tx.push_back(marks[i]);
    }
  }
  return {MarkedEventSeries(EventSeries(std::move(lt), data.window()), std::move(lx)),
          MarkedEventSeries(EventSeries(std::move(tt), data.window()), std::move(tx))};
}

// Test-process intensities from learning-process estimates.
inline std::vector<double> test_rates(std::span<const double> learning_rates, double f) {
  detail::check_fraction(f);
  const double scale = (1.0 - f) / f;
  std::vector<double> out;
  out.reserve(learning_rates.size());
  for (double r : learning_rates) out.push_back(r * scale);
  return out;
}

inline Hyperparameters hyperparams_for(const EventSeries& data, const ContrastSpec& spec) {
  return default_hyperparams(data, spec.a);
}

inline Hyperparameters hyperparams_for(const MarkedEventSeries& data, const ContrastSpec& spec) {
  if (is_marked(spec.kind)) return default_hyperparams(data, spec.a, spec.a_rho);
  return default_hyperparams(data.base(), spec.a);
}

// Per-segment estimates for a segmentation given by change-point indices.
struct SegmentEstimates {
  std::vector<double> boundaries;    // K + 1 normalized values, 0 .. 1
  std::vector<GridSide> sides;       // side tag of each boundary
  std::vector<std::size_t> counts;
  std::vector<double> lengths;
  std::vector<double> mark_sums;
  std::vector<double> lambda;        // posterior means (MLE for prior-free kinds)
  std::optional<std::vector<double>> rho;
};

inline SegmentEstimates estimate_segments(const CandidateGrid& grid,
                                          std::span<const std::size_t> change_indices,
                                          const ContrastSpec& spec) {
  SegmentEstimates est;
  std::vector<std::size_t> ends{0};
  ends.insert(ends.end(), change_indices.begin(), change_indices.end());
  ends.push_back(grid.last_index());
  for (std::size_t p : ends) {
    est.boundaries.push_back(grid.value(p));
    est.sides.push_back(grid.side(p));
  }
  const bool marked = is_marked(spec.kind);
  const bool bayes = is_bayesian(spec.kind);
  if (marked) est.rho.emplace();
  for (std::size_t k = 0; k + 1 < ends.size(); ++k) {
    const SegmentStats s = segment_stats(grid, ends[k], ends[k + 1]);
    est.counts.push_back(s.count);
    est.lengths.push_back(s.length);
    est.mark_sums.push_back(s.mark_sum);
    est.lambda.push_back(bayes ? posterior_mean_lambda(s.count, s.length, spec.a, spec.b)
                               : mle_lambda(s.count, s.length));
    if (marked) {
      est.rho->push_back(bayes ? posterior_mean_rho(s.count, s.mark_sum, spec.a_rho, spec.b_rho)
                               : mle_rho(s.count, s.mark_sum));
    }
  }
  return est;
}

namespace detail {

// Number of sorted `times` lying in (0, boundary] under before/at semantics.
inline std::size_t position_of(std::span<const double> times, double value, GridSide side) {
  if (side == GridSide::boundary) return value <= 0.0 ? 0 : times.size();
  const auto it = side == GridSide::at ? std::upper_bound(times.begin(), times.end(), value)
                                       : std::lower_bound(times.begin(), times.end(), value);
  return static_cast<std::size_t>(it - times.begin());
}

template <class Series>
std::span<const double> marks_of(const Series& s) {
  if constexpr (std::is_same_v<Series, MarkedEventSeries>) {
    return s.marks();
  } else {
    return {};
  }
}

// Negative (marked) Poisson log-likelihood of `test` under the learned
// segmentation, with intensities rescaled to the test fraction.
template <class Series>
double test_contrast(const Series& test, const SegmentEstimates& est, double f, bool marked) {
  const auto times = test.times();
  const auto marks = marks_of(test);
  const std::size_t k_count = est.counts.size();
  std::vector<std::size_t> counts(k_count);
  std::vector<double> mark_sums(k_count, 0.0);
  std::size_t lo = 0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const std::size_t hi = position_of(times, est.boundaries[k + 1], est.sides[k + 1]);
    counts[k] = hi - lo;
    if (marked) {
      for (std::size_t i = lo; i < hi; ++i) mark_sums[k] += marks[i];
    }
    lo = hi;
  }
  const auto rates = test_rates(est.lambda, f);
  if (marked) return -marked_loglik(counts, est.lengths, mark_sums, rates, *est.rho);
  return -poisson_loglik(counts, est.lengths, rates);
}

}  // namespace detail

struct CvCurvePoint {
  std::size_t k = 1;
  double mean = kInf;          // average test contrast over defined replicates
  double std_error = 0.0;
  std::size_t replicates_used = 0;
  bool selectable = false;
};

struct CvCurve {
  std::vector<CvCurvePoint> points;
  std::size_t selected_k = 1;
  std::size_t replicates = 0;
};

// Per-replicate test contrasts; `defined` is false where K was infeasible
// on that learning set.
struct CvReplicates {
  std::size_t k_max = 0;
  std::vector<double> values;   // replicate-major, k_max per replicate
  std::vector<char> defined;
};

template <class Series>
CvReplicates cross_validation_replicates(const Series& data, const ContrastSpec& spec,
                                         const CvConfig& cfg) {
  cfg.validate();
  spec.validate();
  if (data.empty()) throw std::invalid_argument("cross-validation needs at least one event");
  if (!is_bayesian(spec.kind)) {
    throw std::invalid_argument("cross-validation segments with a Gamma-prior contrast "
                                "(poisson_gamma or marked_pgeg)");
  }
  const bool marked = is_marked(spec.kind);
  if constexpr (!std::is_same_v<Series, MarkedEventSeries>) {
    if (marked) throw std::invalid_argument("marked contrast requires marked data");
  }

  CvReplicates out;
  out.k_max = cfg.k_max;
  out.values.assign(cfg.replicates * cfg.k_max, kInf);
  out.defined.assign(cfg.replicates * cfg.k_max, 0);

  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t m) {
    Rng rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(m)});
    const auto split = thin(data, cfg.f, rng);
    if (split.learning.empty()) return;
    const ContrastSpec learn_spec = cfg.refresh_hyperparameters
                                        ? with_hyperparams(spec, hyperparams_for(split.learning, spec))
                                        : spec;
    const CandidateGrid grid = build_grid(split.learning);
    const auto entries = solve(grid, learn_spec, cfg.k_max);
    for (const auto& entry : entries) {
      if (!entry.feasible) continue;
      const auto est = estimate_segments(grid, entry.change_indices, learn_spec);
      const std::size_t slot = m * cfg.k_max + (entry.k - 1);
      out.values[slot] = detail::test_contrast(split.test, est, cfg.f, marked);
      out.defined[slot] = 1;
    }
  });
  return out;
}

inline CvCurve summarize(const CvReplicates& reps, double min_defined_fraction) {
  CvCurve curve;
  const std::size_t k_max = reps.k_max;
  const std::size_t m_count = k_max == 0 ? 0 : reps.values.size() / k_max;
  curve.replicates = m_count;
  const double needed = min_defined_fraction * static_cast<double>(m_count);
  std::optional<std::size_t> best;
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::vector<double> values;
    for (std::size_t m = 0; m < m_count; ++m) {
      const std::size_t slot = m * k_max + (k - 1);
      if (reps.defined[slot]) values.push_back(reps.values[slot]);
    }
    CvCurvePoint point;
    point.k = k;
    point.replicates_used = values.size();
    if (!values.empty()) {
      const double n = static_cast<double>(values.size());
      point.mean = pairwise_sum(values) / n;
      if (values.size() > 1 && std::isfinite(point.mean)) {
        std::vector<double> sq;
        sq.reserve(values.size());
        for (double v : values) sq.push_back((v - point.mean) * (v - point.mean));
        point.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
      }
      point.selectable = static_cast<double>(values.size()) >= needed;
    }
    if (point.selectable && (!best || point.mean < curve.points[*best].mean)) best = k - 1;
    curve.points.push_back(point);
  }
  if (!best) throw std::runtime_error("no number of segments is defined in enough replicates");
  curve.selected_k = *best + 1;
  return curve;
}

template <class Series>
CvCurve cross_validate(const Series& data, const ContrastSpec& spec, const CvConfig& cfg) {
  return summarize(cross_validation_replicates(data, spec, cfg), cfg.min_defined_fraction);
}

struct FitResult {
  std::size_t k_hat = 1;
  std::vector<GridPoint> change_points;
  SegmentEstimates segments;
  double contrast = kInf;
  std::vector<SolveEntry> path;        // optimal contrast for every K on the full data
  std::optional<CvCurve> curve;        // absent for a fixed-K fit
  ContrastSpec spec;                   // with the hyper-parameters actually used
  std::vector<std::string> warnings;

  // Estimated intensity on the unit interval; zero-length segments dropped.
  PiecewiseIntensity intensity() const {
    std::vector<double> bounds{0.0}, values;
    std::vector<double> rho;
    for (std::size_t k = 0; k < segments.lambda.size(); ++k) {
      if (segments.lengths[k] <= 0.0) continue;
      bounds.push_back(segments.boundaries[k + 1]);
      values.push_back(segments.lambda[k]);
      if (segments.rho) rho.push_back((*segments.rho)[k]);
    }
    if (segments.rho) return {std::move(bounds), std::move(values), std::move(rho)};
    return {std::move(bounds), std::move(values)};
  }

  std::vector<double> change_values() const {
    std::vector<double> out;
    for (const auto& gp : change_points) out.push_back(gp.value);
    return out;
  }
};

namespace detail {

template <class Series>
FitResult finish_fit(const Series& data, const ContrastSpec& spec, std::size_t k_max,
                     std::size_t k) {
  FitResult result;
  result.spec = spec;
  const CandidateGrid grid = build_grid(data);
  result.path = solve(grid, spec, k_max);
  const SolveEntry& chosen = result.path.at(k - 1);
  if (!chosen.feasible) {
    throw std::invalid_argument("K = " + std::to_string(k) + " exceeds the grid capacity");
  }
  result.k_hat = k;
  result.contrast = chosen.contrast;
  result.warnings = chosen.warnings;
  for (std::size_t p : chosen.change_indices) result.change_points.push_back(grid.point(p));
  result.segments = estimate_segments(grid, chosen.change_indices, spec);
  if (data.empty()) {
    result.warnings.push_back("empty event series");
  } else if constexpr (std::is_same_v<Series, EventSeries>) {
    if (data.has_ties()) result.warnings.push_back("tied event times present");
  } else {
    if (data.base().has_ties()) result.warnings.push_back("tied event times present");
  }
  return result;
}

}  // namespace detail

// Hyper-parameters for a full-data fit: the default rule when requested.
template <class Series>
ContrastSpec resolve_spec(const Series& data, const ContrastSpec& spec, bool use_default_rule) {
  if (!use_default_rule) return spec;
  return with_hyperparams(spec, hyperparams_for(data, spec));
}

// Cross-validated choice of K, then the optimal segmentation and posterior
// means on the full data.
template <class Series>
FitResult fit(const Series& data, const ContrastSpec& spec, const CvConfig& cfg) {
  CvCurve curve = cross_validate(data, spec, cfg);
  const ContrastSpec full_spec = resolve_spec(data, spec, cfg.refresh_hyperparameters);
  FitResult result = detail::finish_fit(data, full_spec, cfg.k_max, curve.selected_k);
  result.curve = std::move(curve);
  return result;
}

// Optimal segmentation with a prescribed number of segments.
template <class Series>
FitResult fit_fixed_k(const Series& data, const ContrastSpec& spec, std::size_t k,
                      bool use_default_rule = true) {
  if (k < 1) throw std::invalid_argument("K must be at least 1");
  spec.validate();
  const ContrastSpec full_spec =
      (use_default_rule && !data.empty()) ? resolve_spec(data, spec, true) : spec;
  return detail::finish_fit(data, full_spec, k, k);
}

}  // namespace ppseg
