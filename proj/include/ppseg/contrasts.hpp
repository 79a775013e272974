#pragma once

// Segment costs, segment-additive contrasts, estimators and log-likelihoods
// for the Poisson and exponentially-marked Poisson segmentation models.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppseg/core_model.hpp"
#include "ppseg/numeric.hpp"

namespace ppseg {

enum class ContrastKind { poisson, poisson_gamma, marked_poisson, marked_pgeg };

inline const char* to_string(ContrastKind kind) noexcept {
  switch (kind) {
    case ContrastKind::poisson: return "poisson";
    case ContrastKind::poisson_gamma: return "poisson_gamma";
    case ContrastKind::marked_poisson: return "marked_poisson";
    case ContrastKind::marked_pgeg: return "marked_pgeg";
  }
  return "?";
}

inline bool is_marked(ContrastKind kind) noexcept {
  return kind == ContrastKind::marked_poisson || kind == ContrastKind::marked_pgeg;
}

inline bool is_bayesian(ContrastKind kind) noexcept {
  return kind == ContrastKind::poisson_gamma || kind == ContrastKind::marked_pgeg;
}

// Additive penalty f(length) + beta per segment. f must be concave on (0, 1].
struct LengthPenalty {
  std::function<double(double)> length_term;
  double per_segment = 0.0;
};

struct ContrastSpec {
  ContrastKind kind = ContrastKind::poisson_gamma;
  double a = 1.0;       // intensity prior shape
  double b = 1.0;       // intensity prior rate
  double a_rho = 2.01;  // mark-rate prior shape
  double b_rho = 1.0;   // mark-rate prior rate
  std::optional<LengthPenalty> penalty;
  // Unset means: forbid for the likelihood contrasts, allow for the
  // Gamma-prior ones.
  std::optional<bool> forbid_zero_length;

  bool forbids_zero_length() const noexcept {
    return forbid_zero_length.value_or(!is_bayesian(kind));
  }

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw std::invalid_argument("contrast hyper-parameters a and b must be positive");
    }
    if (kind == ContrastKind::marked_pgeg && (!(a_rho > 2.0) || !(b_rho > 0.0))) {
      throw std::invalid_argument("marked contrast requires a_rho > 2 and b_rho > 0");
    }
    if (penalty && penalty->length_term) check_concave(penalty->length_term);
  }

  // Numerical spot-check of concavity on a uniform grid of (0, 1].
  static void check_concave(const std::function<double(double)>& f) {
    constexpr int kSteps = 64;
    constexpr double h = 1.0 / kSteps;
    for (int i = 1; i + 1 < kSteps; ++i) {
      const double lo = f(i * h), mid = f((i + 1) * h), hi = f((i + 2) * h);
      const double scale = std::max({1.0, std::fabs(lo), std::fabs(mid), std::fabs(hi)});
      if (lo - 2.0 * mid + hi > 1e-8 * scale) {
        throw std::invalid_argument("penalty length term is not concave on (0, 1]");
      }
    }
  }
};

namespace detail {

inline void require_non_negative(double length, double mark_sum = 0.0) {
  if (!(length >= 0.0) || !(mark_sum >= 0.0)) {
    throw std::invalid_argument("segment length and mark sum must be non-negative");
  }
}

inline void require_positive(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("Gamma prior parameters must be positive");
  }
}

// -log of the Gamma-Poisson marginal for one segment without the prior
// normalizer: shape~ log(rate~) - log Gamma(shape~).
inline double gamma_marginal_term(double post_shape, double post_rate,
                                  double log_gamma_post_shape) noexcept {
  return post_shape * std::log(post_rate) - log_gamma_post_shape;
}

inline double gamma_prior_term(double shape, double rate) noexcept {
  return -shape * std::log(rate) + log_gamma(shape);
}

inline double degenerate_value(bool forbid_zero_length) noexcept {
  return forbid_zero_length ? kInf : -kInf;
}

}  // namespace detail

// nu (1 - log(nu / length)); 0 for an empty segment.
inline double poisson_cost(std::size_t count, double length, bool forbid_zero_length = false) {
  detail::require_non_negative(length);
  if (count == 0) return 0.0;
  if (length == 0.0) return detail::degenerate_value(forbid_zero_length);
  const double nu = static_cast<double>(count);
  return nu * (1.0 - std::log(nu / length));
}

// Poisson-Gamma cost, including one share of the prior normalizer so that
// the contrast stays segment-additive.
inline double pg_cost(std::size_t count, double length, double a, double b) {
  detail::require_non_negative(length);
  detail::require_positive(a, b);
  const double shape = static_cast<double>(count) + a;
  return detail::gamma_marginal_term(shape, length + b, log_gamma(shape)) +
         detail::gamma_prior_term(a, b);
}

inline double mp_cost(std::size_t count, double length, double mark_sum,
                      bool forbid_zero_length = false) {
  detail::require_non_negative(length, mark_sum);
  if (count == 0) return 0.0;
  if (length == 0.0 || mark_sum == 0.0) return detail::degenerate_value(forbid_zero_length);
  const double nu = static_cast<double>(count);
  return nu * (-std::log(nu / length) - std::log(nu / mark_sum) + 2.0);
}

inline double mpgeg_cost(std::size_t count, double length, double mark_sum, double a_lambda,
                         double b_lambda, double a_rho, double b_rho) {
  detail::require_non_negative(length, mark_sum);
  detail::require_positive(a_lambda, b_lambda);
  detail::require_positive(a_rho, b_rho);
  const double nu = static_cast<double>(count);
  const double shape_lambda = nu + a_lambda;
  const double shape_rho = nu + a_rho;
  return detail::gamma_marginal_term(shape_lambda, length + b_lambda, log_gamma(shape_lambda)) +
         detail::gamma_marginal_term(shape_rho, mark_sum + b_rho, log_gamma(shape_rho)) +
         (detail::gamma_prior_term(a_lambda, b_lambda) + detail::gamma_prior_term(a_rho, b_rho));
}

// Per-segment cost of a contrast with log-Gamma values tabulated for counts
// 0..max_count. Values are bit-identical to the free cost functions.
class SegmentCoster {
 public:
  SegmentCoster(const ContrastSpec& spec, std::size_t max_count)
      : spec_(spec), forbid_(spec.forbids_zero_length()) {
    spec_.validate();
    if (is_bayesian(spec_.kind)) {
      lg_lambda_.resize(max_count + 1);
      for (std::size_t nu = 0; nu <= max_count; ++nu) {
        lg_lambda_[nu] = log_gamma(static_cast<double>(nu) + spec_.a);
      }
      prior_ = detail::gamma_prior_term(spec_.a, spec_.b);
    }
    if (spec_.kind == ContrastKind::marked_pgeg) {
      lg_rho_.resize(max_count + 1);
      for (std::size_t nu = 0; nu <= max_count; ++nu) {
        lg_rho_[nu] = log_gamma(static_cast<double>(nu) + spec_.a_rho);
      }
      prior_ = prior_ + detail::gamma_prior_term(spec_.a_rho, spec_.b_rho);
    }
  }

  const ContrastSpec& spec() const noexcept { return spec_; }

  // Cost without the penalty. Zero-count zero-length segments are excluded
  // from the segmentation space and cost +inf.
  double base_cost(const SegmentStats& s) const {
    if (is_empty_segment(s)) return kInf;
    switch (spec_.kind) {
      case ContrastKind::poisson:
        return poisson_cost(s.count, s.length, forbid_);
      case ContrastKind::poisson_gamma: {
        const double shape = static_cast<double>(s.count) + spec_.a;
        return detail::gamma_marginal_term(shape, s.length + spec_.b, lg_lambda_.at(s.count)) +
               prior_;
      }
      case ContrastKind::marked_poisson:
        return mp_cost(s.count, s.length, s.mark_sum, forbid_);
      case ContrastKind::marked_pgeg: {
        const double nu = static_cast<double>(s.count);
        return detail::gamma_marginal_term(nu + spec_.a, s.length + spec_.b,
                                           lg_lambda_.at(s.count)) +
               detail::gamma_marginal_term(nu + spec_.a_rho, s.mark_sum + spec_.b_rho,
                                           lg_rho_.at(s.count)) +
               prior_;
      }
    }
    return kInf;
  }

  double operator()(const SegmentStats& s) const {
    double cost = base_cost(s);
    if (spec_.penalty) {
      const auto& pen = *spec_.penalty;
      const double f = pen.length_term ? pen.length_term(s.length) : 0.0;
      cost = ext_add(cost, f + pen.per_segment);
    }
    return cost;
  }

 private:
  ContrastSpec spec_;
  bool forbid_;
  std::vector<double> lg_lambda_;
  std::vector<double> lg_rho_;
  double prior_ = 0.0;
};

inline void check_compatible(const CandidateGrid& grid, const ContrastSpec& spec) {
  if (is_marked(spec.kind) && !grid.has_marks()) {
    throw std::invalid_argument(std::string("contrast ") + to_string(spec.kind) +
                                " requires marked data");
  }
}

// Left-to-right extended-real sum of segment costs for change-points given as
// strictly increasing interior grid indices.
inline double chain_contrast(const CandidateGrid& grid, const SegmentCoster& coster,
                             std::span<const std::size_t> indices) {
  double total = 0.0;
  std::size_t previous = 0;
  for (std::size_t p : indices) {
    total = ext_add(total, coster(segment_stats(grid, previous, p)));
    previous = p;
  }
  return ext_add(total, coster(segment_stats(grid, previous, grid.last_index())));
}

inline double contrast(const Segmentation& seg, const CandidateGrid& grid,
                       const ContrastSpec& spec) {
  check_compatible(grid, spec);
  check_consistent(seg, grid);
  const SegmentCoster coster(spec, grid.event_count());
  const auto indices = seg.indices();
  return chain_contrast(grid, coster, indices);
}

inline double contrast(const Segmentation& seg, const EventSeries& data,
                       const ContrastSpec& spec) {
  return contrast(seg, build_grid(data), spec);
}

inline double contrast(const Segmentation& seg, const MarkedEventSeries& data,
                       const ContrastSpec& spec) {
  return contrast(seg, build_grid(data), spec);
}

// Contrast of change-points at arbitrary times 0 < tau_1 < ... < tau_{K-1} < 1
// with right-closed segments (tau_{k-1}, tau_k].
inline double contrast_at(const CandidateGrid& grid, const ContrastSpec& spec,
                          std::span<const double> taus) {
  check_compatible(grid, spec);
  const SegmentCoster coster(spec, grid.event_count());
  const auto times = grid.times();
  auto events_upto = [&](double t) {
    return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) -
                                    times.begin());
  };
  double total = 0.0;
  double previous = 0.0;
  std::size_t before = 0;
  for (std::size_t k = 0; k <= taus.size(); ++k) {
    const double tau = k < taus.size() ? taus[k] : 1.0;
    if (k < taus.size() && !(tau > previous && tau < 1.0)) {
      throw std::invalid_argument("change-points must increase strictly inside (0, 1)");
    }
    const std::size_t upto = k < taus.size() ? events_upto(tau) : grid.event_count();
    const SegmentStats s{upto - before, tau - previous,
                         grid.mark_sum_upto(2 * upto) - grid.mark_sum_upto(2 * before)};
    total = ext_add(total, coster(s));
    previous = tau;
    before = upto;
  }
  return total;
}

// (nu + a) / (length + b)
inline double posterior_mean_lambda(std::size_t count, double length, double a, double b) {
  detail::require_non_negative(length);
  detail::require_positive(a, b);
  return (static_cast<double>(count) + a) / (length + b);
}

// (nu + a_rho) / (S + b_rho)
inline double posterior_mean_rho(std::size_t count, double mark_sum, double a_rho,
                                 double b_rho) {
  detail::require_non_negative(0.0, mark_sum);
  detail::require_positive(a_rho, b_rho);
  return (static_cast<double>(count) + a_rho) / (mark_sum + b_rho);
}

namespace detail {
inline double ratio_estimate(std::size_t count, double denominator) {
  if (!(denominator >= 0.0)) throw std::invalid_argument("negative denominator");
  if (count == 0) return 0.0;
  if (denominator == 0.0) return kInf;
  return static_cast<double>(count) / denominator;
}
}  // namespace detail

inline double mle_lambda(std::size_t count, double length) {
  return detail::ratio_estimate(count, length);
}

inline double mle_rho(std::size_t count, double mark_sum) {
  return detail::ratio_estimate(count, mark_sum);
}

namespace detail {
// N log(rate) - rate * exposure, with 0 log 0 = 0.
inline double poisson_term(std::size_t count, double exposure, double rate) {
  if (!(rate >= 0.0)) throw std::invalid_argument("rates must be non-negative");
  if (count == 0) return -rate * exposure;
  if (rate == 0.0) return -kInf;
  return static_cast<double>(count) * std::log(rate) - rate * exposure;
}
}  // namespace detail

inline double poisson_loglik(std::span<const std::size_t> counts,
                             std::span<const double> lengths, std::span<const double> rates) {
  if (counts.size() != lengths.size() || counts.size() != rates.size()) {
    throw std::invalid_argument("poisson_loglik: list lengths differ");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    total = ext_add(total, detail::poisson_term(counts[k], lengths[k], rates[k]));
  }
  return total;
}

// Exponential marks: log p(x | rho) = log rho - rho x, summed per segment.
inline double marked_loglik(std::span<const std::size_t> counts,
                            std::span<const double> lengths,
                            std::span<const double> mark_sums,
                            std::span<const double> rates,
                            std::span<const double> mark_rates) {
  const std::size_t k_count = counts.size();
  if (lengths.size() != k_count || mark_sums.size() != k_count || rates.size() != k_count ||
      mark_rates.size() != k_count) {
    throw std::invalid_argument("marked_loglik: list lengths differ");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    total = ext_add(total, detail::poisson_term(counts[k], lengths[k], rates[k]));
    total = ext_add(total, detail::poisson_term(counts[k], mark_sums[k], mark_rates[k]));
  }
  return total;
}

struct Hyperparameters {
  double a = 1.0;
  double b = 1.0;
  std::optional<double> a_rho;
  std::optional<double> b_rho;
};

// a given (default 1), b = a / n so that the prior mean count is n.
inline Hyperparameters default_hyperparams(const EventSeries& data, double a = 1.0) {
  if (data.empty()) {
    throw std::invalid_argument("default hyper-parameters need at least one event");
  }
  if (!(a > 0.0)) throw std::invalid_argument("prior shape must be positive");
  return {a, a / static_cast<double>(data.size()), std::nullopt, std::nullopt};
}

// Additionally b_rho = mean(marks) (a_rho - 1), matching the prior mean mark.
inline Hyperparameters default_hyperparams(const MarkedEventSeries& data, double a = 1.0,
                                           double a_rho = 2.01) {
  Hyperparameters h = default_hyperparams(data.base(), a);
  if (!(a_rho > 2.0)) throw std::invalid_argument("mark prior shape must exceed 2");
  h.a_rho = a_rho;
  h.b_rho = data.mean_mark() * (a_rho - 1.0);
  return h;
}

inline ContrastSpec with_hyperparams(ContrastSpec spec, const Hyperparameters& h) {
  spec.a = h.a;
  spec.b = h.b;
  if (h.a_rho) spec.a_rho = *h.a_rho;
  if (h.b_rho) spec.b_rho = *h.b_rho;
  return spec;
}

}  // namespace ppseg
