#pragma once

// Exact minimization of segment-additive contrasts over the candidate grid.
//
// The grid has A = 2n interior points tp_1..tp_A plus tp_0 = 0 and
// tp_{A+1} = 1. A segment (tp_{i-1}, tp_j] costs C(i:j) and the optimal cost
// of (0, tp_h] in K segments follows
//
//   C_{1,h} = C(1:h),   C_{K,h} = min_{K-1 <= j < h} C_{K-1,j} + C(j+1:h).
//
// Rounded addition is monotone, so the DP minimum equals the minimum of the
// left-to-right sums over all change-point vectors bit for bit.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppseg/contrasts.hpp"
#include "ppseg/core_model.hpp"
#include "ppseg/numeric.hpp"

namespace ppseg {

class CostMatrix {
 public:
  CostMatrix() = default;

  explicit CostMatrix(std::size_t interior_size)
      : interior_(interior_size), cells_(offset(interior_size + 2), kInf) {}

  // A, the number of interior grid points.
  std::size_t interior_size() const noexcept { return interior_; }
  std::size_t last_index() const noexcept { return interior_ + 1; }

  // Cost of (tp_lo, tp_hi] for 0 <= lo < hi <= A + 1; +inf otherwise.
  double segment(std::size_t lo, std::size_t hi) const noexcept {
    if (lo >= hi || hi > last_index()) return kInf;
    return cells_[offset(hi) + lo];
  }

  // C(i:j) in the 1-based convention: segment (tp_{i-1}, tp_j].
  double operator()(std::size_t i, std::size_t j) const noexcept {
    if (i < 1 || i > j) return kInf;
    return segment(i - 1, j);
  }

  // Costs of every segment ending at `hi`, indexed by the start point.
  std::span<const double> column(std::size_t hi) const noexcept {
    return {cells_.data() + offset(hi), hi};
  }

  void set(std::size_t lo, std::size_t hi, double cost) { cells_.at(offset(hi) + lo) = cost; }

 private:
  static constexpr std::size_t offset(std::size_t hi) noexcept {
    return hi == 0 ? 0 : hi * (hi - 1) / 2;
  }

  std::size_t interior_ = 0;
  std::vector<double> cells_;
};

inline CostMatrix build_cost_matrix(const CandidateGrid& grid, const ContrastSpec& spec) {
  check_compatible(grid, spec);
  const SegmentCoster coster(spec, grid.event_count());
  CostMatrix costs(grid.interior_size());
  for (std::size_t hi = 1; hi <= grid.last_index(); ++hi) {
    for (std::size_t lo = 0; lo < hi; ++lo) {
      costs.set(lo, hi, coster(segment_stats(grid, lo, hi)));
    }
  }
  return costs;
}

struct SolveEntry {
  std::size_t k = 1;
  // False when K - 1 exceeds the number of interior grid points.
  bool feasible = false;
  double contrast = kInf;
  std::vector<std::size_t> change_indices;
  std::vector<std::string> warnings;

  bool degenerate() const noexcept { return feasible && contrast == -kInf; }
};

namespace detail {

class DpTable {
 public:
  DpTable(std::size_t k_max, std::size_t width)
      : width_(width), values_(k_max * width, kInf), back_(k_max * width, 0) {}

  double& value(std::size_t k, std::size_t h) { return values_[(k - 1) * width_ + h]; }
  std::uint32_t& back(std::size_t k, std::size_t h) { return back_[(k - 1) * width_ + h]; }

  // Change-points of the stored optimum for (K, h), left to right.
  std::vector<std::size_t> chain(std::size_t k, std::size_t h) {
    std::vector<std::size_t> out(k - 1);
    for (std::size_t layer = k; layer > 1; --layer) {
      h = back(layer, h);
      out[layer - 2] = h;
    }
    return out;
  }

 private:
  std::size_t width_;
  std::vector<double> values_;
  std::vector<std::uint32_t> back_;
};

}  // namespace detail

// Optimal segmentations for K = 1..k_max. Ties go to the lexicographically
// smallest change-point vector among those whose every prefix is itself
// optimal.
inline std::vector<SolveEntry> solve(const CostMatrix& costs, std::size_t k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  const std::size_t last = costs.last_index();
  const std::size_t a = costs.interior_size();
  if (last > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("grid too large");
  }
  const std::size_t k_reach = std::min(k_max, a + 1);
  detail::DpTable table(k_reach, last + 1);

  for (std::size_t h = 1; h <= last; ++h) table.value(1, h) = costs.segment(0, h);

  for (std::size_t k = 2; k <= k_reach; ++k) {
    // Intermediate layers only feed interior endpoints; the last layer only
    // needs h = A + 1.
    const std::size_t h_begin = (k == k_reach) ? last : k;
    for (std::size_t h = h_begin; h <= last; ++h) {
      const auto column = costs.column(h);
      double best = kInf;
      std::size_t best_j = k - 1;
      bool first = true;
      for (std::size_t j = k - 1; j < h; ++j) {
        const double candidate = ext_add(table.value(k - 1, j), column[j]);
        if (first || candidate < best) {
          best = candidate;
          best_j = j;
          first = false;
        } else if (candidate == best && k > 2) {
          auto incumbent = table.chain(k - 1, best_j);
          incumbent.push_back(best_j);
          auto challenger = table.chain(k - 1, j);
          challenger.push_back(j);
          if (challenger < incumbent) best_j = j;
        }
      }
      table.value(k, h) = best;
      table.back(k, h) = static_cast<std::uint32_t>(best_j);
    }
  }

  std::vector<SolveEntry> out;
  out.reserve(k_max);
  for (std::size_t k = 1; k <= k_max; ++k) {
    SolveEntry entry;
    entry.k = k;
    if (k <= k_reach) {
      entry.feasible = true;
      entry.contrast = table.value(k, last);
      entry.change_indices = table.chain(k, last);
      if (entry.contrast == -kInf) {
        entry.warnings.push_back("optimal contrast is -inf: a segment of zero length holds events");
      } else if (entry.contrast == kInf) {
        entry.warnings.push_back("every segmentation with this K has infinite contrast");
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

inline std::vector<SolveEntry> solve(const CandidateGrid& grid, const ContrastSpec& spec,
                                     std::size_t k_max) {
  return solve(build_cost_matrix(grid, spec), k_max);
}

inline std::vector<SolveEntry> solve(const EventSeries& data, const ContrastSpec& spec,
                                     std::size_t k_max) {
  return solve(build_grid(data), spec, k_max);
}

inline std::vector<SolveEntry> solve(const MarkedEventSeries& data, const ContrastSpec& spec,
                                     std::size_t k_max) {
  return solve(build_grid(data), spec, k_max);
}

// Segmentation object for a solved entry; requires a finite or -inf optimum.
inline Segmentation to_segmentation(const SolveEntry& entry, const CandidateGrid& grid) {
  if (!entry.feasible) {
    throw std::invalid_argument("K = " + std::to_string(entry.k) + " is infeasible");
  }
  return Segmentation::on_grid(grid, entry.change_indices);
}

// binom(p, q) with binom(p, q) = 0 when q > p or either is negative.
inline std::uint64_t binomial(std::int64_t p, std::int64_t q) {
  if (p < 0 || q < 0 || q > p) return 0;
  q = std::min(q, p - q);
  unsigned __int128 result = 1;
  for (std::int64_t i = 1; i <= q; ++i) {
    result = result * static_cast<unsigned __int128>(p - q + i) / static_cast<unsigned __int128>(i);
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      throw std::overflow_error("binomial coefficient overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(result);
}

struct BruteForceResult {
  bool feasible = false;
  double contrast = kInf;
  std::vector<std::size_t> change_indices;
  std::uint64_t candidates = 0;
};

// Exhaustive search over all (K-1)-subsets of interior grid indices in
// lexicographic order, keeping the first minimizer.
inline BruteForceResult brute_force(const CandidateGrid& grid, const ContrastSpec& spec,
                                    std::size_t k, std::uint64_t limit = 1'000'000) {
  if (k < 1) throw std::invalid_argument("K must be at least 1");
  check_compatible(grid, spec);
  const std::size_t a = grid.interior_size();
  BruteForceResult result;
  if (k - 1 > a) return result;
  if (binomial(static_cast<std::int64_t>(a), static_cast<std::int64_t>(k - 1)) > limit) {
    throw std::invalid_argument("instance too large for exhaustive search");
  }
  const SegmentCoster coster(spec, grid.event_count());
  const std::size_t r = k - 1;
  std::vector<std::size_t> combo(r);
  for (std::size_t i = 0; i < r; ++i) combo[i] = i + 1;
  result.feasible = true;
  while (true) {
    const double value = chain_contrast(grid, coster, combo);
    if (result.candidates == 0 || value < result.contrast) {
      result.contrast = value;
      result.change_indices = combo;
    }
    ++result.candidates;
    // Next combination in lexicographic order.
    std::size_t i = r;
    while (i > 0 && combo[i - 1] == a - (r - i)) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < r; ++j) combo[j] = combo[j - 1] + 1;
  }
  return result;
}

inline std::uint64_t upsilon_cardinality(std::size_t n, std::size_t k) {
  if (k < 1) throw std::invalid_argument("K must be at least 1");
  return binomial(static_cast<std::int64_t>(n + k - 1), static_cast<std::int64_t>(k - 1));
}

inline std::uint64_t upsilon_star_cardinality(std::size_t n, std::size_t k) {
  if (k < 1) throw std::invalid_argument("K must be at least 1");
  // The closed form needs n >= 1; with no events only (0) and (0, 0) qualify.
  if (n == 0) return k <= 2 ? 1 : 0;
  std::uint64_t total = 0;
  const auto nn = static_cast<std::int64_t>(n);
  const auto kk = static_cast<std::int64_t>(k);
  for (std::int64_t h = 1; h <= kk; ++h) {
    total += binomial(nn - 1, h - 1) * binomial(h + 1, kk - h);
  }
  return total;
}

inline std::vector<std::vector<std::size_t>> enumerate_count_vectors(
    std::size_t n, std::size_t k, bool starred, std::uint64_t limit = 1'000'000) {
  if (upsilon_cardinality(n, k) > limit) {
    throw std::invalid_argument("too many count vectors to enumerate");
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current(k, 0);
  auto recurse = [&](auto& self, std::size_t pos, std::size_t remaining) -> void {
    if (pos + 1 == k) {
      current[pos] = remaining;
      if (!starred || in_upsilon_star(current)) out.push_back(current);
      return;
    }
    for (std::size_t v = 0; v <= remaining; ++v) {
      current[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  recurse(recurse, 0, n);
  return out;
}

}  // namespace ppseg
