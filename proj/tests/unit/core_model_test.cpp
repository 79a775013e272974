#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ppseg/core_model.hpp"
#include "ppseg/random.hpp"
#include "test_support.hpp"

namespace ppseg {
namespace {

TEST(EventSeries, RejectsTimesOnOrOutsideTheUnitInterval) {
  EXPECT_THROW(EventSeries({0.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(EventSeries({0.5, 1.0}), std::invalid_argument);
  EXPECT_THROW(EventSeries({0.6, 0.5}), std::invalid_argument);
  EXPECT_NO_THROW(EventSeries({0.5, 0.6}));
}

TEST(EventSeries, BoundaryEventAsksToWidenTheWindow) {
  try {
    EventSeries::from_original(std::vector<double>{2.0, 3.0}, Window{2.0, 4.0});
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("widen"), std::string::npos);
  }
  EXPECT_THROW(EventSeries::from_original(std::vector<double>{5.0}, Window{2.0, 4.0}),
               std::invalid_argument);
}

TEST(EventSeries, FlagsTies) {
  EXPECT_TRUE(EventSeries({0.3, 0.3}).has_ties());
  EXPECT_FALSE(EventSeries({0.3, 0.4}).has_ties());
}

TEST(EventSeries, NormalizationRoundTrip) {
  Rng rng = make_rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int rep = 0; rep < 100; ++rep) {
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    if (hi - lo < 1e-3) continue;
    const Window w{lo, hi};
    std::uniform_real_distribution<double> inside(lo + (hi - lo) * 1e-6, hi - (hi - lo) * 1e-6);
    std::vector<double> t;
    for (int i = 0; i < 20; ++i) t.push_back(inside(rng));
    const auto series = EventSeries::from_original(t, w);
    std::sort(t.begin(), t.end());
    const auto back = series.original_times();
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_NEAR(back[i], t[i], 1e-12 * std::max({1.0, std::abs(t[i]), hi - lo}));
    }
  }
}

TEST(MarkedEventSeries, MarksTravelWithTheirEvents) {
  const std::vector<double> t{3.0, 1.0, 2.0};
  const std::vector<double> x{30.0, 10.0, 20.0};
  const auto m = MarkedEventSeries::from_original(t, x, Window{0.0, 4.0});
  EXPECT_EQ(std::vector<double>(m.marks().begin(), m.marks().end()),
            (std::vector<double>{10.0, 20.0, 30.0}));
  EXPECT_DOUBLE_EQ(m.mean_mark(), 20.0);
  EXPECT_THROW(MarkedEventSeries(EventSeries({0.5}), {0.0}), std::invalid_argument);
  EXPECT_THROW(MarkedEventSeries(EventSeries({0.5}), {1.0, 2.0}), std::invalid_argument);
}

TEST(CandidateGrid, TwoEvents) {
  const auto grid = build_grid(EventSeries({0.2, 0.5}));
  const std::vector<GridPoint> expected{{0, GridSide::boundary, 0.0}, {1, GridSide::before, 0.2},
                                        {2, GridSide::at, 0.2},       {3, GridSide::before, 0.5},
                                        {4, GridSide::at, 0.5},       {5, GridSide::boundary, 1.0}};
  EXPECT_EQ(grid.points(), expected);
  EXPECT_EQ(grid.interior_size(), 4u);
}

TEST(CandidateGrid, EmptySeries) {
  const auto grid = build_grid(EventSeries{});
  const std::vector<GridPoint> expected{{0, GridSide::boundary, 0.0}, {1, GridSide::boundary, 1.0}};
  EXPECT_EQ(grid.points(), expected);
  EXPECT_EQ(grid.interior_size(), 0u);
}

TEST(CandidateGrid, TiesPropagate) {
  const auto grid = build_grid(EventSeries({0.3, 0.3}));
  for (std::size_t p = 1; p <= 4; ++p) EXPECT_EQ(grid.value(p), 0.3);
  EXPECT_THROW(grid.value(6), std::out_of_range);
}

TEST(CandidateGrid, InteriorSizeIsTwiceTheEventCount) {
  Rng rng = make_rng(3);
  for (std::size_t n = 0; n < 40; ++n) {
    EXPECT_EQ(build_grid(EventSeries(testing::random_times(n, rng, true))).interior_size(), 2 * n);
  }
}

TEST(SegmentStats, Examples) {
  const auto grid = build_grid(EventSeries({0.2, 0.5}));
  auto s = segment_stats(grid, 1, 4);
  EXPECT_EQ(s.count, 2u);
  EXPECT_DOUBLE_EQ(s.length, 0.3);
  s = segment_stats(grid, 0, 1);
  EXPECT_EQ(s.count, 0u);
  EXPECT_DOUBLE_EQ(s.length, 0.2);
  s = segment_stats(grid, 3, 4);
  EXPECT_EQ(s.count, 1u);
  EXPECT_EQ(s.length, 0.0);
  EXPECT_THROW(segment_stats(grid, 2, 2), std::invalid_argument);
  EXPECT_THROW(segment_stats(grid, 0, 6), std::out_of_range);
}

TEST(SegmentStats, MarkSums) {
  const MarkedEventSeries m(EventSeries({0.2, 0.5, 0.7}), {1.0, 2.0, 4.0});
  const auto grid = build_grid(m);
  EXPECT_EQ(segment_stats(grid, 1, 4).mark_sum, 3.0);
  EXPECT_EQ(segment_stats(grid, 2, 7).mark_sum, 6.0);
  EXPECT_EQ(segment_stats(grid, 3, 5).mark_sum, 2.0);
}

// Counting by index arithmetic agrees with scanning the events, where an
// event equal to a "before" endpoint lies to its right and an event equal
// to an "at" endpoint lies to its left.
TEST(SegmentStats, IndexArithmeticMatchesScan) {
  Rng rng = make_rng(5);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 50)(rng);
    const auto times = testing::random_times(n, rng, rep % 2 == 0);
    const auto grid = build_grid(EventSeries(times));
    auto left_of = [&](std::size_t p, std::size_t i) {
      // is event i (0-based) in (0, value(p)]?
      if (p == 0) return false;
      if (p == grid.last_index()) return true;
      const std::size_t m = (p + 1) / 2 - 1;  // event owning grid point p
      if (times[i] < times[m]) return true;
      if (times[i] > times[m]) return false;
      // equal value: order among tied events decides
      return grid.side(p) == GridSide::at ? i <= m : i < m;
    };
    for (std::size_t lo = 0; lo < grid.last_index(); ++lo) {
      for (std::size_t hi = lo + 1; hi <= grid.last_index(); ++hi) {
        std::size_t scanned = 0;
        for (std::size_t i = 0; i < n; ++i) scanned += left_of(hi, i) && !left_of(lo, i);
        ASSERT_EQ(segment_stats(grid, lo, hi).count, scanned) << lo << ' ' << hi;
      }
    }
  }
}

TEST(Segmentation, CountVectorExamples) {
  const auto g2 = build_grid(EventSeries({0.2, 0.5}));
  const std::vector<std::size_t> at_first{2};
  EXPECT_EQ(count_vector(Segmentation::on_grid(g2, at_first), g2),
            (std::vector<std::size_t>{1, 1}));
  const auto g4 = build_grid(EventSeries({0.1, 0.3, 0.6, 0.8}));
  const std::vector<std::size_t> two{4, 6};
  EXPECT_EQ(count_vector(Segmentation::on_grid(g4, two), g4),
            (std::vector<std::size_t>{2, 1, 1}));
  EXPECT_EQ(count_vector(Segmentation(g4), g4), (std::vector<std::size_t>{4}));
}

TEST(Segmentation, RejectsInvalidIndices) {
  const auto g = build_grid(EventSeries({0.2, 0.5}));
  const std::vector<std::size_t> boundary{5}, unsorted{3, 2}, repeated{2, 2};
  EXPECT_THROW(Segmentation::on_grid(g, boundary), std::invalid_argument);
  EXPECT_THROW(Segmentation::on_grid(g, unsorted), std::invalid_argument);
  EXPECT_THROW(Segmentation::on_grid(g, repeated), std::invalid_argument);
  // (0.3, 0.3-] between tied events holds nothing and has no length.
  const auto tied = build_grid(EventSeries({0.3, 0.3}));
  const std::vector<std::size_t> empty_segment{2, 3};
  EXPECT_THROW(Segmentation::on_grid(tied, empty_segment), std::invalid_argument);
}

// Every valid grid segmentation sums to n and its counts lie in the
// restricted space.
TEST(Segmentation, CountsSumToNAndLieInRestrictedSpace) {
  Rng rng = make_rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    const auto grid = build_grid(EventSeries(testing::random_times(n, rng, rep % 3 == 0)));
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    std::vector<std::size_t> all(grid.interior_size());
    std::iota(all.begin(), all.end(), std::size_t{1});
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<std::size_t> pick(all.begin(), all.begin() + std::min(k - 1, all.size()));
    std::sort(pick.begin(), pick.end());
    Segmentation seg(grid);
    try {
      seg = Segmentation::on_grid(grid, pick);
    } catch (const std::invalid_argument&) {
      continue;  // drew a segment between tied events
    }
    const auto nu = count_vector(seg, grid);
    EXPECT_EQ(std::accumulate(nu.begin(), nu.end(), std::size_t{0}), n);
    EXPECT_TRUE(in_upsilon_star(nu));
  }
}

TEST(PiecewiseIntensity, CumulativeAndLookup) {
  const PiecewiseIntensity f({0.0, 0.25, 1.0}, {4.0, 2.0});
  EXPECT_DOUBLE_EQ(f.cumulative(0.25), 1.0);
  EXPECT_DOUBLE_EQ(f.cumulative(0.5), 1.5);
  EXPECT_DOUBLE_EQ(f.total(), 2.5);
  EXPECT_EQ(f.segment_of(0.25), 0u);
  EXPECT_EQ(f.segment_of(0.2500001), 1u);
  EXPECT_EQ(f.rate_at(0.9), 2.0);
  EXPECT_THROW(PiecewiseIntensity({0.0, 0.5}, {1.0}), std::invalid_argument);
  EXPECT_THROW(PiecewiseIntensity({0.0, 1.0}, {-1.0}), std::invalid_argument);
  EXPECT_THROW(PiecewiseIntensity({0.0, 0.5, 0.5, 1.0}, {1.0, 1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(PiecewiseIntensity({0.0, 1.0}, {1.0}, std::vector<double>{0.0}),
               std::invalid_argument);
}

}  // namespace
}  // namespace ppseg
