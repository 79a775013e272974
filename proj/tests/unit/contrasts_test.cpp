#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "ppseg/contrasts.hpp"
#include "ppseg/random.hpp"
#include "test_support.hpp"

namespace ppseg {
namespace {

using testing::kAllKinds;
using testing::spec_of;

const double kLog2 = std::log(2.0);

// Reference values computed with mpmath at 40 digits.
TEST(LogGamma, ReferenceValues) {
  const std::pair<double, double> refs[] = {
      {1e-3, 6.9071788853838536825},     {0.01, 4.5994798780420217225},
      {0.1, 2.2527126517342059599},      {0.5, 0.57236494292470008707},
      {1.0, 0.0},                        {1.5, -0.12078223763524522235},
      {2.0, 0.0},                        {2.5, 0.28468287047291915963},
      {3.0, 0.69314718055994530942},     {5.0, 3.1780538303479456196},
      {6.9, 6.3927444564055952253},      {7.0, 6.5792512120101009951},
      {10.0, 12.801827480081469611},     {12.5, 18.734347511936445702},
      {33.3, 82.603723581654952928},     {100.0, 359.13420536957539878},
      {1000.0, 5905.2204232091812118},   {12345.678, 103959.91990554606092},
      {1e6, 12815504.56914761166},       {1e7, 151180949.36947391394},
  };
  for (const auto& [x, expected] : refs) {
    EXPECT_NEAR(log_gamma(x), expected, 1e-9 * std::max(1.0, std::abs(expected))) << "x=" << x;
  }
}

TEST(ExtendedReal, InfinitiesAbsorbAndPlusInfinityWins) {
  EXPECT_EQ(ext_add(kInf, -kInf), kInf);
  EXPECT_EQ(ext_add(-kInf, kInf), kInf);
  EXPECT_EQ(ext_add(-kInf, 3.0), -kInf);
  EXPECT_EQ(ext_add(1.0, 2.0), 3.0);
}

TEST(PoissonCost, Examples) {
  EXPECT_NEAR(poisson_cost(2, 1.0), 0.61370563888010938117, 1e-15);
  EXPECT_EQ(poisson_cost(0, 0.5), 0.0);
  EXPECT_EQ(poisson_cost(0, 0.0), 0.0);
  EXPECT_EQ(poisson_cost(1, 0.0), -kInf);
  EXPECT_EQ(poisson_cost(1, 0.0, true), kInf);
  EXPECT_THROW(poisson_cost(1, -0.1), std::invalid_argument);
}

TEST(PgCost, Examples) {
  EXPECT_EQ(pg_cost(0, 0.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(pg_cost(1, 1.0, 1.0, 1.0), 1.3862943611198906188, 1e-14);
  EXPECT_NEAR(pg_cost(1, 0.0, 1.0, 0.01), -4.605170185988091368, 1e-13);
  EXPECT_NEAR(pg_cost(0, 0.5, 1.0, 1.0), 0.40546510810816438198, 1e-15);
  EXPECT_NEAR(pg_cost(7, 0.25, 0.5, 2.0), -1.2265962624915397931, 1e-13);
  EXPECT_THROW(pg_cost(1, 1.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(pg_cost(1, 1.0, 1.0, -1.0), std::invalid_argument);
}

TEST(MpCost, Examples) {
  EXPECT_NEAR(mp_cost(1, 1.0, 1.0), 2.0, 1e-15);
  EXPECT_EQ(mp_cost(0, 0.3, 0.0), 0.0);
  // 2 (-log(2 / 0.5) - log(2 / 4) + 2) = 2 (2 - log 2)
  EXPECT_NEAR(mp_cost(2, 0.5, 4.0), 2.6137056388801093812, 1e-14);
  EXPECT_EQ(mp_cost(1, 0.0, 1.0), -kInf);
  EXPECT_EQ(mp_cost(1, 1.0, 0.0), -kInf);
  EXPECT_EQ(mp_cost(1, 1.0, 0.0, true), kInf);
}

TEST(MpgegCost, Examples) {
  EXPECT_NEAR(mpgeg_cost(1, 1.0, 1.0, 1, 1, 1, 1), 2.7725887222397812377, 1e-14);
  EXPECT_EQ(mpgeg_cost(0, 0.0, 0.0, 1, 1, 1, 1), 0.0);
  EXPECT_NEAR(mpgeg_cost(1, 0.0, 0.0, 1, 1, 1, 1), 0.0, 1e-15);
  EXPECT_NEAR(mpgeg_cost(5, 0.3, 12.5, 1.0, 0.01, 2.01, 10.1), 3.4054864894718025263, 1e-12);
  EXPECT_THROW(mpgeg_cost(1, 1.0, 1.0, 1, 1, 0, 1), std::invalid_argument);
}

TEST(ContrastSpec, Validation) {
  ContrastSpec s;
  s.kind = ContrastKind::marked_pgeg;
  s.a_rho = 2.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.a_rho = 2.01;
  EXPECT_NO_THROW(s.validate());
  s.penalty = LengthPenalty{[](double x) { return x * x; }, 0.0};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.penalty = LengthPenalty{[](double x) { return std::sqrt(x); }, 0.5};
  EXPECT_NO_THROW(s.validate());
}

TEST(ContrastSpec, ZeroLengthDefaults) {
  EXPECT_TRUE(spec_of(ContrastKind::poisson).forbids_zero_length());
  EXPECT_TRUE(spec_of(ContrastKind::marked_poisson).forbids_zero_length());
  EXPECT_FALSE(spec_of(ContrastKind::poisson_gamma).forbids_zero_length());
  EXPECT_FALSE(spec_of(ContrastKind::marked_pgeg).forbids_zero_length());
}

TEST(Contrast, Examples) {
  const EventSeries two({0.25, 0.75});
  const auto grid = build_grid(two);
  const auto poisson = spec_of(ContrastKind::poisson);
  EXPECT_NEAR(contrast(Segmentation(grid), two, poisson), 2.0 * (1.0 - kLog2), 1e-15);
  const std::vector<double> half{0.5};
  EXPECT_NEAR(contrast_at(grid, poisson, half), 2.0 * (1.0 - kLog2), 1e-15);
}

TEST(Contrast, MarkedContrastNeedsMarks) {
  const EventSeries plain({0.3});
  EXPECT_THROW(contrast(Segmentation(build_grid(plain)), plain, spec_of(ContrastKind::marked_pgeg)),
               std::invalid_argument);
}

// Tabulated coster equals the free cost functions bit for bit.
TEST(SegmentCoster, MatchesFreeFunctions) {
  Rng rng = make_rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ContrastSpec pg = spec_of(ContrastKind::poisson_gamma, 0.7, 0.05);
  const ContrastSpec mg = spec_of(ContrastKind::marked_pgeg, 0.7, 0.05);
  const SegmentCoster cpg(pg, 40), cmg(mg, 40);
  for (int rep = 0; rep < 500; ++rep) {
    const SegmentStats s{std::uniform_int_distribution<std::size_t>(0, 40)(rng), u(rng),
                         10.0 * u(rng)};
    if (is_empty_segment(s)) continue;
    EXPECT_EQ(cpg(s), pg_cost(s.count, s.length, pg.a, pg.b));
    EXPECT_EQ(cmg(s), mpgeg_cost(s.count, s.length, s.mark_sum, mg.a, mg.b, mg.a_rho, mg.b_rho));
  }
}

// Assumption 1: the contrast is the sum of its segment costs.
TEST(Contrast, SegmentAdditivity) {
  Rng rng = make_rng(19);
  for (ContrastKind kind : kAllKinds) {
    for (int rep = 0; rep < 50; ++rep) {
      const auto data = testing::random_marked(12, rng);
      const auto grid = build_grid(data);
      auto spec = spec_of(kind, 1.0, 1.0 / 12.0);
      if (rep % 2 == 0) spec.penalty = LengthPenalty{[](double x) { return std::log1p(x); }, 0.3};
      std::vector<std::size_t> idx;
      for (std::size_t p = 1; p <= grid.interior_size(); ++p) {
        if (std::bernoulli_distribution(0.2)(rng)) idx.push_back(p);
      }
      const auto seg = Segmentation::on_grid(grid, idx);
      double expected = 0.0;
      for (const auto& s : segment_table(seg, grid)) {
        double c = 0.0;
        switch (kind) {
          case ContrastKind::poisson: c = poisson_cost(s.count, s.length, true); break;
          case ContrastKind::poisson_gamma: c = pg_cost(s.count, s.length, spec.a, spec.b); break;
          case ContrastKind::marked_poisson: c = mp_cost(s.count, s.length, s.mark_sum, true); break;
          case ContrastKind::marked_pgeg:
            c = mpgeg_cost(s.count, s.length, s.mark_sum, spec.a, spec.b, spec.a_rho, spec.b_rho);
            break;
        }
        if (spec.penalty) c = ext_add(c, std::log1p(s.length) + 0.3);
        expected = ext_add(expected, c);
      }
      EXPECT_EQ(contrast(seg, data, spec), expected);
    }
  }
}

// Assumption 2: every cost is concave in the segment length.
TEST(Contrast, ConcaveInLength) {
  const double h = 1e-2;
  for (std::size_t nu = 0; nu <= 10; ++nu) {
    for (double s_marks : {0.5, 3.0, 20.0}) {
      for (int i = 1; i + 2 <= 100; ++i) {
        const double x = i * h;
        auto second = [&](auto&& cost) { return cost(x) - 2.0 * cost(x + h) + cost(x + 2 * h); };
        EXPECT_LE(second([&](double t) { return poisson_cost(nu, t); }), 1e-8);
        EXPECT_LE(second([&](double t) { return pg_cost(nu, t, 1.0, 0.01); }), 1e-8);
        EXPECT_LE(second([&](double t) { return mp_cost(nu, t, s_marks); }), 1e-8);
        EXPECT_LE(second([&](double t) { return mpgeg_cost(nu, t, s_marks, 1, 0.01, 2.01, 1); }),
                  1e-8);
      }
    }
  }
}

// Log-sum inequality.
TEST(PoissonCost, Superadditive) {
  Rng rng = make_rng(23);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::uniform_int_distribution<std::size_t> count(1, 50);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n1 = count(rng), n2 = count(rng);
    const double l1 = u(rng), l2 = u(rng);
    const double joint = poisson_cost(n1 + n2, l1 + l2);
    EXPECT_GE(joint, poisson_cost(n1, l1) + poisson_cost(n2, l2) - 1e-12 * std::abs(joint));
  }
}

TEST(Estimators, Examples) {
  EXPECT_DOUBLE_EQ(posterior_mean_lambda(3, 0.5, 1.0, 0.5), 4.0);
  EXPECT_DOUBLE_EQ(posterior_mean_lambda(0, 0.0, 2.0, 0.5), 4.0);
  EXPECT_NEAR(posterior_mean_lambda(100, 0.5, 1.0, 0.01), 101.0 / 0.51, 1e-12);
  EXPECT_DOUBLE_EQ(posterior_mean_rho(1, 1.0, 1.0, 1.0), 1.0);
  EXPECT_NEAR(posterior_mean_rho(0, 0.0, 2.01, 1.01), 2.01 / 1.01, 1e-15);
  EXPECT_NEAR(posterior_mean_rho(5, 50.0, 2.01, 10.1), 7.01 / 60.1, 1e-15);
  EXPECT_DOUBLE_EQ(mle_lambda(2, 0.5), 4.0);
  EXPECT_EQ(mle_lambda(0, 0.3), 0.0);
  EXPECT_EQ(mle_lambda(0, 0.0), 0.0);
  EXPECT_EQ(mle_lambda(1, 0.0), kInf);
  EXPECT_EQ(mle_rho(1, 0.0), kInf);
  EXPECT_THROW(posterior_mean_lambda(1, 1.0, 0.0, 1.0), std::invalid_argument);
}

TEST(Estimators, PosteriorMeanApproachesMle) {
  Rng rng = make_rng(29);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const std::size_t n = 50;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t nu = std::uniform_int_distribution<std::size_t>(0, n)(rng);
    const double len = u(rng);
    const double mle = mle_lambda(nu, len);
    double previous = kInf;
    for (double a : {1e-3, 1e-6}) {
      const double gap = std::abs(posterior_mean_lambda(nu, len, a, a / n) - mle);
      EXPECT_LE(gap, 1e3 * a * std::max(1.0, mle));
      EXPECT_LE(gap, previous);
      previous = gap;
    }
  }
}

TEST(Loglik, Examples) {
  const std::vector<std::size_t> c1{2};
  const std::vector<double> l1{1.0}, r1{2.0};
  EXPECT_NEAR(poisson_loglik(c1, l1, r1), 2.0 * kLog2 - 2.0, 1e-15);
  EXPECT_NEAR(poisson_loglik(c1, l1, r1), -poisson_cost(2, 1.0), 1e-15);
  const std::vector<std::size_t> c0{0};
  const std::vector<double> one{1.0};
  EXPECT_EQ(poisson_loglik(c0, one, one), -1.0);
  const std::vector<std::size_t> c2{1, 1};
  const std::vector<double> l2{0.5, 0.5}, r2{2.0, 2.0};
  EXPECT_NEAR(poisson_loglik(c2, l2, r2), 2.0 * kLog2 - 2.0, 1e-15);
  const std::vector<double> zero{0.0};
  EXPECT_EQ(poisson_loglik(c1, l1, zero), -kInf);
  EXPECT_THROW(poisson_loglik(c2, l1, r1), std::invalid_argument);

  EXPECT_NEAR(marked_loglik(std::vector<std::size_t>{1}, one, one, one, one), -2.0, 1e-15);
  EXPECT_NEAR(marked_loglik(c0, one, std::vector<double>{0.0}, one, std::vector<double>{5.0}),
              -1.0, 1e-15);
  EXPECT_NEAR(marked_loglik(c1, std::vector<double>{0.5}, std::vector<double>{4.0},
                            std::vector<double>{4.0}, std::vector<double>{0.5}),
              2.0 * kLog2 - 4.0, 1e-14);
}

// -contrast equals the log-likelihood at the per-segment MLEs.
TEST(Loglik, ConsistentWithLikelihoodContrasts) {
  Rng rng = make_rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const auto data = testing::random_marked(15, rng);
    const auto grid = build_grid(data);
    std::vector<std::size_t> idx;
    for (std::size_t p = 1; p <= grid.interior_size(); ++p) {
      if (std::bernoulli_distribution(0.15)(rng)) idx.push_back(p);
    }
    const auto seg = Segmentation::on_grid(grid, idx);
    std::vector<std::size_t> counts;
    std::vector<double> lengths, sums, lam, rho;
    for (const auto& s : segment_table(seg, grid)) {
      counts.push_back(s.count);
      lengths.push_back(s.length);
      sums.push_back(s.mark_sum);
      lam.push_back(mle_lambda(s.count, s.length));
      rho.push_back(mle_rho(s.count, s.mark_sum));
    }
    const double cp = contrast(seg, data, spec_of(ContrastKind::poisson));
    const double cm = contrast(seg, data, spec_of(ContrastKind::marked_poisson));
    if (!std::isfinite(cp)) continue;
    EXPECT_NEAR(-cp, poisson_loglik(counts, lengths, lam), 1e-12 * std::max(1.0, std::abs(cp)));
    EXPECT_NEAR(-cm, marked_loglik(counts, lengths, sums, lam, rho),
                1e-12 * std::max(1.0, std::abs(cm)));
  }
}

TEST(Hyperparameters, DefaultRule) {
  std::vector<double> t;
  for (int i = 1; i <= 100; ++i) t.push_back(i / 101.0);
  const auto h = default_hyperparams(EventSeries(t));
  EXPECT_EQ(h.a, 1.0);
  EXPECT_DOUBLE_EQ(h.b, 0.01);
  EXPECT_EQ(default_hyperparams(EventSeries({0.5})).b, 1.0);
  EXPECT_THROW(default_hyperparams(EventSeries{}), std::invalid_argument);
  const MarkedEventSeries m(EventSeries({0.2, 0.4}), {5.0, 15.0});
  const auto hm = default_hyperparams(m);
  EXPECT_DOUBLE_EQ(*hm.a_rho, 2.01);
  EXPECT_DOUBLE_EQ(*hm.b_rho, 10.1);
  EXPECT_DOUBLE_EQ(hm.b, 0.5);
}

}  // namespace
}  // namespace ppseg
