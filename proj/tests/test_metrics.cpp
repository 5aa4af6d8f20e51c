#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gsp/metrics.hpp"
#include "oracles.hpp"

namespace {

struct Sample {
  std::vector<double> scores;
  std::vector<bool> is_id;
};

// Random scores with both classes present; `levels` > 0 quantizes to force ties.
Sample random_sample(gsp::Rng& rng, std::size_t n, int levels) {
  Sample s;
  for (std::size_t i = 0; i < n; ++i) {
    const bool id = rng.uniform() < 0.5;
    double v = rng.normal() + (id ? 0.7 : 0.0);
    if (levels > 0) v = std::round(v * levels) / levels;
    s.scores.push_back(v);
    s.is_id.push_back(id);
  }
  s.is_id[0] = true;
  s.is_id[1] = false;
  return s;
}

}  // namespace

TEST(Auroc, Examples) {
  EXPECT_EQ(gsp::auroc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, {true, true, false, false}), 1.0);
  EXPECT_EQ(gsp::auroc(std::vector<double>{3, 3, 3, 3}, {true, false, true, false}), 0.5);
  EXPECT_EQ(gsp::auroc(std::vector<double>{0.1, 0.9}, {true, false}), 0.0);
}

TEST(Auroc, EqualsPairwiseOracleExactly) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    gsp::Rng rng(seed, 20);
    const auto s = random_sample(rng, 2 + rng.below(60), static_cast<int>(seed % 4));
    EXPECT_EQ(gsp::auroc(s.scores, s.is_id), oracle::auroc_pairwise(s.scores, s.is_id));
  }
}

TEST(Auroc, Properties) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    gsp::Rng rng(seed, 21);
    const auto s = random_sample(rng, 40, static_cast<int>(seed % 3));
    const double a = gsp::auroc(s.scores, s.is_id);

    std::vector<double> transformed, negated;
    for (double v : s.scores) {
      transformed.push_back(std::exp(v) * 3.0 + 1.0);
      negated.push_back(-v);
    }
    EXPECT_EQ(gsp::auroc(transformed, s.is_id), a);
    EXPECT_EQ(gsp::auroc(negated, s.is_id), oracle::auroc_pairwise(negated, s.is_id));
    if (seed % 3 == 0) EXPECT_NEAR(gsp::auroc(negated, s.is_id), 1.0 - a, 1e-15);

    std::vector<std::size_t> perm(s.scores.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i-- > 1;) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<double> ps;
    std::vector<bool> pf;
    for (auto i : perm) {
      ps.push_back(s.scores[i]);
      pf.push_back(s.is_id[i]);
    }
    EXPECT_EQ(gsp::auroc(ps, pf), a);
    EXPECT_EQ(gsp::fpr_at_tpr(ps, pf), gsp::fpr_at_tpr(s.scores, s.is_id));
  }
}

TEST(Fpr95, Examples) {
  EXPECT_EQ(gsp::fpr_at_tpr(std::vector<double>{0.9, 0.8, 0.2, 0.1}, {true, true, false, false}), 0.0);
  EXPECT_EQ(gsp::fpr_at_tpr(std::vector<double>{1, 1, 1, 1}, {true, false, true, false}), 1.0);
  // 20 ID scores 1..20: TPR >= 0.95 first reached at threshold 2
  std::vector<double> s;
  std::vector<bool> f;
  for (int i = 1; i <= 20; ++i) {
    s.push_back(i);
    f.push_back(true);
  }
  s.insert(s.end(), {1.5, 2.0, 0.5, 30.0});
  f.insert(f.end(), {false, false, false, false});
  EXPECT_EQ(gsp::fpr_at_tpr(s, f), 0.5);
}

TEST(Fpr95, EqualsThresholdSweep) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    gsp::Rng rng(seed, 22);
    const auto s = random_sample(rng, 2 + rng.below(100), static_cast<int>(seed % 4));
    EXPECT_EQ(gsp::fpr_at_tpr(s.scores, s.is_id), oracle::fpr_sweep(s.scores, s.is_id));
    EXPECT_EQ(gsp::fpr_at_tpr(s.scores, s.is_id, 0.5), oracle::fpr_sweep(s.scores, s.is_id, 0.5));
  }
}

TEST(Fpr95, NonIncreasingUnderIdShift) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    gsp::Rng rng(seed, 23);
    auto s = random_sample(rng, 80, 0);
    double prev = gsp::fpr_at_tpr(s.scores, s.is_id);
    for (int step = 0; step < 10; ++step) {
      for (std::size_t i = 0; i < s.scores.size(); ++i) {
        if (s.is_id[i]) s.scores[i] += 0.25;
      }
      const double now = gsp::fpr_at_tpr(s.scores, s.is_id);
      EXPECT_LE(now, prev);
      prev = now;
    }
  }
}

TEST(Evaluate, ReportsAndErrors) {
  const auto r = gsp::evaluate(std::vector<double>{0.9, 0.8, 0.2}, {true, true, false}, "gsp");
  EXPECT_EQ(r.auroc, 1.0);
  EXPECT_EQ(r.fpr95, 0.0);
  EXPECT_EQ(r.n_id, 2u);
  EXPECT_EQ(r.n_ood, 1u);
  EXPECT_EQ(r.method, "gsp");
  const auto inv = gsp::evaluate(std::vector<double>{0.1, 0.2, 0.9}, {true, true, false}, "x");
  EXPECT_EQ(inv.auroc, 0.0);

  EXPECT_THROW(gsp::auroc(std::vector<double>{1, 2}, {true}), gsp::InvalidArgument);
  EXPECT_THROW(gsp::auroc(std::vector<double>{1, 2}, {true, true}), gsp::InvalidArgument);
  EXPECT_THROW(gsp::fpr_at_tpr(std::vector<double>{1, 2}, {false, false}), gsp::InvalidArgument);
}
