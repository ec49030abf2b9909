#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "clvo/curriculum/schedulers.hpp"

namespace clvo {
namespace {

TEST(SelfPaced, ProgressExamples) {
  EXPECT_EQ(self_paced_progress(0.0, 0.1), 1.0);
  EXPECT_NEAR(self_paced_progress(10.0, 0.1), 0.36787944117144233, 1e-15);
  EXPECT_EQ(self_paced_progress(123.0, 0.0), 1.0);
  try {
    (void)self_paced_progress(-1.0, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeLoss);
  }
}

TEST(SelfPaced, WeightExamples) {
  const WeightBounds b;
  EXPECT_EQ(self_paced_weights(1.0, b), CurriculumWeights::uniform(1.0));
  EXPECT_EQ(self_paced_weights(0.0, b), CurriculumWeights::uniform(0.1));
  EXPECT_NEAR(self_paced_weights(0.5, b).flow, 0.55, 1e-15);
}

TEST(SelfPaced, ProgressStrictlyDecreasing) {
  for (double lambda = 0.05; lambda < 2.0; lambda += 0.15) {
    for (double l = 0.0; l < 20.0; l += 0.5) {
      EXPECT_GT(self_paced_progress(l, lambda), self_paced_progress(l + 0.25, lambda));
      if (l > 0.0) {
        EXPECT_GT(self_paced_progress(l, lambda), self_paced_progress(l, lambda + 0.05));
      }
    }
  }
}

TEST(SelfPaced, WeightsStayInBoundsAndHitFinalOnlyAtZeroLoss) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e(0.2);
  const WeightBounds b;
  for (int i = 0; i < 5000; ++i) {
    const double l = i == 0 ? 0.0 : e(rng);
    const double w = self_paced_weights(self_paced_progress(l, 0.1), b).pose;
    EXPECT_GE(w, b.initial);
    EXPECT_LE(w, b.final);
    EXPECT_EQ(w == b.final, l == 0.0);
  }
}

TEST(SelfPaced, SchedulerUsesPreviousTotal) {
  SelfPacedScheduler s(0.1, WeightBounds{});
  EXPECT_EQ(s.begin_step(0), CurriculumWeights::uniform(0.1));
  s.end_step(0, LossBreakdown{1, 1, 1, 10.0});
  const auto w = s.begin_step(1);
  EXPECT_NEAR(w.flow, 0.1 + 0.9 * std::exp(-1.0), 1e-15);
}

TEST(Staged, FreshStateAndPromotions) {
  PromotionRule rule;
  rule.patience = 2;
  StagedState s;
  EXPECT_EQ(staged_active_levels(s, rule), LevelSet(1));
  // Improving validations keep the stage.
  s = staged_observe_validation(s, rule, 10, 1.0);
  s = staged_observe_validation(s, rule, 20, 0.8);
  EXPECT_EQ(staged_active_levels(s, rule).highest(), 1);
  // Two stale validations promote.
  s = staged_observe_validation(s, rule, 30, 0.799);
  s = staged_observe_validation(s, rule, 40, 0.85);
  EXPECT_EQ(staged_active_levels(s, rule).levels(), (std::vector<int>{1, 2}));
  s = staged_observe_validation(s, rule, 50, 0.5);
  s = staged_observe_validation(s, rule, 60, 0.5);
  s = staged_observe_validation(s, rule, 70, 0.5);
  EXPECT_EQ(staged_active_levels(s, rule).levels(), (std::vector<int>{1, 2, 3}));
  for (int k = 0; k < 20; ++k) s = staged_observe_validation(s, rule, 80 + k, 0.5);
  EXPECT_EQ(staged_active_levels(s, rule).highest(), 3);
}

TEST(Staged, BudgetPromotes) {
  PromotionRule rule;
  rule.stage_max_steps = {100, 50};
  StagedScheduler sched(rule);
  int last = 1;
  std::vector<std::size_t> promotions;
  for (std::size_t step = 0; step < 400; ++step) {
    sched.begin_step(step);
    const int h = sched.active_levels().highest();
    EXPECT_GE(h, last);
    if (h != last) promotions.push_back(step);
    last = h;
  }
  EXPECT_EQ(promotions, (std::vector<std::size_t>{100, 150}));
}

TEST(Staged, NeverShrinksUnderRandomValidation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  PromotionRule rule;
  rule.patience = 1;
  rule.stage_max_steps = {300, 300};
  StagedScheduler sched(rule);
  int last = 1;
  for (std::size_t step = 0; step < 2000; ++step) {
    sched.begin_step(step);
    if (step % 25 == 24) sched.on_validation(step, u(rng), 0.5);
    EXPECT_GE(sched.active_levels().highest(), last);
    last = sched.active_levels().highest();
  }
  EXPECT_EQ(last, 3);
}

TEST(Staged, SampleFilter) {
  const std::vector<LevelEntry> manifest = {{"a", 1}, {"b", 3}, {"c", 2}, {"d", 1}, {"e", 2}};
  EXPECT_EQ(staged_sample_filter(manifest, LevelSet(1)), (std::vector<std::string>{"a", "d"}));
  EXPECT_EQ(staged_sample_filter(manifest, LevelSet(3)).size(), 5u);
  std::vector<std::string> expected;
  for (const auto& e : manifest) {
    if (std::set<int>{1, 2}.count(e.level)) expected.push_back(e.sequence_id);
  }
  EXPECT_EQ(staged_sample_filter(manifest, LevelSet(2)), expected);
  const std::vector<LevelEntry> bad = {{"x", 4}};
  try {
    (void)staged_sample_filter(bad, LevelSet(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownLevel);
  }
}

TEST(EarlyStopping, Examples) {
  std::vector<ValidationRecord> improving;
  for (int i = 0; i < 30; ++i) {
    improving.push_back({0.1 + 0.01 * i, 1.0});
    EXPECT_FALSE(early_stopping_check(improving, 3));
  }
  std::vector<ValidationRecord> flat(4, {0.5, 0.5});
  EXPECT_TRUE(early_stopping_check(flat, 3));
  EXPECT_FALSE(early_stopping_check(std::span(flat).first(3), 3));

  std::vector<ValidationRecord> ate_only;
  for (int i = 0; i < 30; ++i) {
    ate_only.push_back({0.5, 1.0 - 0.01 * i});
    EXPECT_FALSE(early_stopping_check(ate_only, 3));
  }
}

TEST(EarlyStopping, NeverStopsWhileAMetricStrictlyImproves) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ValidationRecord> h{{u(rng), u(rng)}};
    double best_auc = h[0].auc, best_ate = h[0].ate;
    for (int i = 0; i < 40; ++i) {
      ValidationRecord r{u(rng), u(rng)};
      if (i % 2 == 0) r.auc = best_auc + 1e-3;
      else r.ate = best_ate - 1e-3;
      best_auc = std::max(best_auc, r.auc);
      best_ate = std::min(best_ate, r.ate);
      h.push_back(r);
      EXPECT_FALSE(early_stopping_check(h, 1));
    }
  }
}

TEST(SchedulerMode, ParseRoundTrip) {
  for (auto m : {SchedulerMode::kBaseline, SchedulerMode::kStaged, SchedulerMode::kSelfPaced, SchedulerMode::kDdpg}) {
    EXPECT_EQ(parse_scheduler_mode(to_string(m)), m);
  }
  EXPECT_THROW((void)parse_scheduler_mode("nope"), Error);
}

}  // namespace
}  // namespace clvo
