#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "clvo/surrogate/trainer.hpp"
#include "test_support.hpp"

namespace clvo::surrogate {
namespace {

DatasetSpec small_spec() {
  DatasetSpec s;
  s.n_sequences = 30;
  s.sequence_length = 20;
  return s;
}

TrainConfig small_config(SchedulerMode mode) {
  TrainConfig c;
  c.seed = 11;
  c.dataset = small_spec();
  c.scheduler.mode = mode;
  c.budget = 60;
  c.val_every = 10;
  c.learning_rate = 0.002;
  return c;
}

std::string serialize(const SyntheticDataset& ds) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& s : ds.sequences) {
    os << s.id << ' ' << s.target << '\n';
    for (const auto& p : s.gt.poses) {
      os << p.timestamp().value_or(-1.0) << ' ' << p.translation().transpose() << ' ' << p.rotation().coeffs().transpose() << '\n';
    }
    for (const auto& f : s.features) os << f.transpose() << '\n';
  }
  for (const auto& sc : ds.manifest.scores) os << sc.sequence_id << ' ' << sc.normalized << ' ' << sc.level << '\n';
  return os.str();
}

TEST(SurrogateDataset, DeterministicUnderSeed) {
  EXPECT_EQ(serialize(generate_dataset(5, small_spec())), serialize(generate_dataset(5, small_spec())));
  EXPECT_NE(serialize(generate_dataset(5, small_spec())), serialize(generate_dataset(6, small_spec())));
}

TEST(SurrogateDataset, ZeroTargetsGiveStaticSequences) {
  DatasetSpec spec = small_spec();
  spec.difficulty_modes = {0.0};
  const auto ds = generate_dataset(2, spec);
  for (const auto& s : ds.sequences) {
    EXPECT_TRUE(motion_profile(s.gt).is_static());
  }
  for (const auto& sc : ds.manifest.scores) EXPECT_LT(sc.normalized, 0.1);
}

TEST(SurrogateDataset, ScoresLandNearTargets) {
  DatasetSpec spec;
  spec.difficulty_modes = {0.0, 0.1, 0.3, 0.45, 0.7, 0.9, 1.0};
  spec.n_sequences = 140;
  const auto ds = generate_dataset(9, spec);
  for (const auto& s : ds.sequences) {
    const double score = difficulty_score(motion_profile(s.gt), nominal_stats());
    EXPECT_NEAR(score, s.target, 0.1) << s.id;
  }
}

TEST(SurrogateDataset, TriModalSetSplitsIntoEqualTertiles) {
  const auto ds = generate_dataset(21, DatasetSpec{});
  std::map<int, int> sizes;
  for (const auto& sc : ds.manifest.scores) ++sizes[sc.level];
  for (int level = 1; level <= 3; ++level) EXPECT_NEAR(sizes[level], 100, 1);

  // Manifest is the difficulty pipeline's own output.
  std::vector<Trajectory> trajs;
  for (const auto& s : ds.sequences) trajs.push_back(s.gt);
  const auto oracle = score_dataset(trajs);
  ASSERT_EQ(oracle.scores.size(), ds.manifest.scores.size());
  for (std::size_t i = 0; i < oracle.scores.size(); ++i) {
    EXPECT_EQ(oracle.scores[i].normalized, ds.manifest.scores[i].normalized);
    EXPECT_EQ(oracle.scores[i].level, ds.manifest.scores[i].level);
  }
}

TEST(SurrogateDataset, ValidationSplitIsStratified) {
  const auto ds = generate_dataset(21, DatasetSpec{});
  EXPECT_EQ(ds.val.size(), 60u);
  EXPECT_EQ(ds.train.size(), 240u);
  std::map<int, int> per_level;
  for (std::size_t i : ds.val) ++per_level[ds.level_of(i)];
  for (int level = 1; level <= 3; ++level) EXPECT_NEAR(per_level[level], 20, 1);
}

TEST(SurrogateDataset, FlowMatchesPosesByConstruction) {
  const auto ds = generate_dataset(4, small_spec());
  const WindowRef w{3, 6};
  const auto& m = ds.sequences[3].motions;
  const std::vector<Vector6> steps(m.begin() + 6, m.begin() + 6 + kSteps);
  const auto composed = compose_motions<double>(steps);
  const FlowSet gt = window_flows(ds, w.sequence, w.start);
  EXPECT_EQ(gt.size(), 34u);
  const FlowSet pred = predicted_flows(ds.camera, composed, gt);
  for (const auto& [key, g] : gt) {
    for (std::size_t k = 0; k < g.vectors.size(); ++k) {
      EXPECT_LT((g.vectors[k] - pred.at(key).vectors[k]).norm(), 1e-9);
    }
  }
}

TEST(SurrogateModelLoss, GroundTruthMotionsGiveZeroLoss) {
  const auto ds = generate_dataset(4, small_spec());
  const WindowRef w{7, 2};
  const auto& m = ds.sequences[7].motions;
  const std::vector<Vector6> steps(m.begin() + 2, m.begin() + 2 + kSteps);
  const auto loss = window_motion_loss(ds, w, steps, CurriculumWeights{}, BaseScales{});
  EXPECT_NEAR(loss.breakdown.total, 0.0, 1e-12);
}

TEST(SurrogateModelLoss, GradientMatchesFiniteDifferences) {
  const auto ds = generate_dataset(4, small_spec());
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    auto model = SurrogateModel::random(4, rng);
    const std::vector<WindowRef> batch{{static_cast<std::size_t>(trial), 1}, {static_cast<std::size_t>(trial + 9), 7}};
    const CurriculumWeights w{u(rng), u(rng), u(rng)};
    const auto loss = model_loss(model, ds, batch, w, BaseScales{});
    const Eigen::VectorXd grad = loss.grad.flatten();
    Eigen::VectorXd x = model.flatten();
    const auto f = [&] {
      SurrogateModel m = model;
      m.unflatten(x);
      return model_loss(m, ds, batch, w, BaseScales{}).breakdown.total;
    };
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      const double fd = testing::central_difference(x[i], f, 1e-6);
      worst = std::max(worst, testing::relative_error(grad[i], fd, 1e-6));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(SurrogateModelLoss, DoublingFlowWeightDoublesFlowTerm) {
  const auto ds = generate_dataset(4, small_spec());
  std::mt19937_64 rng(3);
  const auto model = SurrogateModel::random(8, rng);
  const WindowRef w{2, 4};
  const CurriculumWeights a{0.3, 0.6, 0.8};
  CurriculumWeights b = a;
  b.flow *= 2.0;
  const auto la = model_loss(model, ds, w, a, BaseScales{});
  const auto lb = model_loss(model, ds, w, b, BaseScales{});
  EXPECT_EQ(la.breakdown.flow, lb.breakdown.flow);
  const double pose_term = a.pose * BaseScales{}.pose * (la.breakdown.translation + a.rotation * la.breakdown.rotation);
  EXPECT_NEAR(lb.breakdown.total - pose_term, 2.0 * (la.breakdown.total - pose_term), 1e-12);
}

TEST(SurrogateModelLoss, NonFiniteParametersRaise) {
  const auto ds = generate_dataset(4, small_spec());
  std::mt19937_64 rng(3);
  auto model = SurrogateModel::random(4, rng);
  model.b1[0] = std::nan("");
  try {
    model_loss(model, ds, WindowRef{0, 0}, CurriculumWeights{}, BaseScales{});
    FAIL() << "expected NonFiniteLoss";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteLoss);
  }
}

TEST(SurrogateTraining, BaselineMatchesReferenceLoop) {
  const TrainConfig cfg = small_config(SchedulerMode::kBaseline);
  const auto ds = generate_dataset(derive_seed(cfg.seed, kDatasetStream), cfg.dataset);
  const auto result = run_training(cfg, ds);
  ASSERT_EQ(result.records.size(), cfg.budget);

  std::mt19937_64 model_rng(derive_seed(cfg.seed, kModelStream));
  SurrogateModel model = SurrogateModel::random(cfg.hidden, model_rng);
  WindowSampler sampler(derive_seed(cfg.seed, kSamplingStream));
  SgdMomentum opt(model.size(), cfg.learning_rate, cfg.momentum);
  const auto eligible = ds.train;
  for (std::size_t step = 0; step < cfg.budget; ++step) {
    const auto windows = sampler.draw(ds, eligible, cfg.batch);
    const auto ml = model_loss(model, ds, windows, CurriculumWeights{}, cfg.scales);
    opt.set_learning_rate(learning_rate_at(cfg.learning_rate, cfg.lr_schedule, step, cfg.budget));
    opt.step(model, ml.grad);
    const auto& rec = result.records[step];
    EXPECT_EQ(rec.step, step);
    EXPECT_EQ(rec.loss.total, baseline_total_loss(ml.breakdown.parts()).total);
    EXPECT_EQ(rec.loss.total, ml.breakdown.total);
    EXPECT_EQ(rec.weights, CurriculumWeights{});
  }
  EXPECT_EQ(result.model.flatten(), model.flatten());
}

TEST(SurrogateTraining, SelfPacedWeightsFollowPreviousLoss) {
  TrainConfig cfg = small_config(SchedulerMode::kSelfPaced);
  const auto result = run_training(cfg);
  const auto& r = result.records;
  ASSERT_EQ(r.size(), cfg.budget);
  EXPECT_EQ(r[0].weights.pose, cfg.scheduler.bounds.initial);
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double expected = cfg.scheduler.bounds.initial + (cfg.scheduler.bounds.final - cfg.scheduler.bounds.initial) *
                                                               std::exp(-cfg.scheduler.lambda * r[i - 1].loss.total);
    EXPECT_EQ(r[i].weights.flow, expected);
    EXPECT_EQ(r[i].weights.pose, expected);
    EXPECT_EQ(r[i].weights.rotation, expected);
    if (i >= 2 && r[i - 1].loss.total <= r[i - 2].loss.total) {
      EXPECT_GE(r[i].weights.pose, r[i - 1].weights.pose);
    }
  }
}

TEST(SurrogateTraining, StagedLevelsWidenInOrder) {
  TrainConfig cfg = small_config(SchedulerMode::kStaged);
  cfg.scheduler.promotion.stage_max_steps = {20, 20};
  const auto result = run_training(cfg);
  std::vector<std::string> labels;
  for (const auto& rec : result.records) {
    const std::string l = rec.active_levels.label();
    if (labels.empty() || labels.back() != l) labels.push_back(l);
    EXPECT_EQ(rec.weights, CurriculumWeights{});
  }
  EXPECT_EQ(labels, (std::vector<std::string>{"1", "1+2", "1+2+3"}));
}

TEST(SurrogateTraining, StagedSamplesOnlyActiveLevels) {
  const auto ds = generate_dataset(4, small_spec());
  for (int highest = 1; highest <= 3; ++highest) {
    const auto eligible = eligible_sequences(ds, LevelSet(highest));
    EXPECT_FALSE(eligible.empty());
    for (std::size_t i : eligible) EXPECT_LE(ds.level_of(i), highest);
    WindowSampler sampler(1);
    for (const auto& w : sampler.draw(ds, eligible, 50)) {
      EXPECT_LE(ds.level_of(w.sequence), highest);
      EXPECT_LE(w.start + kWindow, ds.sequences[w.sequence].gt.size());
    }
  }
}

TEST(SurrogateTraining, ValidationMatchesOfflineMetrics) {
  TrainConfig cfg = small_config(SchedulerMode::kBaseline);
  const auto ds = generate_dataset(derive_seed(cfg.seed, kDatasetStream), cfg.dataset);
  const auto result = run_training(cfg, ds);
  ASSERT_TRUE(result.final_validation);
  std::vector<double> errors;
  for (std::size_t seq : ds.val) {
    errors.push_back(ate(predict_trajectory(result.model, ds, seq), ds.sequences[seq].gt, true));
  }
  double mean = 0.0;
  for (double e : errors) mean += e / static_cast<double>(errors.size());
  EXPECT_NEAR(*result.records.back().val_ate, mean, 1e-12);
  EXPECT_NEAR(*result.records.back().val_auc, auc(errors, cfg.auc_max_error), 1e-12);
}

TEST(SurrogateTraining, ValidationCadence) {
  TrainConfig cfg = small_config(SchedulerMode::kBaseline);
  cfg.budget = 35;
  const auto result = run_training(cfg);
  std::vector<std::size_t> validated;
  for (const auto& r : result.records) {
    if (r.val_ate) validated.push_back(r.step);
    EXPECT_EQ(r.val_ate.has_value(), r.val_auc.has_value());
  }
  EXPECT_EQ(validated, (std::vector<std::size_t>{9, 19, 29, 34}));
}

TEST(SurrogateTraining, DeterministicUnderSeed) {
  for (auto mode : {SchedulerMode::kSelfPaced, SchedulerMode::kDdpg}) {
    const TrainConfig cfg = small_config(mode);
    const auto a = run_training(cfg);
    const auto b = run_training(cfg);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      EXPECT_EQ(a.records[i].loss.total, b.records[i].loss.total);
      EXPECT_EQ(a.records[i].weights, b.records[i].weights);
    }
  }
}

TEST(SurrogateTraining, EarlyStoppingOnlyAfterStaleValidations) {
  TrainConfig cfg = small_config(SchedulerMode::kBaseline);
  cfg.budget = 400;
  cfg.val_every = 5;
  cfg.early_stopping_patience = 2;
  cfg.learning_rate = 1e-6;
  const auto result = run_training(cfg);
  std::vector<ValidationRecord> history;
  for (const auto& r : result.records) {
    if (r.val_ate) history.push_back({*r.val_auc, *r.val_ate});
  }
  ASSERT_GE(history.size(), 3u);
  for (std::size_t n = 1; n < history.size(); ++n) {
    EXPECT_FALSE(early_stopping_check(std::span(history.data(), n), cfg.early_stopping_patience));
  }
  if (result.stopped_early) {
    EXPECT_TRUE(early_stopping_check(history, cfg.early_stopping_patience));
    EXPECT_LT(result.records.size(), cfg.budget);
  }
}

TEST(SurrogateTraining, ConfigValidation) {
  TrainConfig cfg;
  cfg.budget = 0;
  EXPECT_THROW(run_training(cfg), Error);
  cfg = TrainConfig{};
  cfg.dataset.n_sequences = 2;
  EXPECT_THROW(run_training(cfg), Error);
}

}  // namespace
}  // namespace clvo::surrogate
