#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "clvo/metrics.hpp"
#include "test_support.hpp"

namespace clvo {
namespace {

Trajectory shifted(const Trajectory& t, const Eigen::Vector3d& d) {
  std::vector<RigidPosed> poses;
  for (const auto& p : t.poses) poses.emplace_back(p.rotation(), p.translation() + d);
  return Trajectory(poses, t.sequence_id);
}

Trajectory scaled(const Trajectory& t, double s) {
  std::vector<RigidPosed> poses;
  for (const auto& p : t.poses) poses.emplace_back(p.rotation(), p.translation() * s);
  return Trajectory(poses, t.sequence_id);
}

Trajectory rigidly_moved(const Trajectory& t, const RigidPosed& m) {
  std::vector<RigidPosed> poses;
  for (const auto& p : t.poses) poses.push_back(compose(m, p));
  return Trajectory(poses, t.sequence_id);
}

double aligned_rmse(const Trajectory& est, const Trajectory& gt) { return ate(est, gt, true); }

// Area under s(t) by midpoint quadrature on a fine grid.
double auc_quadrature(const std::vector<double>& errors, double t_max, int n = 200000) {
  double area = 0.0;
  const double dt = t_max / n;
  for (int k = 0; k < n; ++k) {
    const double t = (k + 0.5) * dt;
    const double frac = static_cast<double>(std::count_if(errors.begin(), errors.end(),
                                                          [&](double e) { return e <= t; })) /
                        static_cast<double>(errors.size());
    area += frac * dt;
  }
  return area / t_max;
}

TEST(Umeyama, IdentityFit) {
  std::mt19937_64 rng(1);
  const auto gt = testing::random_walk(rng, 20);
  const auto tf = umeyama_align(gt, gt);
  EXPECT_NEAR(tf.scale, 1.0, 1e-9);
  EXPECT_NEAR(tf.rotation.angularDistance(Eigen::Quaterniond::Identity()), 0.0, 1e-9);
  EXPECT_LT(tf.translation.norm(), 1e-9);
}

TEST(Umeyama, DoubledEstimateGivesHalfScale) {
  std::mt19937_64 rng(2);
  auto gt = testing::random_walk(rng, 15);
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : gt.poses) centroid += p.translation();
  gt = shifted(gt, -centroid / static_cast<double>(gt.size()));
  const auto tf = umeyama_align(scaled(gt, 2.0), gt);
  EXPECT_NEAR(tf.scale, 0.5, 1e-12);
  EXPECT_NEAR(tf.rotation.angularDistance(Eigen::Quaterniond::Identity()), 0.0, 1e-9);
  EXPECT_LT(tf.translation.norm(), 1e-12);
}

TEST(Umeyama, RecoversKnownSimilarity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> scale_dist(0.2, 5.0);
  for (int i = 0; i < 200; ++i) {
    const auto gt = testing::random_walk(rng, 12);
    SimilarityTransform known{scale_dist(rng), testing::random_quat(rng), testing::random_vec(rng, 3.0)};
    const auto est = transformed(gt, known);
    const auto tf = umeyama_align(est, gt);
    const auto inv = known.inverse();
    EXPECT_NEAR(tf.scale, inv.scale, 1e-9);
    EXPECT_LT(aligned_rmse(est, gt), 1e-9);
    EXPECT_LT((tf.translation - inv.translation).norm(), 1e-8);
  }
}

TEST(Umeyama, Errors) {
  std::mt19937_64 rng(4);
  const auto gt = testing::random_walk(rng, 10);
  const auto short_est = testing::random_walk(rng, 9);
  EXPECT_THROW((void)umeyama_align(short_est, gt), Error);
  std::vector<RigidPosed> still(10, RigidPosed::identity());
  try {
    (void)umeyama_align(Trajectory(still), gt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateGeometry);
  }
}

TEST(Umeyama, SimilarityInverseRoundTrip) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    SimilarityTransform tf{std::exp(testing::random_vec(rng).x()), testing::random_quat(rng),
                           testing::random_vec(rng, 2.0)};
    const Eigen::Vector3d x = testing::random_vec(rng, 3.0);
    EXPECT_LT((tf.inverse().apply(tf.apply(x)) - x).norm(), 1e-9);
  }
}

TEST(Ate, AnalyticCases) {
  std::mt19937_64 rng(6);
  const auto gt = testing::random_walk(rng, 30);
  EXPECT_EQ(ate(gt, gt, false), 0.0);
  const auto moved = shifted(gt, Eigen::Vector3d(1, 0, 0));
  EXPECT_NEAR(ate(moved, gt, false), 1.0, 1e-12);
  EXPECT_NEAR(ate(moved, gt, true), 0.0, 1e-9);
  try {
    (void)ate(testing::random_walk(rng, 29), gt, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
}

TEST(Ate, AlignmentNeverHurtsAndIsRigidInvariant) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const auto gt = testing::random_walk(rng, 15);
    auto est = testing::random_walk(rng, 15);
    EXPECT_LE(ate(est, gt, true), ate(est, gt, false) + 1e-12);
    EXPECT_NEAR(ate(est, est, true), 0.0, 1e-12);
    EXPECT_EQ(ate(est, est, false), 0.0);
    const auto m = testing::random_pose(rng);
    EXPECT_NEAR(ate(rigidly_moved(est, m), rigidly_moved(gt, m), true), ate(est, gt, true), 1e-9);
  }
}

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.0, 0.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{1.0, 2.5, 7.0}), 0.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.5}, 1.0), 0.5);
  EXPECT_THROW((void)auc(std::vector<double>{}), Error);
  EXPECT_THROW((void)auc(std::vector<double>{-0.1}), Error);
}

TEST(Auc, MatchesQuadratureOfStepFunction) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> errors(37);
    for (auto& e : errors) e = u(rng);
    EXPECT_NEAR(auc(errors, 1.0), auc_quadrature(errors, 1.0), 1e-5);
  }
}

TEST(Auc, Monotone) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> errors(1 + trial % 20);
    for (auto& e : errors) e = u(rng);
    const double before = auc(errors);
    std::uniform_int_distribution<std::size_t> pick(0, errors.size() - 1);
    errors[pick(rng)] *= std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    EXPECT_GE(auc(errors), before - 1e-15);
  }
}

}  // namespace
}  // namespace clvo
