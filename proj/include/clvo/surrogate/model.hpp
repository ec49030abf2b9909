#pragma once

// Surrogate regressor and its window loss.
//
// Each step's observation goes through a shared trunk and a bounded motion
// head:
//
//   h   = tanh(W1 x + b1)
//   m   = envelope * tanh(Wm h + bm)        (rotation vector, translation)
//
// Predicted window poses are the running composition of the step motions;
// predicted flow fields are those poses pushed through the dataset camera, so
// a model whose motions equal the ground truth reproduces every target.
// Derivatives of the loss with respect to the 6 * kSteps motion outputs come
// from forward-mode automatic differentiation; the trunk and head are
// back-propagated by hand.

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/AutoDiff>

#include "clvo/curriculum/loss.hpp"
#include "clvo/errors.hpp"
#include "clvo/geometry.hpp"
#include "clvo/surrogate/dataset.hpp"

namespace clvo::surrogate {

inline constexpr int kMotionOutputs = 6 * kSteps;
using MotionDual = Eigen::AutoDiffScalar<Eigen::Matrix<double, kMotionOutputs, 1>>;

struct SurrogateModel {
  Eigen::MatrixXd w1;  // hidden x 6
  Eigen::VectorXd b1;
  Eigen::MatrixXd wm;  // 6 x hidden
  Eigen::VectorXd bm;

  static SurrogateModel zeros(int hidden) {
    return {Eigen::MatrixXd::Zero(hidden, 6), Eigen::VectorXd::Zero(hidden), Eigen::MatrixXd::Zero(6, hidden),
            Eigen::VectorXd::Zero(6)};
  }

  template <typename Rng>
  static SurrogateModel random(int hidden, Rng& rng) {
    if (hidden < 1) throw Error(ErrorCode::kConfig, "surrogate hidden width must be positive");
    SurrogateModel m = zeros(hidden);
    std::uniform_real_distribution<double> in(-1.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0));
    std::uniform_real_distribution<double> out(-0.5 / std::sqrt(hidden), 0.5 / std::sqrt(hidden));
    for (Eigen::Index k = 0; k < m.w1.size(); ++k) m.w1.data()[k] = in(rng);
    for (Eigen::Index k = 0; k < m.wm.size(); ++k) m.wm.data()[k] = out(rng);
    return m;
  }

  int hidden() const { return static_cast<int>(w1.rows()); }
  SurrogateModel zeros_like() const { return zeros(hidden()); }

  std::size_t size() const { return static_cast<std::size_t>(w1.size() + b1.size() + wm.size() + bm.size()); }

  /// Parameters in the order W1, b1, Wm, bm (column-major).
  Eigen::VectorXd flatten() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
    out << w1.reshaped(), b1, wm.reshaped(), bm;
    return out;
  }

  void unflatten(const Eigen::VectorXd& flat) {
    if (flat.size() != static_cast<Eigen::Index>(size())) {
      throw Error(ErrorCode::kShapeMismatch, "flat parameter vector has the wrong length");
    }
    Eigen::Index i = 0;
    w1.reshaped() = flat.segment(i, w1.size()), i += w1.size();
    b1 = flat.segment(i, b1.size()), i += b1.size();
    wm.reshaped() = flat.segment(i, wm.size()), i += wm.size();
    bm = flat.segment(i, bm.size());
  }

  bool all_finite() const { return w1.allFinite() && b1.allFinite() && wm.allFinite() && bm.allFinite(); }
};

struct StepCache {
  Vector6 x;
  Eigen::VectorXd h;
  Vector6 head;  // tanh(Wm h + bm)
  Vector6 motion;
};

inline StepCache forward_step(const SurrogateModel& model, const Vector6& x) {
  StepCache c;
  c.x = x;
  c.h = (model.w1 * x + model.b1).array().tanh().matrix();
  c.head = (model.wm * c.h + model.bm).array().tanh().matrix();
  c.motion = c.head.cwiseProduct(motion_envelope());
  return c;
}

inline Vector6 predict_motion(const SurrogateModel& model, const Vector6& x) { return forward_step(model, x).motion; }

/// Adds the parameter gradient for d(loss)/d(motion) of one step into `grad`.
inline void backward_step(const SurrogateModel& model, const StepCache& c, const Vector6& d_motion,
                          SurrogateModel* grad) {
  const Vector6 d_pre_m = d_motion.cwiseProduct(motion_envelope()).cwiseProduct(
      (1.0 - c.head.array().square()).matrix());
  grad->wm += d_pre_m * c.h.transpose();
  grad->bm += d_pre_m;
  const Eigen::VectorXd d_h = model.wm.transpose() * d_pre_m;
  const Eigen::VectorXd d_pre_1 = d_h.cwiseProduct((1.0 - c.h.array().square()).matrix());
  grad->w1 += d_pre_1 * c.x.transpose();
  grad->b1 += d_pre_1;
}

/// Start index of a training window inside a sequence.
struct WindowRef {
  std::size_t sequence = 0;
  std::size_t start = 0;
};

/// Ground-truth poses of a window, expressed relative to its first pose.
inline std::vector<RigidPosed> window_gt_poses(const SyntheticDataset& ds, const WindowRef& w) {
  const auto& poses = ds.sequences.at(w.sequence).gt.poses;
  if (w.start + kWindow > poses.size()) throw Error(ErrorCode::kShapeMismatch, "window runs past the sequence end");
  std::vector<RigidPosed> out;
  out.reserve(kWindow);
  for (int k = 0; k < kWindow; ++k) out.push_back(relative_pose(poses[w.start], poses[w.start + k]));
  return out;
}

/// Window poses from step motions: T_0 = I, T_{k+1} = T_k * Exp(m_k).
template <typename Scalar>
std::vector<RigidPose<Scalar>> compose_motions(std::span<const Eigen::Matrix<Scalar, 6, 1>> motions) {
  std::vector<RigidPose<Scalar>> out{RigidPose<Scalar>::identity()};
  out.reserve(motions.size() + 1);
  for (const auto& m : motions) {
    const Vec3<Scalar> omega = m.template head<3>();
    const Vec3<Scalar> t = m.template tail<3>();
    out.push_back(compose(out.back(), RigidPose<Scalar>(so3_exp<Scalar>(omega), t)));
  }
  return out;
}

/// Predicted flow set for the window: the camera applied to predicted poses,
/// restricted to the ground-truth validity mask.
inline FlowSet predicted_flows(const FlowCamera& cam, std::span<const RigidPosed> poses, const FlowSet& gt) {
  FlowSet out;
  for (const auto& [key, g] : gt) {
    FlowField f(g.rows, g.cols);
    f.valid = g.valid;
    const RigidPosed a_in_b = relative_pose(poses[static_cast<std::size_t>(key.frame + key.offset)],
                                            poses[static_cast<std::size_t>(key.frame)]);
    for (int k = 0; k < g.rows * g.cols; ++k) {
      if (!g.valid[static_cast<std::size_t>(k)]) continue;
      Eigen::Vector2d v;
      if (cam.point_flow(a_in_b, k, &v)) f.vectors[static_cast<std::size_t>(k)] = v;
    }
    out.emplace(key, std::move(f));
  }
  return out;
}

/// Number of ordered pose pairs per window; pose terms are averaged over them.
inline constexpr double kPosePairs = static_cast<double>(kWindow * (kWindow - 1));

struct MotionLoss {
  LossBreakdown breakdown;
  Eigen::Matrix<double, kMotionOutputs, 1> d_motion;  // d(total)/d(step motions), step-major
};

/// Loss of one window given its predicted step motions. The pose parts are
/// the pairwise supervision averaged over pairs; the flow part is the mean L1
/// flow error. Both are evaluated through the curriculum loss functions.
inline MotionLoss window_motion_loss(const SyntheticDataset& ds, const WindowRef& w,
                                     std::span<const Vector6> motions, const CurriculumWeights& weights,
                                     const BaseScales& scales) {
  if (motions.size() != static_cast<std::size_t>(kSteps)) {
    throw Error(ErrorCode::kShapeMismatch, "window needs " + std::to_string(kSteps) + " step motions");
  }
  using Vec6D = Eigen::Matrix<MotionDual, 6, 1>;
  std::vector<Vec6D> dual(kSteps);
  for (int k = 0; k < kSteps; ++k) {
    for (int a = 0; a < 6; ++a) {
      dual[static_cast<std::size_t>(k)][a] = MotionDual(motions[static_cast<std::size_t>(k)][a], kMotionOutputs, 6 * k + a);
    }
  }
  const auto pred = compose_motions<MotionDual>(dual);
  const auto gt = window_gt_poses(ds, w);
  const PoseLoss<MotionDual> pose = pairwise_pose_loss<MotionDual>(pred, gt);

  // Flow: value through the curriculum loss, derivative by the same L1 sum on duals.
  const FlowSet gt_flow = window_flows(ds, w.sequence, w.start);
  std::vector<RigidPosed> pred_values;
  pred_values.reserve(pred.size());
  for (const auto& p : pred) {
    pred_values.push_back(RigidPosed(
        Eigen::Quaterniond(p.rotation().w().value(), p.rotation().x().value(), p.rotation().y().value(),
                           p.rotation().z().value()),
        Eigen::Vector3d(p.translation().x().value(), p.translation().y().value(), p.translation().z().value())));
  }
  const double flow_value = flow_supervision_loss(predicted_flows(ds.camera, pred_values, gt_flow), gt_flow);
  Eigen::Matrix<double, kMotionOutputs, 1> d_flow = Eigen::Matrix<double, kMotionOutputs, 1>::Zero();
  std::size_t count = 0;
  for (const auto& [key, g] : gt_flow) {
    const RigidPose<MotionDual> a_in_b = relative_pose(pred[static_cast<std::size_t>(key.frame + key.offset)],
                                                       pred[static_cast<std::size_t>(key.frame)]);
    for (int k = 0; k < g.rows * g.cols; ++k) {
      if (!g.valid[static_cast<std::size_t>(k)]) continue;
      ++count;
      Eigen::Matrix<MotionDual, 2, 1> v;
      if (!ds.camera.point_flow(a_in_b, k, &v)) continue;
      const Eigen::Vector2d& target = g.vectors[static_cast<std::size_t>(k)];
      for (int c = 0; c < 2; ++c) {
        const double r = v[c].value() - target[c];
        if (r > 0.0) d_flow += v[c].derivatives();
        if (r < 0.0) d_flow -= v[c].derivatives();
      }
    }
  }
  if (count > 0) d_flow /= static_cast<double>(count);

  const LossParts parts{flow_value, pose.translation.value() / kPosePairs, pose.rotation.value() / kPosePairs};
  MotionLoss out;
  out.breakdown = hierarchical_total_loss(parts, weights, scales);
  if (!std::isfinite(out.breakdown.total)) throw Error(ErrorCode::kNonFiniteLoss, "non-finite window loss");
  out.d_motion = weights.flow * scales.flow * d_flow +
                 (weights.pose * scales.pose / kPosePairs) *
                     (pose.translation.derivatives() + weights.rotation * pose.rotation.derivatives());
  return out;
}

struct ModelLoss {
  LossBreakdown breakdown;
  SurrogateModel grad;
};

/// Mean loss over a batch of windows and its exact parameter gradient.
inline ModelLoss model_loss(const SurrogateModel& model, const SyntheticDataset& ds, std::span<const WindowRef> batch,
                            const CurriculumWeights& weights, const BaseScales& scales) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty training batch");
  ModelLoss out{{}, model.zeros_like()};
  LossParts mean;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& w : batch) {
    const auto& features = ds.sequences.at(w.sequence).features;
    std::vector<StepCache> caches;
    std::vector<Vector6> motions;
    caches.reserve(kSteps);
    for (int k = 0; k < kSteps; ++k) {
      caches.push_back(forward_step(model, features.at(w.start + static_cast<std::size_t>(k))));
      motions.push_back(caches.back().motion);
    }
    const MotionLoss ml = window_motion_loss(ds, w, motions, weights, scales);
    mean.flow += inv * ml.breakdown.flow;
    mean.translation += inv * ml.breakdown.translation;
    mean.rotation += inv * ml.breakdown.rotation;
    for (int k = 0; k < kSteps; ++k) {
      backward_step(model, caches[static_cast<std::size_t>(k)], inv * ml.d_motion.segment<6>(6 * k), &out.grad);
    }
  }
  out.breakdown = hierarchical_total_loss(mean, weights, scales);
  if (!std::isfinite(out.breakdown.total)) throw Error(ErrorCode::kNonFiniteLoss, "non-finite batch loss");
  return out;
}

inline ModelLoss model_loss(const SurrogateModel& model, const SyntheticDataset& ds, const WindowRef& window,
                            const CurriculumWeights& weights, const BaseScales& scales) {
  return model_loss(model, ds, std::span<const WindowRef>(&window, 1), weights, scales);
}

/// Heavy-ball SGD on the flattened parameters.
class SgdMomentum {
 public:
  SgdMomentum() = default;
  SgdMomentum(std::size_t n, double lr, double momentum)
      : lr_(lr), momentum_(momentum), velocity_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

  void step(SurrogateModel& model, const SurrogateModel& grad) {
    velocity_ = momentum_ * velocity_ - lr_ * grad.flatten();
    model.unflatten(model.flatten() + velocity_);
  }

 private:
  double lr_ = 0.01;
  double momentum_ = 0.9;
  Eigen::VectorXd velocity_;
};

/// Full predicted trajectory of a sequence: composed step predictions starting
/// at the ground-truth first pose, with ground-truth timestamps.
inline Trajectory predict_trajectory(const SurrogateModel& model, const SyntheticDataset& ds, std::size_t seq) {
  const auto& s = ds.sequences.at(seq);
  std::vector<RigidPosed> poses{s.gt.poses.front()};
  for (std::size_t k = 0; k < s.features.size(); ++k) {
    poses.push_back(compose(poses.back(), motion_pose(predict_motion(model, s.features[k])))
                        .with_timestamp(s.gt.poses[k + 1].timestamp()));
  }
  return Trajectory(std::move(poses), s.id);
}

}  // namespace clvo::surrogate
