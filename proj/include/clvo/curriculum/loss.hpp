#pragma once

// Pose and flow supervision and their hierarchical weighted combination:
//
//   pose  = translation + w_r * rotation
//   total = w_f * s_f * flow + w_p * s_p * pose
//
// With all curriculum weights at 1 and (s_f, s_p) = (0.1, 10) this is the
// fixed DPVO objective total = 10 * pose + 0.1 * flow.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "clvo/errors.hpp"
#include "clvo/geometry.hpp"
#include "clvo/metrics.hpp"
#include "clvo/trajectory.hpp"

namespace clvo {

struct CurriculumWeights {
  double flow = 1.0;         // w_f
  double pose = 1.0;         // w_p
  double rotation = 1.0;     // w_r

  static CurriculumWeights uniform(double w) { return {w, w, w}; }
  bool operator==(const CurriculumWeights&) const = default;
};

struct BaseScales {
  double flow = 0.1;   // s_f
  double pose = 10.0;  // s_p
};

/// Unweighted component losses.
struct LossParts {
  double flow = 0.0;
  double translation = 0.0;
  double rotation = 0.0;
};

struct LossBreakdown {
  double flow = 0.0;
  double translation = 0.0;
  double rotation = 0.0;
  double total = 0.0;

  LossParts parts() const { return {flow, translation, rotation}; }
};

template <typename Scalar>
struct PoseLoss {
  Scalar translation{0};
  Scalar rotation{0};
  Scalar joint{0};  // sum of full twist norms, the unsplit form
};

namespace loss_detail {

// Euclidean norm whose derivative at the origin is taken as zero.
template <typename Derived>
typename Derived::Scalar safe_norm(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  using std::sqrt;
  const Scalar sq = v.squaredNorm();
  if (geometry_detail::value_of(sq) == 0.0) return Scalar(0);
  return sqrt(sq);
}

}  // namespace loss_detail

/// Sum over ordered pairs i != j of || Log[(G_i^-1 G_j)^-1 (T_i^-1 T_j)] ||,
/// split into the translational and rotational twist parts. Works on any
/// scalar type so the same code can be differentiated.
template <typename Scalar>
PoseLoss<Scalar> pairwise_pose_loss(std::span<const RigidPose<Scalar>> pred,
                                    std::span<const RigidPosed> gt) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kLengthMismatch, "predicted window has " + std::to_string(pred.size()) +
                                                " poses, ground truth has " + std::to_string(gt.size()));
  }
  if (pred.size() < 2) throw Error(ErrorCode::kLengthMismatch, "pose supervision needs at least 2 poses");
  PoseLoss<Scalar> out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (i == j) continue;
      const RigidPose<Scalar> gt_rel = relative_pose(gt[i], gt[j]).template cast<Scalar>();
      const RigidPose<Scalar> pred_rel = relative_pose(pred[i], pred[j]);
      const Twist<Scalar> err = se3_log(compose(inverse(gt_rel), pred_rel));
      out.translation += loss_detail::safe_norm(err.v);
      out.rotation += loss_detail::safe_norm(err.omega);
      out.joint += loss_detail::safe_norm(err.vector());
    }
  }
  return out;
}

/// Pose supervision between two trajectories, with optional Umeyama scale
/// alignment of the prediction onto the ground truth first.
inline PoseLoss<double> pose_supervision_loss(const Trajectory& pred, const Trajectory& gt, bool align) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kLengthMismatch, "predicted trajectory has " + std::to_string(pred.size()) +
                                                " poses, ground truth has " + std::to_string(gt.size()));
  }
  if (!align) return pairwise_pose_loss<double>(pred.poses, gt.poses);
  const Trajectory aligned = transformed(pred, umeyama_align(pred, gt));
  return pairwise_pose_loss<double>(aligned.poses, gt.poses);
}

/// Flow fields are keyed by (frame, offset) with offset in {-2, -1, +1, +2}.
struct FlowKey {
  int frame = 0;
  int offset = 0;
  auto operator<=>(const FlowKey&) const = default;
};

/// Dense grid of 2D flow vectors (pixels) with a validity mask.
struct FlowField {
  int rows = 0;
  int cols = 0;
  std::vector<Eigen::Vector2d> vectors;  // row-major, rows * cols
  std::vector<std::uint8_t> valid;       // same layout; nonzero = supervised

  FlowField() = default;
  FlowField(int r, int c) : rows(r), cols(c), vectors(static_cast<std::size_t>(r * c), Eigen::Vector2d::Zero()),
                            valid(static_cast<std::size_t>(r * c), 1) {}

  Eigen::Vector2d& at(int r, int c) { return vectors[static_cast<std::size_t>(r * cols + c)]; }
  const Eigen::Vector2d& at(int r, int c) const { return vectors[static_cast<std::size_t>(r * cols + c)]; }
};

using FlowSet = std::map<FlowKey, FlowField>;

inline bool is_supported_flow_offset(int offset) {
  return offset == -2 || offset == -1 || offset == 1 || offset == 2;
}

/// Mean over all valid vectors of |dx| + |dy| between predicted and
/// ground-truth fields. The ground-truth mask decides validity; the predicted
/// mask must agree with it.
inline double flow_supervision_loss(const FlowSet& pred, const FlowSet& gt) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kKeyMismatch, std::to_string(pred.size()) + " predicted fields vs " +
                                             std::to_string(gt.size()) + " ground-truth fields");
  }
  double sum = 0.0;
  std::size_t count = 0;
  auto p_it = pred.begin();
  for (auto g_it = gt.begin(); g_it != gt.end(); ++g_it, ++p_it) {
    const auto& [key, g] = *g_it;
    if (!(p_it->first == key) || !is_supported_flow_offset(key.offset)) {
      throw Error(ErrorCode::kKeyMismatch,
                  "flow key (" + std::to_string(key.frame) + ", " + std::to_string(key.offset) + ")");
    }
    const FlowField& p = p_it->second;
    if (p.rows != g.rows || p.cols != g.cols || p.vectors.size() != g.vectors.size() ||
        g.valid.size() != g.vectors.size() || p.valid != g.valid) {
      throw Error(ErrorCode::kShapeMismatch,
                  "flow field (" + std::to_string(key.frame) + ", " + std::to_string(key.offset) + ")");
    }
    for (std::size_t k = 0; k < g.vectors.size(); ++k) {
      if (!g.valid[k]) continue;
      sum += (p.vectors[k] - g.vectors[k]).cwiseAbs().sum();
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

inline LossBreakdown hierarchical_total_loss(const LossParts& parts, const CurriculumWeights& w,
                                             const BaseScales& s) {
  LossBreakdown out{parts.flow, parts.translation, parts.rotation, 0.0};
  const double pose = parts.translation + w.rotation * parts.rotation;
  out.total = w.flow * s.flow * parts.flow + w.pose * s.pose * pose;
  return out;
}

/// Fixed DPVO objective: 10 * (translation + rotation) + 0.1 * flow.
inline LossBreakdown baseline_total_loss(const LossParts& parts) {
  return hierarchical_total_loss(parts, CurriculumWeights{}, BaseScales{});
}

}  // namespace clvo
