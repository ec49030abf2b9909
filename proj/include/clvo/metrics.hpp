#pragma once

// Trajectory evaluation: Umeyama similarity alignment, ATE and AUC.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "clvo/errors.hpp"
#include "clvo/geometry.hpp"
#include "clvo/trajectory.hpp"

namespace clvo {

/// x -> scale * R x + t. Maps estimate coordinates into ground-truth coordinates.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return scale * (rotation * x) + translation;
  }

  SimilarityTransform inverse() const {
    SimilarityTransform inv;
    inv.scale = 1.0 / scale;
    inv.rotation = rotation.conjugate();
    inv.translation = -(inv.scale * (inv.rotation * translation));
    return inv;
  }

  /// Moves a whole pose: rotation is pre-multiplied, translation mapped as a point.
  RigidPosed apply(const RigidPosed& pose) const {
    return RigidPosed(rotation * pose.rotation(), apply(pose.translation()), pose.timestamp());
  }
};

namespace metrics_detail {

inline void require_same_length(const Trajectory& est, const Trajectory& gt, std::size_t min_len) {
  if (est.size() != gt.size()) {
    throw Error(ErrorCode::kLengthMismatch, "estimate has " + std::to_string(est.size()) +
                                                " poses, ground truth has " + std::to_string(gt.size()));
  }
  if (est.size() < min_len) {
    throw Error(ErrorCode::kLengthMismatch,
                "need at least " + std::to_string(min_len) + " poses, got " + std::to_string(est.size()));
  }
}

inline Eigen::Matrix3Xd positions(const Trajectory& traj) {
  Eigen::Matrix3Xd out(3, static_cast<Eigen::Index>(traj.size()));
  for (std::size_t i = 0; i < traj.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = traj[i].translation();
  return out;
}

}  // namespace metrics_detail

/// Closed-form least-squares similarity transform taking the translations of
/// `est` onto those of `gt` (Umeyama 1991). Rotations do not enter the fit.
inline SimilarityTransform umeyama_align(const Trajectory& est, const Trajectory& gt) {
  metrics_detail::require_same_length(est, gt, 3);
  const Eigen::Matrix3Xd x = metrics_detail::positions(est);
  const Eigen::Matrix3Xd y = metrics_detail::positions(gt);
  const double n = static_cast<double>(x.cols());

  const Eigen::Vector3d mu_x = x.rowwise().mean();
  const Eigen::Vector3d mu_y = y.rowwise().mean();
  const Eigen::Matrix3Xd xc = x.colwise() - mu_x;
  const Eigen::Matrix3Xd yc = y.colwise() - mu_y;

  const double var_x = xc.squaredNorm() / n;
  if (!(var_x > 1e-300)) {
    throw Error(ErrorCode::kDegenerateGeometry, "estimate translations have zero variance");
  }
  if (!(yc.squaredNorm() / n > 1e-300)) {
    throw Error(ErrorCode::kDegenerateGeometry, "ground-truth translations are all coincident");
  }

  const Eigen::Matrix3d cov = yc * xc.transpose() / n;
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2, 2) = -1.0;

  const Eigen::Matrix3d r = svd.matrixU() * s * svd.matrixV().transpose();
  SimilarityTransform out;
  out.rotation = Eigen::Quaterniond(r).normalized();
  out.scale = (svd.singularValues().asDiagonal() * s).trace() / var_x;
  out.translation = mu_y - out.scale * (r * mu_x);
  return out;
}

/// Applies `tf` to every pose of `traj`.
inline Trajectory transformed(const Trajectory& traj, const SimilarityTransform& tf) {
  Trajectory out;
  out.sequence_id = traj.sequence_id;
  out.poses.reserve(traj.size());
  for (const auto& p : traj.poses) out.poses.push_back(tf.apply(p));
  return out;
}

/// Per-pose translation residuals, optionally after Umeyama alignment of est onto gt.
inline std::vector<double> translation_residuals(const Trajectory& est, const Trajectory& gt, bool align) {
  metrics_detail::require_same_length(est, gt, align ? 3 : 2);
  SimilarityTransform tf;
  if (align) tf = umeyama_align(est, gt);
  std::vector<double> out(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    out[i] = (tf.apply(est[i].translation()) - gt[i].translation()).norm();
  }
  return out;
}

/// Absolute trajectory error: RMSE of translation residuals, in meters.
inline double ate(const Trajectory& est, const Trajectory& gt, bool align) {
  const auto residuals = translation_residuals(est, gt, align);
  double sum_sq = 0.0;
  for (double r : residuals) sum_sq += r * r;
  return std::sqrt(sum_sq / static_cast<double>(residuals.size()));
}

/// Normalized area under the success-rate curve s(t) = #{e <= t} / n on
/// [0, t_max]. Each error contributes (t_max - e)_+ to the integral, so the
/// step function integrates exactly without sampling.
inline double auc(std::span<const double> errors, double t_max = 1.0) {
  if (errors.empty()) throw Error(ErrorCode::kEmptyInput, "auc of an empty error list");
  if (!(t_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "auc window must be positive");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  double area = 0.0;
  for (double e : sorted) {
    if (e < 0.0 || std::isnan(e)) throw Error(ErrorCode::kInvalidArgument, "negative or NaN error in auc input");
    if (e >= t_max) break;
    area += t_max - e;
  }
  return area / (static_cast<double>(sorted.size()) * t_max);
}

}  // namespace clvo
