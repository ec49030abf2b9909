#pragma once

// SE(3) / SO(3) primitives on unit quaternions.
//
// Everything is templated on the scalar so the same code runs on double and
// on forward-mode dual numbers (the surrogate trainer differentiates the pose
// loss through it). Use the `RigidPosed` / `Twistd` aliases for plain doubles.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "clvo/errors.hpp"

namespace clvo {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

namespace geometry_detail {

// Below this rotation angle exp/log fall back to second-order series.
inline constexpr double kSmallAngle = 1e-8;
// Between kSmallAngle and this angle the closed-form coefficients lose digits
// to cancellation, so longer series are used instead.
inline constexpr double kSeriesAngle = 1e-2;

// Plain value of a scalar; dual-number types expose it through value().
template <typename Scalar>
double value_of(const Scalar& s) {
  if constexpr (std::is_arithmetic_v<Scalar>) {
    return static_cast<double>(s);
  } else {
    return value_of(s.value());
  }
}

template <typename Scalar>
Mat3<Scalar> hat(const Vec3<Scalar>& w) {
  Mat3<Scalar> m;
  m << Scalar(0), -w.z(), w.y(),
       w.z(), Scalar(0), -w.x(),
       -w.y(), w.x(), Scalar(0);
  return m;
}

// Coefficients of the left Jacobian V = I + b*W + c*W^2 and of its inverse
// V^-1 = I - W/2 + d*W^2, as functions of theta^2.
template <typename Scalar>
struct JacobianCoeffs {
  Scalar b, c, d;
};

template <typename Scalar>
JacobianCoeffs<Scalar> jacobian_coeffs(const Scalar& theta_sq) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  if (theta_sq < Scalar(kSmallAngle * kSmallAngle)) {
    return {Scalar(0.5), Scalar(1.0 / 6.0), Scalar(1.0 / 12.0)};
  }
  if (theta_sq < Scalar(kSeriesAngle * kSeriesAngle)) {
    const Scalar t2 = theta_sq;
    const Scalar t4 = t2 * t2;
    const Scalar t6 = t4 * t2;
    return {Scalar(0.5) - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0,
            Scalar(1.0 / 6.0) - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0,
            Scalar(1.0 / 12.0) + t2 / 720.0 + t4 / 30240.0 + t6 / 1209600.0};
  }
  const Scalar theta = sqrt(theta_sq);
  const Scalar s = sin(theta);
  const Scalar half_s = sin(theta / 2.0);
  const Scalar one_minus_cos = 2.0 * half_s * half_s;
  const Scalar b = one_minus_cos / theta_sq;
  const Scalar c = (theta - s) / (theta_sq * theta);
  const Scalar d = (Scalar(1) - theta * s / (2.0 * one_minus_cos)) / theta_sq;
  return {b, c, d};
}

template <typename Scalar>
Eigen::Quaternion<Scalar> canonical(Eigen::Quaternion<Scalar> q) {
  q.normalize();
  if (q.w() < Scalar(0)) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace geometry_detail

/// Rigid-body motion: unit quaternion rotation plus translation in meters.
///
/// The quaternion is renormalized and put into the w >= 0 hemisphere on every
/// construction. The optional timestamp is carried for I/O and evaluation but
/// group operations ignore it and return poses without one.
template <typename Scalar>
class RigidPose {
 public:
  using Quat = Eigen::Quaternion<Scalar>;

  RigidPose() : rotation_(Quat::Identity()), translation_(Vec3<Scalar>::Zero()) {}

  RigidPose(const Quat& rotation, const Vec3<Scalar>& translation,
            std::optional<double> timestamp = std::nullopt)
      : rotation_(geometry_detail::canonical(rotation)),
        translation_(translation),
        timestamp_(timestamp) {}

  static RigidPose identity() { return RigidPose(); }

  const Quat& rotation() const { return rotation_; }
  const Vec3<Scalar>& translation() const { return translation_; }
  std::optional<double> timestamp() const { return timestamp_; }

  Mat3<Scalar> rotation_matrix() const { return rotation_.toRotationMatrix(); }
  Vec3<Scalar> rotate(const Vec3<Scalar>& x) const { return rotation_ * x; }
  Vec3<Scalar> transform(const Vec3<Scalar>& x) const { return rotation_ * x + translation_; }

  RigidPose with_timestamp(std::optional<double> ts) const {
    RigidPose out = *this;
    out.timestamp_ = ts;
    return out;
  }

  template <typename Other>
  RigidPose<Other> cast() const {
    return RigidPose<Other>(rotation_.template cast<Other>(),
                            translation_.template cast<Other>(), timestamp_);
  }

 private:
  Quat rotation_;
  Vec3<Scalar> translation_;
  std::optional<double> timestamp_;
};

/// Element of se(3): rotational part `omega` (radians), translational part `v`.
template <typename Scalar>
struct Twist {
  Vec3<Scalar> omega = Vec3<Scalar>::Zero();
  Vec3<Scalar> v = Vec3<Scalar>::Zero();

  Eigen::Matrix<Scalar, 6, 1> vector() const {
    Eigen::Matrix<Scalar, 6, 1> out;
    out << omega, v;
    return out;
  }
};

using RigidPosed = RigidPose<double>;
using Twistd = Twist<double>;

template <typename Scalar>
RigidPose<Scalar> compose(const RigidPose<Scalar>& a, const RigidPose<Scalar>& b) {
  return RigidPose<Scalar>(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

template <typename Scalar>
RigidPose<Scalar> operator*(const RigidPose<Scalar>& a, const RigidPose<Scalar>& b) {
  return compose(a, b);
}

template <typename Scalar>
RigidPose<Scalar> inverse(const RigidPose<Scalar>& a) {
  const auto q_inv = a.rotation().conjugate();
  return RigidPose<Scalar>(q_inv, -(q_inv * a.translation()));
}

/// inverse(a) * b: the motion taking frame a to frame b, expressed in a.
template <typename Scalar>
RigidPose<Scalar> relative_pose(const RigidPose<Scalar>& a, const RigidPose<Scalar>& b) {
  return compose(inverse(a), b);
}

/// Rotation angle in [0, pi].
template <typename Scalar>
Scalar rotation_angle(const Eigen::Quaternion<Scalar>& q) {
  using std::abs;
  using std::atan2;
  return Scalar(2) * atan2(q.vec().norm(), abs(q.w()));
}

template <typename Scalar>
Eigen::Quaternion<Scalar> so3_exp(const Vec3<Scalar>& omega) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Scalar theta_sq = omega.squaredNorm();
  Eigen::Quaternion<Scalar> q;
  if (theta_sq < Scalar(geometry_detail::kSmallAngle * geometry_detail::kSmallAngle)) {
    q.w() = Scalar(1) - theta_sq / 8.0;
    q.vec() = omega * (Scalar(0.5) - theta_sq / 48.0);
  } else {
    const Scalar theta = sqrt(theta_sq);
    q.w() = cos(theta / 2.0);
    q.vec() = omega * (sin(theta / 2.0) / theta);
  }
  return geometry_detail::canonical(q);
}

/// Rotation vector (axis * angle) of a unit quaternion, angle in [0, pi].
template <typename Scalar>
Vec3<Scalar> so3_log(const Eigen::Quaternion<Scalar>& q_in) {
  using std::atan2;
  using std::sqrt;
  const auto q = geometry_detail::canonical(q_in);
  const Scalar n_sq = q.vec().squaredNorm();
  // theta ~ 2n, so the small-angle switch sits at n = kSmallAngle / 2.
  const double n_small = geometry_detail::kSmallAngle / 2.0;
  if (n_sq < Scalar(n_small * n_small)) {
    const Scalar w = q.w();
    return q.vec() * (Scalar(2) / w * (Scalar(1) - n_sq / (Scalar(3) * w * w)));
  }
  const Scalar n = sqrt(n_sq);
  return q.vec() * (Scalar(2) * atan2(n, q.w()) / n);
}

template <typename Scalar>
RigidPose<Scalar> se3_exp(const Twist<Scalar>& xi) {
  const auto q = so3_exp(xi.omega);
  const auto k = geometry_detail::jacobian_coeffs(xi.omega.squaredNorm());
  const Mat3<Scalar> w = geometry_detail::hat(xi.omega);
  const Mat3<Scalar> v_mat = Mat3<Scalar>::Identity() + k.b * w + k.c * (w * w);
  return RigidPose<Scalar>(q, v_mat * xi.v);
}

/// Principal-branch logarithm. Throws AngleNearPi when the rotation angle is
/// within 1e-6 of pi, where the translational part is ill-conditioned.
template <typename Scalar>
Twist<Scalar> se3_log(const RigidPose<Scalar>& pose) {
  const auto& q = pose.rotation();
  const double angle = [&] {
    using geometry_detail::value_of;
    const double x = value_of(q.x()), y = value_of(q.y()), z = value_of(q.z());
    return 2.0 * std::atan2(std::sqrt(x * x + y * y + z * z), std::abs(value_of(q.w())));
  }();
  if (angle > std::numbers::pi - 1e-6) {
    throw Error(ErrorCode::kAngleNearPi, "rotation angle " + std::to_string(angle) + " rad");
  }
  Twist<Scalar> xi;
  xi.omega = so3_log(q);
  const auto k = geometry_detail::jacobian_coeffs(xi.omega.squaredNorm());
  const Mat3<Scalar> w = geometry_detail::hat(xi.omega);
  const Mat3<Scalar> v_inv = Mat3<Scalar>::Identity() - 0.5 * w + k.d * (w * w);
  xi.v = v_inv * pose.translation();
  return xi;
}

}  // namespace clvo
