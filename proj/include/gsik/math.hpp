#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gsik {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Rotation followed by translation: x_world = rotation * x_local + position.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();

  Vec3 apply(const Vec3& local) const { return rotation * local + position; }

  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.position + position};
  }

  RigidTransform inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * position)};
  }
};

/// Right-handed rotation of `angle` radians about the unit vector `axis`.
inline Mat3 axis_rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

/// True when `m` is orthonormal with determinant +1, to within `tol`.
bool is_rotation(const Mat3& m, double tol = 1e-9);

bool all_finite(const Eigen::Ref<const VecX>& v);

}  // namespace gsik
