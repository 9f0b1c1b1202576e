#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gsik/kinematics.hpp"

namespace gsik {

struct EffectorGoal {
  std::size_t site = 0;
  Vec3 target_position = Vec3::Zero();
  Mat3 target_orientation = Mat3::Identity();
  bool position_enabled = true;
  bool orientation_enabled = false;
  double weight = 1.0;

  bool any_enabled() const { return position_enabled || orientation_enabled; }
};

enum class RowKind { Position, Orientation };

struct RowTag {
  std::size_t goal;
  RowKind kind;
  int component;  // 0, 1, 2 for x, y, z
};

/// Stacked task: rows ordered by goal, then position before orientation,
/// then x, y, z. One column per joint.
struct TaskJacobian {
  MatX matrix;
  VecX error;
  std::vector<RowTag> rows;
  /// Weighted error norm before the per-goal step clamp.
  double raw_error_norm = 0.0;

  std::size_t row_count() const { return rows.size(); }
};

struct JacobianOptions {
  /// Upper bound on the magnitude of each goal's position error (m).
  double max_step = 0.15;
};

/// target - current.
inline Vec3 position_error(const Vec3& current, const Vec3& target) {
  return target - current;
}

/// Axis-angle vector of target * current^T, angle in [0, pi]. Throws a
/// validation error unless both inputs are proper rotations.
Vec3 orientation_error(const Mat3& current, const Mat3& target);

/// r x (e - p): velocity of the effector point per unit joint rate.
inline Vec3 jacobian_position_column(const Vec3& axis_world, const Vec3& joint_pos,
                                     const Vec3& effector_pos) {
  return axis_world.cross(effector_pos - joint_pos);
}

/// Angular velocity of the effector frame per unit joint rate.
inline Vec3 jacobian_orientation_column(const Vec3& axis_world) { return axis_world; }

/// World-space rotation axis of `joint` for the given transforms.
Vec3 world_axis(const Skeleton& skeleton, const GlobalTransforms& transforms,
                std::size_t joint);

/// Throws unless every goal references a valid site, has a non-negative
/// finite weight and a proper target rotation.
void validate_goals(const Skeleton& skeleton, std::span<const EffectorGoal> goals);

TaskJacobian build_jacobian(const Skeleton& skeleton, const GlobalTransforms& transforms,
                            std::span<const EffectorGoal> goals,
                            const JacobianOptions& options = {});

/// Weighted, unclamped task error norm: what build_jacobian reports as
/// raw_error_norm, without forming J.
double task_error_norm(const Skeleton& skeleton, const GlobalTransforms& transforms,
                       std::span<const EffectorGoal> goals);

/// Number of task rows the goals produce.
std::size_t task_row_count(std::span<const EffectorGoal> goals);

}  // namespace gsik
