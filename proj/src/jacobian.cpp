#include "gsik/jacobian.hpp"

#include <cmath>
#include <string>

#include "gsik/error.hpp"

namespace gsik {

namespace {

Vec3 rotation_log(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.axis() * aa.angle();
}

}  // namespace

Vec3 orientation_error(const Mat3& current, const Mat3& target) {
  if (!is_rotation(current) || !is_rotation(target)) {
    throw Error(ErrorCode::InvalidArgument, "orientation_error: inputs must be proper rotations");
  }
  return rotation_log(target * current.transpose());
}

Vec3 world_axis(const Skeleton& skeleton, const GlobalTransforms& transforms, std::size_t joint) {
  // The axis is fixed under its own rotation, so the joint frame and the
  // parent frame give the same world axis.
  return transforms.joints.at(joint).rotation * skeleton.joints().at(joint).axis;
}

std::size_t task_row_count(std::span<const EffectorGoal> goals) {
  std::size_t m = 0;
  for (const EffectorGoal& g : goals) m += (g.position_enabled ? 3 : 0) + (g.orientation_enabled ? 3 : 0);
  return m;
}

void validate_goals(const Skeleton& skeleton, std::span<const EffectorGoal> goals) {
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const EffectorGoal& g = goals[i];
    const std::string where = "goal " + std::to_string(i);
    if (g.site >= skeleton.effector_count()) {
      throw Error(ErrorCode::Index, where + ": effector index " + std::to_string(g.site) +
                                        " out of range (" + std::to_string(skeleton.effector_count()) +
                                        " sites)");
    }
    if (!std::isfinite(g.weight) || g.weight < 0) {
      throw Error(ErrorCode::InvalidArgument, where + ": weight must be finite and non-negative");
    }
    if (!g.target_position.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, where + ": target position is not finite");
    }
    if (!is_rotation(g.target_orientation)) {
      throw Error(ErrorCode::InvalidArgument, where + ": target orientation is not a proper rotation");
    }
  }
}

double task_error_norm(const Skeleton& skeleton, const GlobalTransforms& transforms,
                       std::span<const EffectorGoal> goals) {
  double sq = 0.0;
  for (const EffectorGoal& g : goals) {
    if (!g.any_enabled()) continue;
    const EffectorState state = effector_state(skeleton, transforms, g.site);
    const double w2 = g.weight * g.weight;
    if (g.position_enabled) sq += w2 * position_error(state.position, g.target_position).squaredNorm();
    if (g.orientation_enabled) {
      sq += w2 * rotation_log(g.target_orientation * state.orientation.transpose()).squaredNorm();
    }
  }
  return std::sqrt(sq);
}

TaskJacobian build_jacobian(const Skeleton& skeleton, const GlobalTransforms& transforms,
                            std::span<const EffectorGoal> goals, const JacobianOptions& options) {
  const std::size_t m = task_row_count(goals);
  if (m == 0) throw Error(ErrorCode::EmptyTask, "no goal has an enabled constraint");
  const auto n = static_cast<Eigen::Index>(skeleton.joint_count());

  TaskJacobian task;
  task.matrix = MatX::Zero(static_cast<Eigen::Index>(m), n);
  task.error = VecX::Zero(static_cast<Eigen::Index>(m));
  task.rows.reserve(m);

  double raw_sq = 0.0;
  Eigen::Index row = 0;
  for (std::size_t gi = 0; gi < goals.size(); ++gi) {
    const EffectorGoal& g = goals[gi];
    if (!g.any_enabled()) continue;
    const EffectorState state = effector_state(skeleton, transforms, g.site);
    const auto& chain = skeleton.effector_chain(g.site);
    const double w = g.weight;

    if (g.position_enabled) {
      Vec3 dp = position_error(state.position, g.target_position);
      raw_sq += w * w * dp.squaredNorm();
      const double len = dp.norm();
      if (len > options.max_step) dp *= options.max_step / len;
      for (std::size_t j : chain) {
        const Vec3 col = jacobian_position_column(world_axis(skeleton, transforms, j),
                                                  transforms.joints[j].position, state.position);
        task.matrix.block<3, 1>(row, static_cast<Eigen::Index>(j)) = w * col;
      }
      task.error.segment<3>(row) = w * dp;
      for (int c = 0; c < 3; ++c) task.rows.push_back({gi, RowKind::Position, c});
      row += 3;
    }

    if (g.orientation_enabled) {
      const Vec3 dr = rotation_log(g.target_orientation * state.orientation.transpose());
      raw_sq += w * w * dr.squaredNorm();
      for (std::size_t j : chain) {
        task.matrix.block<3, 1>(row, static_cast<Eigen::Index>(j)) =
            w * jacobian_orientation_column(world_axis(skeleton, transforms, j));
      }
      task.error.segment<3>(row) = w * dr;
      for (int c = 0; c < 3; ++c) task.rows.push_back({gi, RowKind::Orientation, c});
      row += 3;
    }
  }
  task.raw_error_norm = std::sqrt(raw_sq);
  return task;
}

}  // namespace gsik
