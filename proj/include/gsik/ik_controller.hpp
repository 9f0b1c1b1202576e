#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsik/jacobian.hpp"
#include "gsik/kinematics.hpp"
#include "gsik/pgs_solver.hpp"

namespace gsik {

struct IkConfig {
  double damping = 0.001;
  SolverConfig solver;
  /// Jacobian rebuilds per frame.
  int max_outer_iterations = 3;
  double max_step = 0.15;

  void validate() const;
};

/// A = J^T J + damping * I, b = J^T e. x0 is zero and the system is
/// unbounded; the controller fills both in.
LinearSystem assemble_normal_equations(const TaskJacobian& task, double damping);

/// Box for the angle increment of each joint: [lower - theta, upper - theta].
std::vector<Bounds> increment_bounds(const Skeleton& skeleton, const Pose& pose);

struct FrameReport {
  bool ok = true;
  std::string failure;
  /// Last inner solve (empty x when no solve ran).
  SolveReport solve;
  int outer_iterations = 0;
  /// Gauss-Seidel sweeps summed over the frame's outer passes.
  int inner_iterations = 0;
  /// Passes undone because they did not lower the task error.
  int rejected_passes = 0;
  double task_error_before = 0.0;
  double task_error_after = 0.0;
  /// ||theta_after - theta_before||_2.
  double step_norm = 0.0;
  double solve_seconds = 0.0;
};

/// Per-character solver state carried between frames: current pose, active
/// goals, and the previous frame's increment used to warm-start the next.
class IkSession {
 public:
  explicit IkSession(std::shared_ptr<const Skeleton> skeleton);
  IkSession(std::shared_ptr<const Skeleton> skeleton, Pose pose);

  const Skeleton& skeleton() const { return *skeleton_; }
  std::shared_ptr<const Skeleton> skeleton_ptr() const { return skeleton_; }
  const Pose& pose() const { return pose_; }
  const GlobalTransforms& transforms() const { return transforms_; }
  std::span<const EffectorGoal> goals() const { return goals_; }
  const VecX& warm_start() const { return warm_start_; }
  const std::optional<FrameReport>& last_report() const { return last_report_; }

  /// Replaces the active goals. The warm start survives unless the goal
  /// layout (sites and enabled rows) changed.
  void set_goals(std::vector<EffectorGoal> goals);

  /// Replaces the pose (clamped into joint limits) and clears the warm start.
  void set_pose(Pose pose);

  void reset_warm_start();

  /// Goals pinning every joint-attached effector at its current position.
  std::vector<EffectorGoal> current_effector_goals(bool with_orientation = false) const;

  /// One animation frame: re-linearize, solve the damped normal equations
  /// with projected Gauss-Seidel, apply the increment, repeat up to
  /// max_outer_iterations. A pass that does not lower the task error by a
  /// relative margin is undone and ends the frame. The pose is left untouched when the frame
  /// fails.
  FrameReport solve_frame(const IkConfig& config);

  /// Re-roots the skeleton at `new_root`, carrying pose, goals and warm
  /// start across the index permutation. Returns old-to-new joint indices.
  std::vector<std::size_t> rebase(std::size_t new_root);

  /// Swaps in a different skeleton: rest pose, no goals, cold start.
  void reset(std::shared_ptr<const Skeleton> skeleton);

 private:
  void refresh();
  // Applies a shrinking fraction of the increment until the task error drops
  // meaningfully below `error`; returns the error at the pose left in place.
  double try_increment(const Pose& from, const VecX& increment, double error);

  std::shared_ptr<const Skeleton> skeleton_;
  Pose pose_;
  GlobalTransforms transforms_;
  std::vector<EffectorGoal> goals_;
  VecX warm_start_;
  std::optional<FrameReport> last_report_;
};

}  // namespace gsik
