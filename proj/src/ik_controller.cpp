#include "gsik/ik_controller.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "gsik/error.hpp"

namespace gsik {

void IkConfig::validate() const {
  if (!(damping > 0) || !std::isfinite(damping)) {
    throw Error(ErrorCode::InvalidArgument, "damping must be positive and finite");
  }
  if (max_outer_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_outer_iterations must be >= 1");
  if (!(max_step > 0)) throw Error(ErrorCode::InvalidArgument, "max_step must be positive");
  solver.validate();
}

LinearSystem assemble_normal_equations(const TaskJacobian& task, double damping) {
  if (!(damping > 0)) throw Error(ErrorCode::InvalidArgument, "damping must be positive");
  const MatX& J = task.matrix;
  const auto n = J.cols();
  LinearSystem system;
  system.A = J.transpose() * J;
  system.A.diagonal().array() += damping;
  system.b = J.transpose() * task.error;
  system.x0 = VecX::Zero(n);
  return system;
}

std::vector<Bounds> increment_bounds(const Skeleton& skeleton, const Pose& pose) {
  skeleton.check_pose(pose);
  std::vector<Bounds> bounds;
  bounds.reserve(skeleton.joint_count());
  for (std::size_t i = 0; i < skeleton.joint_count(); ++i) {
    const JointLimits& lim = skeleton.joints()[i].limits;
    const double theta = pose.angles[static_cast<Eigen::Index>(i)];
    bounds.push_back({lim.lower - theta, lim.upper - theta});
  }
  return bounds;
}

namespace {

constexpr int kBacktracks = 4;
// Smallest relative drop in the squared task error that counts as progress.
constexpr double kMinCostDecrease = 1e-8;

bool improves(double next, double error) { return next * next < error * error * (1.0 - kMinCostDecrease); }

Pose clamp_to_limits(const Skeleton& skeleton, Pose pose) {
  for (std::size_t i = 0; i < skeleton.joint_count(); ++i) {
    auto& a = pose.angles[static_cast<Eigen::Index>(i)];
    a = skeleton.joints()[i].limits.clamp(a);
  }
  return pose;
}

bool same_layout(std::span<const EffectorGoal> a, std::span<const EffectorGoal> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].site != b[i].site || a[i].position_enabled != b[i].position_enabled ||
        a[i].orientation_enabled != b[i].orientation_enabled) {
      return false;
    }
  }
  return true;
}

}  // namespace

IkSession::IkSession(std::shared_ptr<const Skeleton> skeleton)
    : IkSession(skeleton, skeleton ? skeleton->rest_pose() : Pose{}) {}

IkSession::IkSession(std::shared_ptr<const Skeleton> skeleton, Pose pose) : skeleton_(std::move(skeleton)) {
  if (!skeleton_) throw Error(ErrorCode::InvalidArgument, "session needs a skeleton");
  skeleton_->check_pose(pose);
  if (!pose.angles.allFinite()) throw Error(ErrorCode::NonFinite, "initial pose is not finite");
  pose_ = clamp_to_limits(*skeleton_, std::move(pose));
  warm_start_ = VecX::Zero(static_cast<Eigen::Index>(skeleton_->joint_count()));
  refresh();
}

void IkSession::refresh() { transforms_ = forward_kinematics(*skeleton_, pose_); }

void IkSession::set_goals(std::vector<EffectorGoal> goals) {
  validate_goals(*skeleton_, goals);
  if (!same_layout(goals_, goals)) reset_warm_start();
  goals_ = std::move(goals);
}

void IkSession::set_pose(Pose pose) {
  skeleton_->check_pose(pose);
  if (!pose.angles.allFinite()) throw Error(ErrorCode::NonFinite, "pose is not finite");
  pose_ = clamp_to_limits(*skeleton_, std::move(pose));
  reset_warm_start();
  refresh();
}

void IkSession::reset_warm_start() { warm_start_.setZero(); }

std::vector<EffectorGoal> IkSession::current_effector_goals(bool with_orientation) const {
  std::vector<EffectorGoal> goals;
  for (std::size_t s = 0; s < skeleton_->effector_count(); ++s) {
    if (!skeleton_->effectors()[s].joint) continue;
    const EffectorState st = effector_state(*skeleton_, transforms_, s);
    EffectorGoal g;
    g.site = s;
    g.target_position = st.position;
    g.target_orientation = st.orientation;
    g.orientation_enabled = with_orientation;
    goals.push_back(g);
  }
  return goals;
}

FrameReport IkSession::solve_frame(const IkConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const Pose start_pose = pose_;
  const JacobianOptions jacobian_options{config.max_step};

  FrameReport report;
  try {
    double error = task_error_norm(*skeleton_, transforms_, goals_);
    report.task_error_before = error;
    for (int outer = 0; outer < config.max_outer_iterations && error >= config.solver.residual_tol; ++outer) {
      const TaskJacobian task = build_jacobian(*skeleton_, transforms_, goals_, jacobian_options);
      LinearSystem system = assemble_normal_equations(task, config.damping);
      system.bounds = increment_bounds(*skeleton_, pose_);
      const bool warm = outer == 0 && warm_start_.cwiseAbs().maxCoeff() > 0.0;
      if (warm) system.x0 = warm_start_;
      report.outer_iterations += 1;

      const Pose before_pass = pose_;
      double next = error;
      for (int attempt = 0; attempt < (warm ? 2 : 1); ++attempt) {
        if (attempt == 1) system.x0 = VecX::Zero(system.x0.size());
        SolveReport solved = solve(system, config.solver);
        report.inner_iterations += solved.iterations;
        if (!solved.x.allFinite()) {
          pose_ = start_pose;
          refresh();
          reset_warm_start();
          report.ok = false;
          report.failure = "solver produced a non-finite joint increment";
          report.solve = std::move(solved);
          report.task_error_after = report.task_error_before;
          last_report_ = report;
          return report;
        }
        next = try_increment(before_pass, solved.x, error);
        report.solve = std::move(solved);
        if (improves(next, error)) break;
      }
      if (!improves(next, error)) {
        pose_ = before_pass;
        refresh();
        report.rejected_passes += 1;
        break;
      }
      error = next;
    }
  } catch (...) {
    pose_ = start_pose;
    refresh();
    throw;
  }

  const VecX step = pose_.angles - start_pose.angles;
  report.step_norm = step.norm();
  report.task_error_after = task_error_norm(*skeleton_, transforms_, goals_);
  if (report.outer_iterations > 0) warm_start_ = step;
  report.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  last_report_ = report;
  return report;
}

double IkSession::try_increment(const Pose& from, const VecX& increment, double error) {
  // Shrinking toward zero stays inside the box, which always contains 0.
  double scale = 1.0;
  double next = error;
  for (int attempt = 0; attempt <= kBacktracks; ++attempt, scale *= 0.5) {
    for (Eigen::Index i = 0; i < pose_.angles.size(); ++i) {
      // The shifted bounds already keep theta + dx inside the limits; the
      // clamp absorbs rounding in (upper - theta) + theta.
      pose_.angles[i] =
          skeleton_->joints()[static_cast<std::size_t>(i)].limits.clamp(from.angles[i] + scale * increment[i]);
    }
    refresh();
    next = task_error_norm(*skeleton_, transforms_, goals_);
    if (improves(next, error)) break;
  }
  return next;
}

std::vector<std::size_t> IkSession::rebase(std::size_t new_root) {
  RebasedSkeleton rebased = gsik::rebase(*skeleton_, pose_, new_root);
  VecX warm(warm_start_.size());
  for (std::size_t old = 0; old < rebased.new_index.size(); ++old) {
    warm[static_cast<Eigen::Index>(rebased.new_index[old])] = warm_start_[static_cast<Eigen::Index>(old)];
  }
  skeleton_ = std::make_shared<const Skeleton>(std::move(rebased.skeleton));
  pose_ = std::move(rebased.pose);
  warm_start_ = std::move(warm);
  refresh();
  return rebased.new_index;
}

void IkSession::reset(std::shared_ptr<const Skeleton> skeleton) {
  if (!skeleton) throw Error(ErrorCode::InvalidArgument, "session needs a skeleton");
  skeleton_ = std::move(skeleton);
  pose_ = skeleton_->rest_pose();
  goals_.clear();
  warm_start_ = VecX::Zero(static_cast<Eigen::Index>(skeleton_->joint_count()));
  last_report_.reset();
  refresh();
}

}  // namespace gsik
