#include "gsik/service.hpp"

#include <algorithm>
#include <cmath>

#include "gsik/animation.hpp"
#include "gsik/error.hpp"
#include "gsik/io.hpp"
#include "gsik/log.hpp"

#include <spdlog/spdlog.h>

namespace gsik {

namespace {

// Frames solved on ticks after a target edit, until the pose stops moving.
constexpr int kSettleFrames = 120;
constexpr double kSettledStep = 1e-6;

Mat3 rotation_from(const wire::Quat& q) {
  Eigen::Quaterniond quat(q[3], q[0], q[1], q[2]);
  const double n = quat.norm();
  if (!std::isfinite(n) || n < 1e-12) throw Error(ErrorCode::InvalidArgument, "orientation quaternion has zero norm");
  return quat.normalized().toRotationMatrix();
}

wire::SolveStats stats_of(const FrameReport& r) {
  wire::SolveStats s;
  s.iterations = r.inner_iterations;
  s.residual = r.outer_iterations > 0 ? r.solve.residual : 0.0;
  s.termination = r.outer_iterations > 0 ? std::string(to_string(r.solve.termination)) : "converged";
  s.solve_time = r.solve_seconds;
  return s;
}

}  // namespace

ServiceSession::ServiceSession(std::shared_ptr<const Skeleton> skeleton) : session_(std::move(skeleton)) {
  adopt_display_order();
  pin_effectors();
}

void ServiceSession::adopt_display_order() {
  display_order_.clear();
  for (const Joint& j : session_.skeleton().joints()) display_order_.push_back(j.name);
}

void ServiceSession::pin_effectors() {
  session_.set_goals(session_.current_effector_goals(false));
  settle_frames_ = 0;
}

std::vector<wire::ServerMessage> ServiceSession::greeting() const {
  return {wire::SkeletonEcho{skeleton_to_json(session_.skeleton())}, pose_update()};
}

wire::PoseUpdate ServiceSession::pose_update() const {
  const Skeleton& skel = session_.skeleton();
  wire::PoseUpdate u;
  u.angles.reserve(display_order_.size());
  u.positions.reserve(display_order_.size());
  for (const std::string& name : display_order_) {
    const std::size_t k = *skel.find_joint(name);
    const Vec3& p = session_.transforms().joints[k].position;
    u.angles.push_back(session_.pose().angles[static_cast<Eigen::Index>(k)]);
    u.positions.push_back({p.x(), p.y(), p.z()});
  }
  for (const EffectorGoal& g : session_.goals()) {
    const EffectorState st = effector_state(skel, session_.transforms(), g.site);
    wire::EffectorError e;
    e.name = skel.effectors()[g.site].name;
    if (g.position_enabled) e.position = (g.target_position - st.position).norm();
    if (g.orientation_enabled) e.orientation = orientation_error(st.orientation, g.target_orientation).norm();
    u.effector_errors.push_back(std::move(e));
  }
  return u;
}

std::vector<wire::ServerMessage> ServiceSession::solve_and_report() {
  const FrameReport r = session_.solve_frame(config_);
  std::vector<wire::ServerMessage> out{pose_update(), stats_of(r)};
  if (!r.ok) out.push_back(wire::ErrorReply{r.failure});
  return out;
}

std::vector<wire::ServerMessage> ServiceSession::handle(const wire::ClientMessage& message) {
  try {
    return std::visit([this](const auto& m) { return on(m); }, message);
  } catch (const Error& e) {
    logger()->debug("{} rejected: {}", wire::type_name(message), e.what());
    return {wire::ErrorReply{e.what()}};
  }
}

std::vector<wire::ServerMessage> ServiceSession::handle_text(std::string_view text) {
  wire::ClientMessage message;
  try {
    message = wire::parse_client(text);
  } catch (const Error& e) {
    return {wire::ErrorReply{e.what()}};
  }
  return handle(message);
}

std::vector<wire::ServerMessage> ServiceSession::on(const wire::SetTarget& m) {
  if (gait_) throw Error(ErrorCode::InvalidArgument, "targets are driven by the gait; send StopGait first");
  const auto site = session_.skeleton().find_effector(m.effector);
  if (!site) throw Error(ErrorCode::Index, "unknown effector '" + m.effector + "'");
  EffectorGoal goal;
  goal.site = *site;
  goal.target_position = Vec3(m.position[0], m.position[1], m.position[2]);
  if (m.orientation) {
    goal.target_orientation = rotation_from(*m.orientation);
    goal.orientation_enabled = true;
  }

  std::vector<EffectorGoal> goals(session_.goals().begin(), session_.goals().end());
  auto it = std::find_if(goals.begin(), goals.end(), [&](const EffectorGoal& g) { return g.site == goal.site; });
  if (it != goals.end()) {
    goal.weight = it->weight;
    *it = goal;
  } else {
    goals.push_back(goal);
  }
  session_.set_goals(std::move(goals));
  auto out = solve_and_report();
  settle_frames_ = kSettleFrames;
  return out;
}

std::vector<wire::ServerMessage> ServiceSession::on(const wire::SetConfig& m) {
  IkConfig next = config_;
  if (m.damping) next.damping = *m.damping;
  if (m.max_iterations) next.solver.max_iterations = *m.max_iterations;
  if (m.residual_tol) next.solver.residual_tol = *m.residual_tol;
  if (m.delta_x_tol) next.solver.delta_x_tol = *m.delta_x_tol;
  if (m.stagnation_tol) next.solver.stagnation_tol = *m.stagnation_tol;
  if (m.max_outer_iterations) next.max_outer_iterations = *m.max_outer_iterations;
  if (m.max_step) next.max_step = *m.max_step;
  next.validate();
  config_ = next;
  return {};
}

std::vector<wire::ServerMessage> ServiceSession::on(const wire::LoadSkeleton& m) {
  auto skeleton = std::make_shared<const Skeleton>(
      m.skeleton.is_string() ? skeleton_from_json(m.skeleton.get<std::string>()) : skeleton_from_json(m.skeleton));
  session_.reset(std::move(skeleton));
  gait_.reset();
  adopt_display_order();
  pin_effectors();
  return greeting();
}

std::vector<wire::ServerMessage> ServiceSession::on(const wire::StartGait& m) {
  GaitParams params;
  params.step_length = m.step_length;
  params.step_height = m.step_height;
  params.step_duration = m.step_duration;
  params.body_sway = m.body_sway;
  if (m.stance_foot == "left") {
    params.stance_foot = Foot::Left;
  } else if (m.stance_foot == "right") {
    params.stance_foot = Foot::Right;
  } else {
    throw Error(ErrorCode::InvalidArgument, "stance_foot must be 'left' or 'right'");
  }
  GaitState gait = start_gait(session_.skeleton(), session_.pose(), params);
  if (auto joint = foot_root_joint(session_.skeleton(), gait.rig, params.stance_foot)) {
    session_.rebase(*joint);
    gait = start_gait(session_.skeleton(), session_.pose(), params);
  }
  session_.set_goals(gait_goals(gait));
  gait_ = gait;
  settle_frames_ = 0;
  return {pose_update()};
}

std::vector<wire::ServerMessage> ServiceSession::on(const wire::StopGait&) {
  gait_.reset();
  pin_effectors();
  return {pose_update()};
}

std::vector<wire::ServerMessage> ServiceSession::on(const wire::RebaseRoot& m) {
  if (gait_) throw Error(ErrorCode::InvalidArgument, "the gait owns the root; send StopGait first");
  const auto joint = session_.skeleton().find_joint(m.joint);
  if (!joint) throw Error(ErrorCode::Index, "unknown joint '" + m.joint + "'");
  session_.rebase(*joint);
  adopt_display_order();
  pin_effectors();
  return greeting();
}

std::vector<wire::ServerMessage> ServiceSession::tick(double dt) {
  try {
    if (gait_) {
      const GaitFrameResult r = gait_frame(session_, *gait_, dt, config_);
      std::vector<wire::ServerMessage> out{pose_update(), stats_of(r.report)};
      if (!r.report.ok) out.push_back(wire::ErrorReply{r.report.failure});
      return out;
    }
    if (settle_frames_ > 0) {
      --settle_frames_;
      auto out = solve_and_report();
      if (session_.last_report() && session_.last_report()->step_norm < kSettledStep) settle_frames_ = 0;
      return out;
    }
  } catch (const Error& e) {
    gait_.reset();
    settle_frames_ = 0;
    return {wire::ErrorReply{e.what()}};
  }
  return {};
}

}  // namespace gsik
