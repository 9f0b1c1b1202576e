#include "gsik/gait.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gsik/error.hpp"

namespace gsik {

namespace {

// How far the pelvis sinks below its rest height while walking, so the
// stance knee never locks straight. Eased in over the first step.
constexpr double kCrouch = 0.05;
// Forward hand travel per metre of contralateral foot lead.
constexpr double kArmSwing = 0.4;
// Phase values this close to 1 complete the step; absorbs dt round-off.
constexpr double kPhaseEpsilon = 1e-9;

std::size_t require_site(const Skeleton& skeleton, std::string_view name) {
  auto s = skeleton.find_effector(name);
  if (!s) throw Error(ErrorCode::InvalidArgument, "gait needs an effector named '" + std::string(name) + "'");
  return *s;
}

EffectorGoal position_goal(std::size_t site, const Vec3& p) {
  EffectorGoal g;
  g.site = site;
  g.target_position = p;
  return g;
}

}  // namespace

std::string_view to_string(Foot f) { return f == Foot::Left ? "left" : "right"; }

void GaitParams::validate() const {
  if (!(step_length > 0) || !(step_height > 0) || !(step_duration > 0)) {
    throw Error(ErrorCode::InvalidArgument, "step_length, step_height and step_duration must be positive");
  }
  if (!std::isfinite(body_sway) || body_sway < 0) {
    throw Error(ErrorCode::InvalidArgument, "body_sway must be finite and non-negative");
  }
}

Vec3 swing_foot_target(const GaitParams& params, double t, const Vec3& start, const Vec3& end) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidArgument, "gait phase must lie in [0, 1]");
  const double s = t * t * (3.0 - 2.0 * t);
  Vec3 p = start + s * (end - start);
  p.y() += params.step_height * std::sin(std::numbers::pi * t);
  return p;
}

GaitState start_gait(const Skeleton& skeleton, const Pose& pose, const GaitParams& params) {
  params.validate();
  GaitState state;
  state.params = params;
  GaitRig& rig = state.rig;
  rig.head = require_site(skeleton, "head");
  rig.pelvis = require_site(skeleton, "pelvis");
  rig.left_hand = require_site(skeleton, "left-hand");
  rig.right_hand = require_site(skeleton, "right-hand");
  rig.left_foot = require_site(skeleton, "left-foot");
  rig.right_foot = require_site(skeleton, "right-foot");

  const GlobalTransforms fk = forward_kinematics(skeleton, pose);
  auto at = [&](std::size_t site) { return effector_state(skeleton, fk, site); };
  const EffectorState stance = at(rig.foot_site(params.stance_foot));
  const Vec3 swing = at(rig.foot_site(other(params.stance_foot))).position;
  const Vec3 pelvis = at(rig.pelvis).position;

  rig.pelvis_height = pelvis.y() - stance.position.y();
  rig.head_from_pelvis = at(rig.head).position - pelvis;
  rig.left_hand_from_pelvis = at(rig.left_hand).position - pelvis;
  rig.right_hand_from_pelvis = at(rig.right_hand).position - pelvis;
  rig.foot_orientation = stance.orientation;
  rig.head_orientation = at(rig.head).orientation;

  state.stance = params.stance_foot;
  state.stance_position = stance.position;
  state.swing_start = swing;
  state.swing_end = Vec3(stance.position.x() + params.step_length, stance.position.y(), swing.z());
  return state;
}

std::vector<EffectorGoal> gait_goals(const GaitState& state) {
  const GaitParams& p = state.params;
  const GaitRig& rig = state.rig;
  const double t = std::clamp(state.phase.t, 0.0, 1.0);

  const Vec3 stance = state.stance_position;
  const Vec3 swing = swing_foot_target(p, t, state.swing_start, state.swing_end);
  const Vec3& left_foot = state.stance == Foot::Left ? stance : swing;
  const Vec3& right_foot = state.stance == Foot::Left ? swing : stance;

  const double mid_x = 0.5 * (stance.x() + swing.x());
  const double mid_z = 0.5 * (stance.z() + swing.z());
  const double lateral = stance.z() > swing.z() ? 1.0 : (stance.z() < swing.z() ? -1.0 : 0.0);
  const double crouch = kCrouch * std::min(1.0, state.elapsed / p.step_duration);
  const Vec3 pelvis(mid_x, stance.y() + rig.pelvis_height - crouch,
                    mid_z + lateral * p.body_sway * std::sin(std::numbers::pi * t));

  const Vec3 left_hand = pelvis + rig.left_hand_from_pelvis + Vec3(kArmSwing * (right_foot.x() - mid_x), 0, 0);
  const Vec3 right_hand = pelvis + rig.right_hand_from_pelvis + Vec3(kArmSwing * (left_foot.x() - mid_x), 0, 0);

  EffectorGoal swing_goal = position_goal(rig.foot_site(other(state.stance)), swing);
  swing_goal.orientation_enabled = true;
  swing_goal.target_orientation = rig.foot_orientation;

  EffectorGoal head_goal = position_goal(rig.head, pelvis + rig.head_from_pelvis);
  head_goal.orientation_enabled = true;
  head_goal.target_orientation = rig.head_orientation;

  return {swing_goal,
          position_goal(rig.pelvis, pelvis),
          head_goal,
          position_goal(rig.left_hand, left_hand),
          position_goal(rig.right_hand, right_hand)};
}

GaitStep advance(const GaitState& state, double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be finite and >= 0");
  GaitStep out;
  out.state = state;
  GaitState& s = out.state;
  s.elapsed += dt;
  s.phase.t += dt / s.params.step_duration;
  while (s.phase.t >= 1.0 - kPhaseEpsilon) {
    s.phase.t = std::max(0.0, s.phase.t - 1.0);
    const Vec3 previous_stance = s.stance_position;
    s.stance_position = s.swing_end;
    s.swing_start = previous_stance;
    s.swing_end = Vec3(s.stance_position.x() + s.params.step_length, s.stance_position.y(), previous_stance.z());
    s.stance = other(s.stance);
    s.phase.step_index += 1;
    out.swaps += 1;
  }
  if (out.swaps > 0) out.root_swap = s.stance;
  out.goals = gait_goals(s);
  return out;
}

std::optional<std::size_t> foot_root_joint(const Skeleton& skeleton, const GaitRig& rig, Foot foot) {
  return skeleton.effectors().at(rig.foot_site(foot)).joint;
}

}  // namespace gsik
