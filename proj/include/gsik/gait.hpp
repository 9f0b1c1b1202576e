#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "gsik/jacobian.hpp"
#include "gsik/kinematics.hpp"

namespace gsik {

enum class Foot { Left, Right };

inline Foot other(Foot f) { return f == Foot::Left ? Foot::Right : Foot::Left; }
std::string_view to_string(Foot f);

struct GaitParams {
  double step_length = 0.4;
  double step_height = 0.08;
  double step_duration = 0.5;
  Foot stance_foot = Foot::Right;
  double body_sway = 0.02;

  void validate() const;
};

struct GaitPhase {
  double t = 0.0;
  long step_index = 0;
};

/// Effector sites the gait drives, and rest offsets captured from the
/// starting pose.
struct GaitRig {
  std::size_t head = 0;
  std::size_t pelvis = 0;
  std::size_t left_hand = 0;
  std::size_t right_hand = 0;
  std::size_t left_foot = 0;
  std::size_t right_foot = 0;

  /// Pelvis height above the feet.
  double pelvis_height = 0.0;
  Vec3 head_from_pelvis = Vec3::Zero();
  Vec3 left_hand_from_pelvis = Vec3::Zero();
  Vec3 right_hand_from_pelvis = Vec3::Zero();
  Mat3 foot_orientation = Mat3::Identity();
  Mat3 head_orientation = Mat3::Identity();

  std::size_t foot_site(Foot f) const { return f == Foot::Left ? left_foot : right_foot; }
};

struct GaitState {
  GaitParams params;
  GaitRig rig;
  GaitPhase phase;
  Foot stance = Foot::Right;
  Vec3 stance_position = Vec3::Zero();
  Vec3 swing_start = Vec3::Zero();
  Vec3 swing_end = Vec3::Zero();
  /// Total walking time, used to ease into the walking crouch.
  double elapsed = 0.0;
};

struct GaitStep {
  GaitState state;
  std::vector<EffectorGoal> goals;
  /// New stance foot when the step boundary was crossed; the caller
  /// rebases the IK root onto it.
  std::optional<Foot> root_swap;
  int swaps = 0;
};

/// Smoothstep horizontal blend from start to end with a
/// step_height * sin(pi t) lift along +y.
Vec3 swing_foot_target(const GaitParams& params, double t, const Vec3& start, const Vec3& end);

/// Reads effector sites by name (head, pelvis, left-hand, right-hand,
/// left-foot, right-foot) and rest geometry from `pose`.
GaitState start_gait(const Skeleton& skeleton, const Pose& pose, const GaitParams& params);

/// Goals for the current phase without advancing time.
std::vector<EffectorGoal> gait_goals(const GaitState& state);

GaitStep advance(const GaitState& state, double dt);

/// Joint owning the given foot's site, i.e. the rebase target for a swap.
/// Empty when the site already sits on the base.
std::optional<std::size_t> foot_root_joint(const Skeleton& skeleton, const GaitRig& rig, Foot foot);

}  // namespace gsik
