#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gsik/gait.hpp"
#include "gsik/ik_controller.hpp"

namespace gsik {

struct GaitFrameResult {
  FrameReport report;
  GaitStep step;
};

/// Advances `gait` by dt, rebases `session` onto the new stance foot when a
/// step completes, then solves one IK frame toward the gait goals.
GaitFrameResult gait_frame(IkSession& session, GaitState& gait, double dt, const IkConfig& config);

struct AnimationOptions {
  GaitParams params;
  IkConfig config;
  double duration = 10.0;
  double frame_rate = 60.0;
  /// Ceiling on |d theta| / dt between recorded frames (rad/s).
  double joint_speed_limit = 12.0;
};

struct AnimationFrame {
  double time = 0.0;
  /// Angles and joint positions in the original skeleton's joint order.
  std::vector<double> angles;
  std::vector<Vec3> positions;
  Foot stance = Foot::Right;
  bool root_swap = false;
  Vec3 stance_foot_position = Vec3::Zero();
  std::map<std::string, Vec3> goals;
  int inner_iterations = 0;
  double task_error = 0.0;
};

struct Animation {
  std::vector<std::string> joint_names;
  std::vector<std::optional<std::size_t>> parents;
  std::vector<JointLimits> limits;
  AnimationOptions options;
  std::vector<AnimationFrame> frames;
  std::vector<double> swap_times;
  /// Largest |d theta| / dt over consecutive frames, rad/s.
  double max_joint_speed = 0.0;
  bool limits_respected = true;
};

Animation record_gait(const Skeleton& skeleton, const AnimationOptions& options);

/// First line: {"type":"meta", ...} including root_swaps; then one
/// {"type":"frame", ...} line per frame.
void write_animation(const Animation& animation, std::ostream& out);
void write_animation(const Animation& animation, const std::filesystem::path& path);

}  // namespace gsik
