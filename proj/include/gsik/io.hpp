#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gsik/jacobian.hpp"
#include "gsik/kinematics.hpp"

namespace gsik {

/// Parse and schema errors carry "line L, column C" for syntax errors and a
/// JSON path such as "joints[3].axis" for structural ones.
Skeleton skeleton_from_json(std::string_view text);
Skeleton skeleton_from_json(const nlohmann::json& doc);
inline Skeleton skeleton_from_json(const std::string& text) { return skeleton_from_json(std::string_view(text)); }
Skeleton load_skeleton(const std::filesystem::path& path);
nlohmann::json skeleton_to_json(const Skeleton& skeleton);

std::vector<EffectorGoal> goals_from_json(const Skeleton& skeleton, std::string_view text);
std::vector<EffectorGoal> goals_from_json(const Skeleton& skeleton, const nlohmann::json& doc);
inline std::vector<EffectorGoal> goals_from_json(const Skeleton& skeleton, const std::string& text) {
  return goals_from_json(skeleton, std::string_view(text));
}
std::vector<EffectorGoal> load_goals(const Skeleton& skeleton, const std::filesystem::path& path);
nlohmann::json goals_to_json(const Skeleton& skeleton, const std::vector<EffectorGoal>& goals);

std::string read_text_file(const std::filesystem::path& path);

/// [x, y, z, w] quaternion to rotation matrix; throws unless the quaternion
/// has non-zero finite norm (it is normalized).
Mat3 rotation_from_quaternion(const nlohmann::json& q, const std::string& where);
nlohmann::json quaternion_to_json(const Mat3& rotation);

}  // namespace gsik
