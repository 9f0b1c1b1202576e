#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

// JSON text protocol spoken over the live pose-editing socket. Every
// message is an object with a "type" tag naming the variant.

namespace gsik::wire {

using Vec3 = std::array<double, 3>;
/// [x, y, z, w]
using Quat = std::array<double, 4>;

// client -> server

struct SetTarget {
  std::string effector;
  Vec3 position{};
  std::optional<Quat> orientation;
  bool operator==(const SetTarget&) const = default;
};

struct SetConfig {
  std::optional<double> damping;
  std::optional<int> max_iterations;
  std::optional<double> residual_tol;
  std::optional<double> delta_x_tol;
  std::optional<double> stagnation_tol;
  std::optional<int> max_outer_iterations;
  std::optional<double> max_step;
  bool operator==(const SetConfig&) const = default;
};

struct LoadSkeleton {
  nlohmann::json skeleton;
  bool operator==(const LoadSkeleton&) const = default;
};

struct StartGait {
  double step_length = 0.4;
  double step_height = 0.08;
  double step_duration = 0.5;
  std::string stance_foot = "right";
  double body_sway = 0.02;
  bool operator==(const StartGait&) const = default;
};

struct StopGait {
  bool operator==(const StopGait&) const = default;
};

struct RebaseRoot {
  std::string joint;
  bool operator==(const RebaseRoot&) const = default;
};

using ClientMessage =
    std::variant<SetTarget, SetConfig, LoadSkeleton, StartGait, StopGait, RebaseRoot>;

// server -> client

struct EffectorError {
  std::string name;
  double position = 0.0;
  double orientation = 0.0;
  bool operator==(const EffectorError&) const = default;
};

struct PoseUpdate {
  std::vector<double> angles;
  std::vector<Vec3> positions;
  std::vector<EffectorError> effector_errors;
  bool operator==(const PoseUpdate&) const = default;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
  std::string termination;
  double solve_time = 0.0;
  bool operator==(const SolveStats&) const = default;
};

struct ErrorReply {
  std::string message;
  bool operator==(const ErrorReply&) const = default;
};

/// Topology echo: the skeleton document currently driven by the session.
struct SkeletonEcho {
  nlohmann::json skeleton;
  bool operator==(const SkeletonEcho&) const = default;
};

using ServerMessage = std::variant<PoseUpdate, SolveStats, ErrorReply, SkeletonEcho>;

std::string serialize(const ClientMessage& message);
std::string serialize(const ServerMessage& message);

nlohmann::json to_json(const ClientMessage& message);
nlohmann::json to_json(const ServerMessage& message);

/// Throw gsik::Error(Parse) on malformed text, unknown types or missing
/// fields.
ClientMessage parse_client(std::string_view text);
ServerMessage parse_server(std::string_view text);

std::string_view type_name(const ClientMessage& message);
std::string_view type_name(const ServerMessage& message);

}  // namespace gsik::wire
