#include "gsik/wire.hpp"

#include <limits>
#include <string>

#include "gsik/error.hpp"

namespace gsik::wire {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::Parse, what); }

const json& field(const json& obj, const char* key, std::string_view type) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(std::string(type) + ": missing field '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where + " must be an integer");
  const auto i = v.get<long long>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) fail(where + " is out of range");
  return static_cast<int>(i);
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where + " must be a string");
  return v.get<std::string>();
}

template <std::size_t N>
std::array<double, N> as_array(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != N) fail(where + " must be an array of " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = as_number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

double number_or(const json& obj, const char* key, double fallback, std::string_view type) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, std::string(type) + "." + key);
}

template <class T>
void optional_into(const json& obj, const char* key, std::optional<T>& out, std::string_view type) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  const std::string where = std::string(type) + "." + key;
  if constexpr (std::is_same_v<T, int>) {
    out = as_int(*it, where);
  } else {
    out = as_number(*it, where);
  }
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

json parse_object(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed message: ") + e.what());
  }
  if (!doc.is_object()) fail("message must be a JSON object");
  return doc;
}

std::string type_of(const json& doc) { return as_string(field(doc, "type", "message"), "message.type"); }

}  // namespace

json to_json(const ClientMessage& message) {
  return std::visit(
      overloaded{
          [](const SetTarget& m) {
            json j = {{"type", "SetTarget"}, {"effector", m.effector}, {"position", m.position}};
            if (m.orientation) j["orientation"] = *m.orientation;
            return j;
          },
          [](const SetConfig& m) {
            json j = {{"type", "SetConfig"}};
            put_optional(j, "damping", m.damping);
            put_optional(j, "max_iterations", m.max_iterations);
            put_optional(j, "residual_tol", m.residual_tol);
            put_optional(j, "delta_x_tol", m.delta_x_tol);
            put_optional(j, "stagnation_tol", m.stagnation_tol);
            put_optional(j, "max_outer_iterations", m.max_outer_iterations);
            put_optional(j, "max_step", m.max_step);
            return j;
          },
          [](const LoadSkeleton& m) { return json{{"type", "LoadSkeleton"}, {"skeleton", m.skeleton}}; },
          [](const StartGait& m) {
            return json{{"type", "StartGait"},         {"step_length", m.step_length},
                        {"step_height", m.step_height}, {"step_duration", m.step_duration},
                        {"stance_foot", m.stance_foot}, {"body_sway", m.body_sway}};
          },
          [](const StopGait&) { return json{{"type", "StopGait"}}; },
          [](const RebaseRoot& m) { return json{{"type", "RebaseRoot"}, {"joint", m.joint}}; },
      },
      message);
}

json to_json(const ServerMessage& message) {
  return std::visit(
      overloaded{
          [](const PoseUpdate& m) {
            json errors = json::array();
            for (const EffectorError& e : m.effector_errors) {
              errors.push_back({{"name", e.name}, {"position", e.position}, {"orientation", e.orientation}});
            }
            return json{{"type", "PoseUpdate"},
                        {"angles", m.angles},
                        {"positions", m.positions},
                        {"effector_errors", errors}};
          },
          [](const SolveStats& m) {
            return json{{"type", "SolveStats"},
                        {"iterations", m.iterations},
                        {"residual", m.residual},
                        {"termination", m.termination},
                        {"solve_time", m.solve_time}};
          },
          [](const ErrorReply& m) { return json{{"type", "Error"}, {"message", m.message}}; },
          [](const SkeletonEcho& m) { return json{{"type", "Skeleton"}, {"skeleton", m.skeleton}}; },
      },
      message);
}

std::string serialize(const ClientMessage& message) { return to_json(message).dump(); }
std::string serialize(const ServerMessage& message) { return to_json(message).dump(); }

ClientMessage parse_client(std::string_view text) {
  const json doc = parse_object(text);
  const std::string type = type_of(doc);
  if (type == "SetTarget") {
    SetTarget m;
    m.effector = as_string(field(doc, "effector", type), "SetTarget.effector");
    m.position = as_array<3>(field(doc, "position", type), "SetTarget.position");
    if (auto it = doc.find("orientation"); it != doc.end() && !it->is_null()) {
      m.orientation = as_array<4>(*it, "SetTarget.orientation");
    }
    return m;
  }
  if (type == "SetConfig") {
    SetConfig m;
    optional_into(doc, "damping", m.damping, type);
    optional_into(doc, "max_iterations", m.max_iterations, type);
    optional_into(doc, "residual_tol", m.residual_tol, type);
    optional_into(doc, "delta_x_tol", m.delta_x_tol, type);
    optional_into(doc, "stagnation_tol", m.stagnation_tol, type);
    optional_into(doc, "max_outer_iterations", m.max_outer_iterations, type);
    optional_into(doc, "max_step", m.max_step, type);
    return m;
  }
  if (type == "LoadSkeleton") return LoadSkeleton{field(doc, "skeleton", type)};
  if (type == "StartGait") {
    StartGait m;
    m.step_length = number_or(doc, "step_length", m.step_length, type);
    m.step_height = number_or(doc, "step_height", m.step_height, type);
    m.step_duration = number_or(doc, "step_duration", m.step_duration, type);
    m.body_sway = number_or(doc, "body_sway", m.body_sway, type);
    if (auto it = doc.find("stance_foot"); it != doc.end()) m.stance_foot = as_string(*it, "StartGait.stance_foot");
    return m;
  }
  if (type == "StopGait") return StopGait{};
  if (type == "RebaseRoot") return RebaseRoot{as_string(field(doc, "joint", type), "RebaseRoot.joint")};
  fail("unknown client message type '" + type + "'");
}

ServerMessage parse_server(std::string_view text) {
  const json doc = parse_object(text);
  const std::string type = type_of(doc);
  if (type == "PoseUpdate") {
    PoseUpdate m;
    const json& angles = field(doc, "angles", type);
    const json& positions = field(doc, "positions", type);
    const json& errors = field(doc, "effector_errors", type);
    if (!angles.is_array() || !positions.is_array() || !errors.is_array()) {
      fail("PoseUpdate: angles, positions and effector_errors must be arrays");
    }
    for (std::size_t i = 0; i < angles.size(); ++i) {
      m.angles.push_back(as_number(angles[i], "PoseUpdate.angles[" + std::to_string(i) + "]"));
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
      m.positions.push_back(as_array<3>(positions[i], "PoseUpdate.positions[" + std::to_string(i) + "]"));
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
      const std::string where = "PoseUpdate.effector_errors[" + std::to_string(i) + "]";
      if (!errors[i].is_object()) fail(where + " must be an object");
      m.effector_errors.push_back({as_string(field(errors[i], "name", where), where + ".name"),
                                   as_number(field(errors[i], "position", where), where + ".position"),
                                   as_number(field(errors[i], "orientation", where), where + ".orientation")});
    }
    return m;
  }
  if (type == "SolveStats") {
    return SolveStats{as_int(field(doc, "iterations", type), "SolveStats.iterations"),
                      as_number(field(doc, "residual", type), "SolveStats.residual"),
                      as_string(field(doc, "termination", type), "SolveStats.termination"),
                      as_number(field(doc, "solve_time", type), "SolveStats.solve_time")};
  }
  if (type == "Error") return ErrorReply{as_string(field(doc, "message", type), "Error.message")};
  if (type == "Skeleton") return SkeletonEcho{field(doc, "skeleton", type)};
  fail("unknown server message type '" + type + "'");
}

std::string_view type_name(const ClientMessage& message) {
  static constexpr std::string_view names[] = {"SetTarget", "SetConfig", "LoadSkeleton",
                                                "StartGait", "StopGait",  "RebaseRoot"};
  return names[message.index()];
}

std::string_view type_name(const ServerMessage& message) {
  static constexpr std::string_view names[] = {"PoseUpdate", "SolveStats", "Error", "Skeleton"};
  return names[message.index()];
}

}  // namespace gsik::wire
