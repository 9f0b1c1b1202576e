#include "gsik/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gsik/error.hpp"

namespace gsik {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Parse, where + ": " + what);
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ", column " +
                                      std::to_string(column) + ": " + e.what());
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(where, "expected a finite number");
  return d;
}

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) schema_error(where, "expected an array of 3 numbers");
  return {number(v[0], where + "[0]"), number(v[1], where + "[1]"), number(v[2], where + "[2]")};
}

std::optional<std::size_t> optional_index(const json& v, const std::string& where) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    schema_error(where, "expected a non-negative integer or null");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "failed reading '" + path.string() + "'");
  return ss.str();
}

Mat3 rotation_from_quaternion(const json& q, const std::string& where) {
  if (!q.is_array() || q.size() != 4) schema_error(where, "expected a quaternion [x, y, z, w]");
  Eigen::Quaterniond quat(number(q[3], where + "[3]"), number(q[0], where + "[0]"),
                          number(q[1], where + "[1]"), number(q[2], where + "[2]"));
  const double norm = quat.norm();
  if (!(norm > 1e-12)) schema_error(where, "quaternion has zero norm");
  quat.coeffs() /= norm;
  return quat.toRotationMatrix();
}

json quaternion_to_json(const Mat3& rotation) {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  return json::array({q.x(), q.y(), q.z(), q.w()});
}

Skeleton skeleton_from_json(std::string_view text) { return skeleton_from_json(parse_document(text)); }

Skeleton skeleton_from_json(const json& doc) {
  if (!doc.is_object()) schema_error("$", "expected an object");

  RigidTransform root;
  if (auto it = doc.find("root"); it != doc.end()) {
    if (!it->is_object()) schema_error("root", "expected an object");
    if (it->contains("position")) root.position = vec3((*it)["position"], "root.position");
    if (it->contains("orientation")) {
      root.rotation = rotation_from_quaternion((*it)["orientation"], "root.orientation");
    }
  }

  const json& jarr = field(doc, "joints", "$");
  if (!jarr.is_array()) schema_error("joints", "expected an array");
  std::vector<Joint> joints;
  joints.reserve(jarr.size());
  for (std::size_t i = 0; i < jarr.size(); ++i) {
    const std::string where = "joints[" + std::to_string(i) + "]";
    const json& j = jarr[i];
    Joint joint;
    const json& name = field(j, "name", where);
    if (!name.is_string()) schema_error(where + ".name", "expected a string");
    joint.name = name.get<std::string>();
    joint.parent = optional_index(field(j, "parent", where), where + ".parent");
    joint.axis = vec3(field(j, "axis", where), where + ".axis");
    joint.offset = vec3(field(j, "offset", where), where + ".offset");
    const json& lim = field(j, "limits", where);
    if (!lim.is_array() || lim.size() != 2) schema_error(where + ".limits", "expected [lower, upper]");
    joint.limits = {number(lim[0], where + ".limits[0]"), number(lim[1], where + ".limits[1]")};
    if (j.contains("rest")) joint.rest = number(j["rest"], where + ".rest");
    joints.push_back(std::move(joint));
  }

  std::vector<EffectorSite> sites;
  const json& earr = field(doc, "effectors", "$");
  if (!earr.is_array()) schema_error("effectors", "expected an array");
  for (std::size_t i = 0; i < earr.size(); ++i) {
    const std::string where = "effectors[" + std::to_string(i) + "]";
    const json& e = earr[i];
    EffectorSite site;
    const json& name = field(e, "name", where);
    if (!name.is_string()) schema_error(where + ".name", "expected a string");
    site.name = name.get<std::string>();
    site.joint = optional_index(field(e, "joint", where), where + ".joint");
    site.offset = vec3(field(e, "offset", where), where + ".offset");
    sites.push_back(std::move(site));
  }

  return Skeleton(std::move(joints), std::move(sites), root);
}

Skeleton load_skeleton(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return skeleton_from_json(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

json skeleton_to_json(const Skeleton& skeleton) {
  json joints = json::array();
  for (const Joint& j : skeleton.joints()) {
    json o = {{"name", j.name},
              {"parent", j.parent ? json(*j.parent) : json(nullptr)},
              {"axis", vec_json(j.axis)},
              {"offset", vec_json(j.offset)},
              {"limits", json::array({j.limits.lower, j.limits.upper})}};
    if (j.rest != 0.0) o["rest"] = j.rest;
    joints.push_back(std::move(o));
  }
  json effectors = json::array();
  for (const EffectorSite& s : skeleton.effectors()) {
    effectors.push_back({{"name", s.name},
                         {"joint", s.joint ? json(*s.joint) : json(nullptr)},
                         {"offset", vec_json(s.offset)}});
  }
  return {{"units", {{"length", "m"}, {"angle", "rad"}}},
          {"root",
           {{"position", vec_json(skeleton.root_transform().position)},
            {"orientation", quaternion_to_json(skeleton.root_transform().rotation)}}},
          {"joints", std::move(joints)},
          {"effectors", std::move(effectors)}};
}

std::vector<EffectorGoal> goals_from_json(const Skeleton& skeleton, std::string_view text) {
  return goals_from_json(skeleton, parse_document(text));
}

std::vector<EffectorGoal> goals_from_json(const Skeleton& skeleton, const json& doc) {
  const json& arr = field(doc, "goals", "$");
  if (!arr.is_array()) schema_error("goals", "expected an array");
  std::vector<EffectorGoal> goals;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "goals[" + std::to_string(i) + "]";
    const json& g = arr[i];
    const json& name = field(g, "effector", where);
    if (!name.is_string()) schema_error(where + ".effector", "expected a string");
    auto site = skeleton.find_effector(name.get<std::string>());
    if (!site) {
      throw Error(ErrorCode::Index, where + ".effector: unknown effector '" + name.get<std::string>() + "'");
    }
    EffectorGoal goal;
    goal.site = *site;
    goal.target_position = vec3(field(g, "position", where), where + ".position");
    if (g.contains("orientation") && !g["orientation"].is_null()) {
      goal.target_orientation = rotation_from_quaternion(g["orientation"], where + ".orientation");
      goal.orientation_enabled = true;
    }
    if (g.contains("weight")) {
      goal.weight = number(g["weight"], where + ".weight");
      if (goal.weight < 0) schema_error(where + ".weight", "must be non-negative");
    }
    goals.push_back(goal);
  }
  return goals;
}

std::vector<EffectorGoal> load_goals(const Skeleton& skeleton, const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return goals_from_json(skeleton, text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

json goals_to_json(const Skeleton& skeleton, const std::vector<EffectorGoal>& goals) {
  json arr = json::array();
  for (const EffectorGoal& g : goals) {
    json o = {{"effector", skeleton.effectors().at(g.site).name},
              {"position", vec_json(g.target_position)}};
    if (g.orientation_enabled) o["orientation"] = quaternion_to_json(g.target_orientation);
    if (g.weight != 1.0) o["weight"] = g.weight;
    arr.push_back(std::move(o));
  }
  return {{"goals", std::move(arr)}};
}

}  // namespace gsik
