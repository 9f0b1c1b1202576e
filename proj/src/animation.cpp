#include "gsik/animation.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "gsik/error.hpp"

namespace gsik {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string_view site_name(const Skeleton& skeleton, std::size_t site) {
  return skeleton.effectors().at(site).name;
}

}  // namespace

GaitFrameResult gait_frame(IkSession& session, GaitState& gait, double dt, const IkConfig& config) {
  GaitFrameResult out;
  out.step = advance(gait, dt);
  if (out.step.root_swap) {
    if (auto joint = foot_root_joint(session.skeleton(), out.step.state.rig, *out.step.root_swap)) {
      session.rebase(*joint);
    }
  }
  session.set_goals(out.step.goals);
  gait = out.step.state;
  out.report = session.solve_frame(config);
  return out;
}

Animation record_gait(const Skeleton& skeleton, const AnimationOptions& options) {
  if (!(options.duration > 0) || !(options.frame_rate > 0)) {
    throw Error(ErrorCode::InvalidArgument, "duration and frame_rate must be positive");
  }
  options.config.validate();

  Animation anim;
  anim.options = options;
  std::unordered_map<std::string, std::size_t> original;
  for (std::size_t i = 0; i < skeleton.joint_count(); ++i) {
    const Joint& j = skeleton.joints()[i];
    anim.joint_names.push_back(j.name);
    anim.parents.push_back(j.parent);
    anim.limits.push_back(j.limits);
    original.emplace(j.name, i);
  }

  IkSession session(std::make_shared<const Skeleton>(skeleton));
  GaitState gait = start_gait(session.skeleton(), session.pose(), options.params);

  const double dt = 1.0 / options.frame_rate;
  const auto count = static_cast<long>(std::llround(options.duration * options.frame_rate));

  auto capture = [&](double time, const std::vector<EffectorGoal>& goals) {
    const Skeleton& current = session.skeleton();
    AnimationFrame f;
    f.time = time;
    f.angles.assign(current.joint_count(), 0.0);
    f.positions.assign(current.joint_count(), Vec3::Zero());
    for (std::size_t k = 0; k < current.joint_count(); ++k) {
      const std::size_t o = original.at(current.joints()[k].name);
      f.angles[o] = session.pose().angles[static_cast<Eigen::Index>(k)];
      f.positions[o] = session.transforms().joints[k].position;
      if (!anim.limits[o].contains(f.angles[o]) || !std::isfinite(f.angles[o])) anim.limits_respected = false;
    }
    f.stance = gait.stance;
    f.stance_foot_position = effector_state(current, session.transforms(), gait.rig.foot_site(gait.stance)).position;
    for (const EffectorGoal& g : goals) f.goals.emplace(site_name(current, g.site), g.target_position);
    return f;
  };

  anim.frames.reserve(static_cast<std::size_t>(count) + 1);
  anim.frames.push_back(capture(0.0, gait_goals(gait)));
  for (long i = 1; i <= count; ++i) {
    const GaitFrameResult r = gait_frame(session, gait, dt, options.config);
    AnimationFrame f = capture(static_cast<double>(i) * dt, r.step.goals);
    f.root_swap = r.step.swaps > 0;
    f.inner_iterations = r.report.inner_iterations;
    f.task_error = r.report.task_error_after;
    if (f.root_swap) anim.swap_times.push_back(f.time);

    const AnimationFrame& prev = anim.frames.back();
    for (std::size_t j = 0; j < f.angles.size(); ++j) {
      anim.max_joint_speed = std::max(anim.max_joint_speed, std::abs(f.angles[j] - prev.angles[j]) / dt);
    }
    anim.frames.push_back(std::move(f));
  }
  return anim;
}

void write_animation(const Animation& animation, std::ostream& out) {
  const AnimationOptions& o = animation.options;
  json parents = json::array();
  for (const auto& p : animation.parents) parents.push_back(p ? json(*p) : json(nullptr));
  json limits = json::array();
  for (const auto& l : animation.limits) limits.push_back({l.lower, l.upper});

  json meta = {
      {"type", "meta"},
      {"joints", animation.joint_names},
      {"parents", parents},
      {"limits", limits},
      {"frame_rate", o.frame_rate},
      {"duration", o.duration},
      {"frames", animation.frames.size()},
      {"gait",
       {{"step_length", o.params.step_length},
        {"step_height", o.params.step_height},
        {"step_duration", o.params.step_duration},
        {"stance_foot", to_string(o.params.stance_foot)},
        {"body_sway", o.params.body_sway}}},
      {"root_swaps", animation.swap_times.size()},
      {"swap_times", animation.swap_times},
      {"max_joint_speed", animation.max_joint_speed},
      {"joint_speed_limit", o.joint_speed_limit},
      {"limits_respected", animation.limits_respected},
  };
  out << meta.dump() << '\n';

  for (const AnimationFrame& f : animation.frames) {
    json positions = json::array();
    for (const Vec3& p : f.positions) positions.push_back(vec_json(p));
    json goals = json::object();
    for (const auto& [name, p] : f.goals) goals[name] = vec_json(p);
    json line = {
        {"type", "frame"},
        {"time", f.time},
        {"stance", to_string(f.stance)},
        {"root_swap", f.root_swap},
        {"stance_foot", vec_json(f.stance_foot_position)},
        {"angles", f.angles},
        {"positions", positions},
        {"goals", goals},
        {"inner_iterations", f.inner_iterations},
        {"task_error", f.task_error},
    };
    out << line.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing animation stream");
}

void write_animation(const Animation& animation, const std::filesystem::path& path) {
  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  write_animation(animation, file);
  file.close();
  if (!file) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

}  // namespace gsik
