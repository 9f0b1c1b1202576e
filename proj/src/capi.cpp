#include "gsik/gsik.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "gsik/animation.hpp"
#include "gsik/bench.hpp"
#include "gsik/error.hpp"
#include "gsik/io.hpp"
#include "gsik/service.hpp"

struct gsik_skeleton {
  std::shared_ptr<const gsik::Skeleton> skeleton;
};

struct gsik_session {
  gsik::IkSession session;
};

struct gsik_service {
  gsik::ServiceSession service;
};

struct gsik_server {
  gsik::Server server;
};

namespace {

thread_local std::string last_error;

gsik_status fail(gsik_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
gsik_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return GSIK_OK;
  } catch (const gsik::Error& e) {
    return fail(static_cast<gsik_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GSIK_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GSIK_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(GSIK_ERROR_INTERNAL, "unknown exception");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw gsik::Error(gsik::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

gsik::IkConfig to_config(const gsik_config* c) {
  gsik::IkConfig config;
  if (!c) return config;
  config.damping = c->damping;
  config.solver.max_iterations = c->max_iterations;
  config.solver.residual_tol = c->residual_tol;
  config.solver.delta_x_tol = c->delta_x_tol;
  config.solver.stagnation_tol = c->stagnation_tol;
  config.max_outer_iterations = c->max_outer_iterations;
  config.max_step = c->max_step;
  config.validate();
  return config;
}

gsik_termination to_c(gsik::Termination t) {
  switch (t) {
    case gsik::Termination::MaxIterations: return GSIK_TERMINATION_MAX_ITERATIONS;
    case gsik::Termination::ResidualBelowTol: return GSIK_TERMINATION_RESIDUAL;
    case gsik::Termination::DeltaXBelowTol: return GSIK_TERMINATION_DELTA_X;
    case gsik::Termination::Stagnated: return GSIK_TERMINATION_STAGNATED;
  }
  return GSIK_TERMINATION_NONE;
}

std::string replies_json(const std::vector<gsik::wire::ServerMessage>& replies) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : replies) out.push_back(gsik::wire::to_json(r));
  return out.dump();
}

nlohmann::json vec_json(const gsik::Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

}  // namespace

extern "C" {

const char* gsik_version(void) { return "0.1.0"; }

const char* gsik_last_error(void) { return last_error.c_str(); }

const char* gsik_status_string(gsik_status status) {
  switch (status) {
    case GSIK_OK: return "ok";
    case GSIK_ERROR_INTERNAL: return "internal error";
    default:
      if (status >= GSIK_ERROR_INVALID_ARGUMENT && status <= GSIK_ERROR_IO) {
        return gsik::to_string(static_cast<gsik::ErrorCode>(static_cast<int>(status)));
      }
      return "unknown status";
  }
}

const char* gsik_termination_string(gsik_termination t) {
  switch (t) {
    case GSIK_TERMINATION_MAX_ITERATIONS: return "max_iterations";
    case GSIK_TERMINATION_RESIDUAL: return "residual_below_tol";
    case GSIK_TERMINATION_DELTA_X: return "delta_x_below_tol";
    case GSIK_TERMINATION_STAGNATED: return "stagnated";
    case GSIK_TERMINATION_NONE: return "converged";
  }
  return "unknown";
}

void gsik_string_free(char* s) { std::free(s); }

gsik_status gsik_skeleton_default_biped(gsik_skeleton** out) {
  return guarded([&] {
    require(out, "out");
    *out = new gsik_skeleton{std::make_shared<const gsik::Skeleton>(gsik::build_default_biped())};
  });
}

gsik_status gsik_skeleton_from_json(const char* json, gsik_skeleton** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new gsik_skeleton{std::make_shared<const gsik::Skeleton>(gsik::skeleton_from_json(std::string_view(json)))};
  });
}

gsik_status gsik_skeleton_load(const char* path, gsik_skeleton** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new gsik_skeleton{std::make_shared<const gsik::Skeleton>(gsik::load_skeleton(path))};
  });
}

void gsik_skeleton_free(gsik_skeleton* skeleton) { delete skeleton; }

size_t gsik_skeleton_joint_count(const gsik_skeleton* skeleton) {
  return skeleton ? skeleton->skeleton->joint_count() : 0;
}

size_t gsik_skeleton_effector_count(const gsik_skeleton* skeleton) {
  return skeleton ? skeleton->skeleton->effector_count() : 0;
}

gsik_status gsik_skeleton_to_json(const gsik_skeleton* skeleton, char** out) {
  return guarded([&] {
    require(skeleton, "skeleton");
    require(out, "out");
    *out = duplicate(gsik::skeleton_to_json(*skeleton->skeleton).dump(2));
  });
}

void gsik_config_default(gsik_config* c) {
  if (!c) return;
  const gsik::IkConfig d;
  *c = {d.damping,
        d.solver.max_iterations,
        d.solver.residual_tol,
        d.solver.delta_x_tol,
        d.solver.stagnation_tol,
        d.max_outer_iterations,
        d.max_step};
}

void gsik_gait_params_default(gsik_gait_params* p) {
  if (!p) return;
  const gsik::GaitParams d;
  *p = {d.step_length, d.step_height, d.step_duration, d.body_sway,
        d.stance_foot == gsik::Foot::Left ? GSIK_FOOT_LEFT : GSIK_FOOT_RIGHT};
}

gsik_status gsik_session_create(const gsik_skeleton* skeleton, gsik_session** out) {
  return guarded([&] {
    require(skeleton, "skeleton");
    require(out, "out");
    *out = new gsik_session{gsik::IkSession(skeleton->skeleton)};
  });
}

void gsik_session_free(gsik_session* session) { delete session; }

gsik_status gsik_session_set_goals_json(gsik_session* session, const char* goals_json) {
  return guarded([&] {
    require(session, "session");
    require(goals_json, "goals_json");
    session->session.set_goals(gsik::goals_from_json(session->session.skeleton(), std::string_view(goals_json)));
  });
}

gsik_status gsik_session_pin_effectors(gsik_session* session) {
  return guarded([&] {
    require(session, "session");
    session->session.set_goals(session->session.current_effector_goals(false));
  });
}

gsik_status gsik_session_solve_frame(gsik_session* session, const gsik_config* config, gsik_frame_report* report) {
  return guarded([&] {
    require(session, "session");
    const gsik::FrameReport r = session->session.solve_frame(to_config(config));
    if (report) {
      report->ok = r.ok ? 1 : 0;
      report->outer_iterations = r.outer_iterations;
      report->inner_iterations = r.inner_iterations;
      report->residual = r.outer_iterations > 0 ? r.solve.residual : 0.0;
      report->termination = r.outer_iterations > 0 ? to_c(r.solve.termination) : GSIK_TERMINATION_NONE;
      report->task_error_before = r.task_error_before;
      report->task_error_after = r.task_error_after;
      report->step_norm = r.step_norm;
      report->solve_seconds = r.solve_seconds;
    }
    if (!r.ok) throw gsik::Error(gsik::ErrorCode::NonFinite, r.failure);
  });
}

size_t gsik_session_joint_count(const gsik_session* session) {
  return session ? session->session.skeleton().joint_count() : 0;
}

gsik_status gsik_session_get_angles(const gsik_session* session, double* angles, size_t count) {
  return guarded([&] {
    require(session, "session");
    require(angles, "angles");
    const auto& a = session->session.pose().angles;
    if (count != static_cast<size_t>(a.size())) {
      throw gsik::Error(gsik::ErrorCode::Dimension,
                        "expected " + std::to_string(a.size()) + " angles, got room for " + std::to_string(count));
    }
    for (size_t i = 0; i < count; ++i) angles[i] = a[static_cast<Eigen::Index>(i)];
  });
}

gsik_status gsik_session_set_angles(gsik_session* session, const double* angles, size_t count) {
  return guarded([&] {
    require(session, "session");
    require(angles, "angles");
    gsik::Pose pose;
    pose.angles = Eigen::Map<const gsik::VecX>(angles, static_cast<Eigen::Index>(count));
    session->session.set_pose(std::move(pose));
  });
}

gsik_status gsik_session_rebase(gsik_session* session, const char* joint_name) {
  return guarded([&] {
    require(session, "session");
    require(joint_name, "joint_name");
    const auto j = session->session.skeleton().find_joint(joint_name);
    if (!j) throw gsik::Error(gsik::ErrorCode::Index, std::string("unknown joint '") + joint_name + "'");
    session->session.rebase(*j);
  });
}

gsik_status gsik_session_pose_json(const gsik_session* session, char** out) {
  return guarded([&] {
    require(session, "session");
    require(out, "out");
    const gsik::IkSession& s = session->session;
    const gsik::Skeleton& skel = s.skeleton();
    nlohmann::json names = nlohmann::json::array(), angles = nlohmann::json::array(),
                   positions = nlohmann::json::array(), effectors = nlohmann::json::array();
    for (size_t i = 0; i < skel.joint_count(); ++i) {
      names.push_back(skel.joints()[i].name);
      angles.push_back(s.pose().angles[static_cast<Eigen::Index>(i)]);
      positions.push_back(vec_json(s.transforms().joints[i].position));
    }
    for (size_t e = 0; e < skel.effector_count(); ++e) {
      const gsik::EffectorState st = gsik::effector_state(skel, s.transforms(), e);
      effectors.push_back({{"name", skel.effectors()[e].name},
                           {"position", vec_json(st.position)},
                           {"orientation", gsik::quaternion_to_json(st.orientation)}});
    }
    nlohmann::json doc = {{"root", skel.joints()[skel.root_index()].name},
                          {"joints", names},
                          {"angles", angles},
                          {"positions", positions},
                          {"effectors", effectors}};
    *out = duplicate(doc.dump());
  });
}

gsik_status gsik_gait_export(const gsik_skeleton* skeleton, const gsik_gait_params* params, const gsik_config* config,
                             double duration, double frame_rate, const char* path, gsik_animation_summary* summary) {
  return guarded([&] {
    require(skeleton, "skeleton");
    require(path, "path");
    gsik::AnimationOptions options;
    if (params) {
      options.params.step_length = params->step_length;
      options.params.step_height = params->step_height;
      options.params.step_duration = params->step_duration;
      options.params.body_sway = params->body_sway;
      options.params.stance_foot = params->stance_foot == GSIK_FOOT_LEFT ? gsik::Foot::Left : gsik::Foot::Right;
    }
    options.params.validate();
    options.config = to_config(config);
    options.duration = duration;
    options.frame_rate = frame_rate;
    const gsik::Animation anim = gsik::record_gait(*skeleton->skeleton, options);
    gsik::write_animation(anim, std::filesystem::path(path));
    if (summary) {
      summary->frames = anim.frames.size();
      summary->root_swaps = static_cast<int>(anim.swap_times.size());
      summary->max_joint_speed = anim.max_joint_speed;
      summary->limits_respected = anim.limits_respected ? 1 : 0;
    }
  });
}

void gsik_bench_options_default(gsik_bench_options* o) {
  if (!o) return;
  static const int budgets[] = {1, 5, 20};
  const gsik::BenchOptions d;
  o->budgets = budgets;
  o->budget_count = 3;
  o->frames = d.frames;
  o->script = GSIK_SCRIPT_SMOOTH;
  o->seed = d.seed;
  o->warm_start = d.warm_start ? 1 : 0;
  gsik_config_default(&o->config);
}

gsik_status gsik_bench_run(const gsik_skeleton* skeleton, const gsik_bench_options* options, char** table,
                           char** csv) {
  return guarded([&] {
    require(skeleton, "skeleton");
    require(options, "options");
    if (options->budget_count > 0) require(options->budgets, "options.budgets");
    gsik::BenchOptions o;
    o.budgets.assign(options->budgets, options->budgets + options->budget_count);
    o.frames = options->frames;
    switch (options->script) {
      case GSIK_SCRIPT_SMOOTH: o.script = gsik::MotionScript::Smooth; break;
      case GSIK_SCRIPT_STATIONARY: o.script = gsik::MotionScript::Stationary; break;
      case GSIK_SCRIPT_SPORADIC: o.script = gsik::MotionScript::Sporadic; break;
      default: throw gsik::Error(gsik::ErrorCode::InvalidArgument, "unknown motion script");
    }
    o.seed = options->seed;
    o.warm_start = options->warm_start != 0;
    o.config = to_config(&options->config);
    const auto results = gsik::run_bench(*skeleton->skeleton, o);
    std::string t = gsik::bench_table(results, o), c = gsik::bench_csv(results);
    char* t_out = table ? duplicate(t) : nullptr;
    if (table) *table = t_out;
    if (csv) *csv = duplicate(c);
  });
}

gsik_status gsik_service_create(const gsik_skeleton* skeleton, gsik_service** out) {
  return guarded([&] {
    require(skeleton, "skeleton");
    require(out, "out");
    *out = new gsik_service{gsik::ServiceSession(skeleton->skeleton)};
  });
}

void gsik_service_free(gsik_service* service) { delete service; }

gsik_status gsik_service_greeting(const gsik_service* service, char** replies) {
  return guarded([&] {
    require(service, "service");
    require(replies, "replies");
    *replies = duplicate(replies_json(service->service.greeting()));
  });
}

gsik_status gsik_service_handle(gsik_service* service, const char* message, char** replies) {
  return guarded([&] {
    require(service, "service");
    require(message, "message");
    require(replies, "replies");
    *replies = duplicate(replies_json(service->service.handle_text(message)));
  });
}

gsik_status gsik_service_tick(gsik_service* service, double dt, char** replies) {
  return guarded([&] {
    require(service, "service");
    require(replies, "replies");
    *replies = duplicate(replies_json(service->service.tick(dt)));
  });
}

void gsik_server_options_default(gsik_server_options* o) {
  if (!o) return;
  const gsik::ServerOptions d;
  o->address = nullptr;
  o->port = d.port;
  o->static_dir = nullptr;
  o->tick_hz = d.tick_hz;
  o->threads = d.threads;
  o->handle_signals = 0;
}

gsik_status gsik_server_start(const gsik_skeleton* skeleton, const gsik_server_options* options, gsik_server** out) {
  return guarded([&] {
    require(skeleton, "skeleton");
    require(out, "out");
    gsik::ServerOptions o;
    if (options) {
      if (options->address) o.address = options->address;
      o.port = options->port;
      if (options->static_dir) o.static_dir = options->static_dir;
      o.tick_hz = options->tick_hz;
      o.threads = options->threads;
      o.handle_signals = options->handle_signals != 0;
    }
    std::unique_ptr<gsik_server> server(new gsik_server{gsik::Server(skeleton->skeleton, o)});
    server->server.start();
    *out = server.release();
  });
}

unsigned short gsik_server_port(const gsik_server* server) { return server ? server->server.port() : 0; }

uint64_t gsik_server_dropped_ticks(const gsik_server* server) {
  return server ? server->server.dropped_ticks() : 0;
}

void gsik_server_wait(gsik_server* server) {
  if (server) server->server.wait();
}

void gsik_server_stop(gsik_server* server) {
  if (server) server->server.stop();
}

void gsik_server_free(gsik_server* server) { delete server; }

}  // extern "C"
