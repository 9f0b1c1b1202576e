#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsik/gsik.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kSolver = 2, kIo = 3 };

struct Failure {
  int code;
  std::string message;
};

int exit_for(gsik_status s) {
  switch (s) {
    case GSIK_OK: return kOk;
    case GSIK_ERROR_PARSE:
    case GSIK_ERROR_IO:
    case GSIK_ERROR_INDEX: return kIo;
    case GSIK_ERROR_INVALID_ARGUMENT: return kUsage;
    default: return kSolver;
  }
}

void check(gsik_status s, const std::string& context) {
  if (s != GSIK_OK) throw Failure{exit_for(s), context + ": " + gsik_last_error()};
}

struct Freer {
  void operator()(gsik_skeleton* p) const { gsik_skeleton_free(p); }
  void operator()(gsik_session* p) const { gsik_session_free(p); }
  void operator()(gsik_server* p) const { gsik_server_free(p); }
  void operator()(char* p) const { gsik_string_free(p); }
};
template <class T>
using Owned = std::unique_ptr<T, Freer>;

std::string take(char* s) { return std::string(Owned<char>(s).get()); }

struct Common {
  std::string skeleton;
  double delta = 0.001;
  int max_iterations = 20;
  double residual_tol = 1e-6;
  int max_outer = 3;
  std::uint64_t seed = 1;

  gsik_config config() const {
    gsik_config c;
    gsik_config_default(&c);
    c.damping = delta;
    c.max_iterations = max_iterations;
    c.residual_tol = residual_tol;
    c.max_outer_iterations = max_outer;
    return c;
  }

  Owned<gsik_skeleton> load() const {
    gsik_skeleton* s = nullptr;
    if (skeleton.empty()) {
      check(gsik_skeleton_default_biped(&s), "default biped");
    } else {
      check(gsik_skeleton_load(skeleton.c_str(), &s), "skeleton");
    }
    return Owned<gsik_skeleton>(s);
  }
};

struct SolveArgs {
  std::string goals;
  int frames = 500;
  double settle_step = 1e-6;
};

int cmd_solve(const Common& common, const SolveArgs& args) {
  const auto skeleton = common.load();
  gsik_session* raw = nullptr;
  check(gsik_session_create(skeleton.get(), &raw), "session");
  Owned<gsik_session> session(raw);

  std::ifstream in(args.goals);
  if (!in) throw Failure{kIo, "goals: cannot open '" + args.goals + "'"};
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  check(gsik_session_set_goals_json(session.get(), text.c_str()), "goals " + args.goals);

  const gsik_config config = common.config();
  gsik_frame_report report{};
  std::string status = "frame_limit";
  int frames = 0, sweeps = 0;
  for (; frames < args.frames; ) {
    const gsik_status s = gsik_session_solve_frame(session.get(), &config, &report);
    ++frames;
    if (s == GSIK_ERROR_INVALID_ARGUMENT) check(s, "solve");
    if (s != GSIK_OK || !report.ok) {
      if (s != GSIK_OK) std::cerr << "solve: " << gsik_last_error() << "\n";
      status = "solver_failure";
      break;
    }
    sweeps += report.inner_iterations;
    if (report.task_error_after < config.residual_tol) {
      status = "converged";
      break;
    }
    if (report.outer_iterations > 0 && report.step_norm < args.settle_step) {
      status = "best_reach";
      break;
    }
  }

  nlohmann::json out = nlohmann::json::parse(take([&] {
    char* p = nullptr;
    check(gsik_session_pose_json(session.get(), &p), "pose");
    return p;
  }()));
  out["status"] = status;
  out["frames"] = frames;
  out["inner_iterations"] = sweeps;
  out["task_error"] = report.task_error_after;
  out["residual"] = report.residual;
  out["termination"] = gsik_termination_string(report.termination);
  std::cout << out.dump(2) << "\n";
  return status == "converged" || status == "best_reach" ? kOk : kSolver;
}

struct BenchArgs {
  std::vector<int> budgets{1, 5, 20};
  int frames = 300;
  std::string script = "smooth";
  std::string csv;
  bool cold = false;
};

int cmd_bench(const Common& common, const BenchArgs& args) {
  const auto skeleton = common.load();
  gsik_bench_options options;
  gsik_bench_options_default(&options);
  options.budgets = args.budgets.data();
  options.budget_count = args.budgets.size();
  options.frames = args.frames;
  options.seed = common.seed;
  options.warm_start = args.cold ? 0 : 1;
  options.config = common.config();
  if (args.script == "smooth") {
    options.script = GSIK_SCRIPT_SMOOTH;
  } else if (args.script == "stationary") {
    options.script = GSIK_SCRIPT_STATIONARY;
  } else {
    options.script = GSIK_SCRIPT_SPORADIC;
  }
  char* table = nullptr;
  char* csv = nullptr;
  check(gsik_bench_run(skeleton.get(), &options, &table, &csv), "bench");
  const std::string table_text = take(table), csv_text = take(csv);
  std::cout << table_text;
  if (args.csv == "-") {
    std::cout << csv_text;
  } else if (!args.csv.empty()) {
    std::ofstream f(args.csv);
    f << csv_text;
    if (!f) throw Failure{kIo, "cannot write '" + args.csv + "'"};
  }
  return kOk;
}

struct GaitArgs {
  double duration = 10.0;
  double frame_rate = 60.0;
  std::string output;
  gsik_gait_params params{};
  std::string stance = "right";
};

int cmd_gait(const Common& common, GaitArgs args) {
  const auto skeleton = common.load();
  args.params.stance_foot = args.stance == "left" ? GSIK_FOOT_LEFT : GSIK_FOOT_RIGHT;
  const gsik_config config = common.config();
  gsik_animation_summary summary{};
  check(gsik_gait_export(skeleton.get(), &args.params, &config, args.duration, args.frame_rate, args.output.c_str(),
                         &summary),
        "gait");
  std::cout << "wrote " << summary.frames << " frames to " << args.output << "\n"
            << "root swaps: " << summary.root_swaps << "\n"
            << "max joint speed: " << summary.max_joint_speed << " rad/s\n"
            << "joint limits respected: " << (summary.limits_respected ? "yes" : "no") << "\n";
  return kOk;
}

struct ServeArgs {
  int port = 8080;
  std::string address = "0.0.0.0";
  std::string static_dir;
  double tick_hz = 60.0;
  int threads = 2;
};

int cmd_serve(const Common& common, const ServeArgs& args) {
  const auto skeleton = common.load();
  gsik_server_options options;
  gsik_server_options_default(&options);
  options.address = args.address.c_str();
  options.port = static_cast<unsigned short>(args.port);
  options.static_dir = args.static_dir.empty() ? nullptr : args.static_dir.c_str();
  options.tick_hz = args.tick_hz;
  options.threads = args.threads;
  options.handle_signals = 1;
  gsik_server* raw = nullptr;
  check(gsik_server_start(skeleton.get(), &options, &raw), "serve");
  Owned<gsik_server> server(raw);
  std::cout << "listening on " << args.address << ":" << gsik_server_port(server.get()) << std::endl;
  gsik_server_wait(server.get());
  std::cout << "stopped (" << gsik_server_dropped_ticks(server.get()) << " dropped ticks)" << std::endl;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time character IK with projected Gauss-Seidel"};
  app.set_version_flag("--version", gsik_version());
  app.require_subcommand(1);

  Common common;
  app.add_option("--skeleton", common.skeleton, "Skeleton JSON (default: built-in biped)")->check(CLI::ExistingFile);
  app.add_option("--delta", common.delta, "Damping added to the diagonal of J^T J")->capture_default_str();
  app.add_option("--max-iterations", common.max_iterations, "Gauss-Seidel sweeps per solve")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--residual-tol", common.residual_tol, "Stop when ||Ax - b|| or the task error falls below")
      ->capture_default_str();
  app.add_option("--max-outer", common.max_outer, "Jacobian rebuilds per frame")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", common.seed, "Seed for scripted motion")->capture_default_str();

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a goals file and print the final pose as JSON");
  solve_cmd->add_option("--goals", solve.goals, "Goals JSON")->required();
  solve_cmd->add_option("--frames", solve.frames, "Frame cap")->capture_default_str()->check(CLI::PositiveNumber);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time solver frames across iteration budgets");
  bench_cmd->add_option("--budgets", bench.budgets, "Iteration budgets")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--frames", bench.frames, "Frames per budget")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--script", bench.script, "Motion script")
      ->capture_default_str()
      ->check(CLI::IsMember({"smooth", "stationary", "sporadic"}));
  bench_cmd->add_option("--csv", bench.csv, "Also write CSV to this path ('-' for stdout)");
  bench_cmd->add_flag("--cold", bench.cold, "Disable warm starting");

  GaitArgs gait;
  gsik_gait_params_default(&gait.params);
  auto* gait_cmd = app.add_subcommand("gait", "Record a walking animation as JSON lines");
  gait_cmd->add_option("--duration", gait.duration, "Seconds")->capture_default_str()->check(CLI::PositiveNumber);
  gait_cmd->add_option("--frame-rate", gait.frame_rate, "Frames per second")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gait_cmd->add_option("--output", gait.output, "Animation file")->required();
  gait_cmd->add_option("--step-length", gait.params.step_length)->capture_default_str();
  gait_cmd->add_option("--step-height", gait.params.step_height)->capture_default_str();
  gait_cmd->add_option("--step-duration", gait.params.step_duration)->capture_default_str();
  gait_cmd->add_option("--body-sway", gait.params.body_sway)->capture_default_str();
  gait_cmd->add_option("--stance-foot", gait.stance)->capture_default_str()->check(CLI::IsMember({"left", "right"}));

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Host the live pose-editing service");
  serve_cmd->add_option("--port", serve.port, "TCP port (0 picks one)")->capture_default_str()->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--address", serve.address)->capture_default_str();
  serve_cmd->add_option("--static-dir", serve.static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--tick-hz", serve.tick_hz)->capture_default_str()->check(CLI::PositiveNumber);
  serve_cmd->add_option("--threads", serve.threads)->capture_default_str()->check(CLI::PositiveNumber);

  for (auto* sub : {solve_cmd, bench_cmd, gait_cmd, serve_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(common, solve);
    if (*bench_cmd) return cmd_bench(common, bench);
    if (*gait_cmd) return cmd_gait(common, gait);
    if (*serve_cmd) return cmd_serve(common, serve);
  } catch (const Failure& f) {
    std::cerr << "gsik: " << f.message << "\n";
    return f.code;
  }
  return kUsage;
}
