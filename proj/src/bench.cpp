#include "gsik/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "gsik/error.hpp"

namespace gsik {

namespace {

constexpr double kCircleRadius = 0.05;
constexpr int kCirclePeriod = 300;
constexpr double kDriftAmplitude = 1e-5;
constexpr int kSporadicHold = 20;
constexpr double kSporadicRange = 0.1;
constexpr int kWarmupFrames = 10;

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

std::string_view to_string(MotionScript s) {
  switch (s) {
    case MotionScript::Smooth: return "smooth";
    case MotionScript::Stationary: return "stationary";
    case MotionScript::Sporadic: return "sporadic";
  }
  return "unknown";
}

std::optional<MotionScript> motion_script_from_string(std::string_view s) {
  if (s == "smooth") return MotionScript::Smooth;
  if (s == "stationary") return MotionScript::Stationary;
  if (s == "sporadic") return MotionScript::Sporadic;
  return std::nullopt;
}

std::vector<EffectorGoal> scripted_goals(MotionScript script, const std::vector<EffectorGoal>& rest_goals,
                                         std::size_t dragged, int frame, std::uint64_t seed) {
  std::vector<EffectorGoal> goals = rest_goals;
  switch (script) {
    case MotionScript::Smooth: {
      if (dragged >= goals.size()) throw Error(ErrorCode::Index, "dragged goal index out of range");
      const double a = 2.0 * std::numbers::pi * frame / kCirclePeriod;
      // Starts at the rest target and circles in the sagittal plane.
      goals[dragged].target_position += kCircleRadius * Vec3(std::sin(a), 1.0 - std::cos(a), 0.0);
      break;
    }
    case MotionScript::Stationary:
      for (std::size_t i = 0; i < goals.size(); ++i) {
        const double a = 0.05 * frame + static_cast<double>(i);
        goals[i].target_position += kDriftAmplitude * Vec3(std::sin(a), std::cos(a), std::sin(2 * a));
      }
      break;
    case MotionScript::Sporadic: {
      const int block = frame / kSporadicHold;
      if (block == 0) break;
      std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(block));
      std::uniform_real_distribution<double> u(-kSporadicRange, kSporadicRange);
      for (EffectorGoal& g : goals) g.target_position += Vec3(u(rng), u(rng), u(rng));
      break;
    }
  }
  return goals;
}

std::size_t default_dragged_goal(const Skeleton& skeleton, const std::vector<EffectorGoal>& goals) {
  if (goals.empty()) throw Error(ErrorCode::EmptyTask, "no goals to drag");
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (skeleton.effectors().at(goals[i].site).name == "right-hand") return i;
  }
  return goals.size() - 1;
}

BenchResult run_script(const Skeleton& skeleton, MotionScript script, int frames, std::uint64_t seed,
                       const IkConfig& config, bool warm_start) {
  if (frames < 1) throw Error(ErrorCode::InvalidArgument, "frames must be >= 1");
  config.validate();
  IkSession session(std::make_shared<const Skeleton>(skeleton));
  const std::vector<EffectorGoal> rest = session.current_effector_goals(false);
  const std::size_t dragged = default_dragged_goal(skeleton, rest);

  {
    // Untimed warm-up on a scratch session so the first timed frame does not
    // pay for cold caches and first-touch allocations.
    IkSession scratch(session.skeleton_ptr());
    for (int f = 1; f <= std::min(frames, kWarmupFrames); ++f) {
      scratch.set_goals(scripted_goals(script, rest, dragged, f, seed));
      scratch.solve_frame(config);
    }
  }

  BenchResult r;
  r.iteration_budget = config.solver.max_iterations;
  r.frames = frames;
  r.inner_iterations.reserve(static_cast<std::size_t>(frames));
  double sum = 0.0, sum_sq = 0.0, outer = 0.0, inner = 0.0;
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(frames));
  for (int f = 1; f <= frames; ++f) {
    session.set_goals(scripted_goals(script, rest, dragged, f, seed));
    if (!warm_start) session.reset_warm_start();
    const FrameReport rep = session.solve_frame(config);
    if (!rep.ok) throw Error(ErrorCode::NonFinite, "bench frame " + std::to_string(f) + ": " + rep.failure);
    sum += rep.solve_seconds;
    times.push_back(rep.solve_seconds);
    sum_sq += rep.solve_seconds * rep.solve_seconds;
    r.max_solve_time = std::max(r.max_solve_time, rep.solve_seconds);
    inner += rep.inner_iterations;
    outer += rep.outer_iterations;
    r.inner_iterations.push_back(rep.inner_iterations);
    r.final_task_error = rep.task_error_after;
  }
  const double n = frames;
  r.mean_solve_time = sum / n;
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  r.median_solve_time = times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
  if (frames > 1) r.stddev_solve_time = std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1)));
  r.mean_inner_iterations = inner / n;
  r.mean_outer_iterations = outer / n;
  return r;
}

std::vector<BenchResult> run_bench(const Skeleton& skeleton, const BenchOptions& options) {
  if (options.budgets.empty()) throw Error(ErrorCode::InvalidArgument, "at least one iteration budget is required");
  std::vector<BenchResult> results;
  for (int budget : options.budgets) {
    if (budget < 1) throw Error(ErrorCode::InvalidArgument, "iteration budgets must be >= 1");
    IkConfig config = options.config;
    config.solver.max_iterations = budget;
    results.push_back(run_script(skeleton, options.script, options.frames, options.seed, config, options.warm_start));
  }
  return results;
}

std::string bench_table(const std::vector<BenchResult>& results, const BenchOptions& options) {
  std::ostringstream out;
  out << "script " << to_string(options.script) << ", " << options.frames << " frames, "
      << (options.warm_start ? "warm" : "cold") << " start, seed " << options.seed << "\n";
  out << std::left << std::setw(8) << "budget" << std::right << std::setw(12) << "mean ms" << std::setw(12) << "median ms" << std::setw(12)
      << "stddev ms" << std::setw(12) << "max ms" << std::setw(12) << "inner" << std::setw(10) << "outer"
      << std::setw(14) << "task error" << "\n";
  for (const BenchResult& r : results) {
    out << std::left << std::setw(8) << r.iteration_budget << std::right << std::setw(12)
        << fixed(r.mean_solve_time * 1e3, 4) << std::setw(12) << fixed(r.median_solve_time * 1e3, 4) << std::setw(12)
        << (r.stddev_solve_time ? fixed(*r.stddev_solve_time * 1e3, 4) : std::string("-")) << std::setw(12)
        << fixed(r.max_solve_time * 1e3, 4) << std::setw(12) << fixed(r.mean_inner_iterations, 2) << std::setw(10)
        << fixed(r.mean_outer_iterations, 2) << std::setw(14) << std::scientific << std::setprecision(3)
        << r.final_task_error << std::defaultfloat << "\n";
  }
  return out.str();
}

std::string bench_csv(const std::vector<BenchResult>& results) {
  std::ostringstream out;
  out << "budget,frames,mean_time_ms,median_time_ms,stddev_time_ms,max_time_ms,mean_inner_iterations,"
         "mean_outer_iterations,final_task_error\n";
  out << std::setprecision(9);
  for (const BenchResult& r : results) {
    out << r.iteration_budget << ',' << r.frames << ',' << r.mean_solve_time * 1e3 << ',' << r.median_solve_time * 1e3 << ',';
    if (r.stddev_solve_time) out << *r.stddev_solve_time * 1e3;
    out << ',' << r.max_solve_time * 1e3 << ',' << r.mean_inner_iterations << ',' << r.mean_outer_iterations
        << ',' << r.final_task_error << '\n';
  }
  return out.str();
}

}  // namespace gsik
