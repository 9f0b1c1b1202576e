#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsik/ik_controller.hpp"

namespace gsik {

enum class MotionScript {
  /// One hand target traces a small circle; the other targets hold still.
  Smooth,
  /// Targets drift by about ten micrometres.
  Stationary,
  /// Targets jump to random offsets every 20 frames.
  Sporadic,
};

std::string_view to_string(MotionScript s);
std::optional<MotionScript> motion_script_from_string(std::string_view s);

struct BenchOptions {
  std::vector<int> budgets{1, 5, 20};
  int frames = 300;
  MotionScript script = MotionScript::Smooth;
  std::uint64_t seed = 1;
  IkConfig config;
  bool warm_start = true;
};

struct BenchResult {
  int iteration_budget = 0;
  int frames = 0;
  double mean_solve_time = 0.0;
  /// Robust to scheduler preemption, unlike the mean.
  double median_solve_time = 0.0;
  /// Sample standard deviation; empty for a single frame.
  std::optional<double> stddev_solve_time;
  double max_solve_time = 0.0;
  double mean_inner_iterations = 0.0;
  double mean_outer_iterations = 0.0;
  double final_task_error = 0.0;
  std::vector<int> inner_iterations;  // per frame
};

/// Targets for `frame`, offset from `rest_goals` by the script. `dragged`
/// indexes the goal the smooth script moves.
std::vector<EffectorGoal> scripted_goals(MotionScript script, const std::vector<EffectorGoal>& rest_goals,
                                         std::size_t dragged, int frame, std::uint64_t seed);

/// Index of the right-hand goal in `goals`, else the last goal.
std::size_t default_dragged_goal(const Skeleton& skeleton, const std::vector<EffectorGoal>& goals);

/// Runs one script on a fresh session from the rest pose; one result row.
BenchResult run_script(const Skeleton& skeleton, MotionScript script, int frames, std::uint64_t seed,
                       const IkConfig& config, bool warm_start);

/// Replays the script on a fresh session per budget.
std::vector<BenchResult> run_bench(const Skeleton& skeleton, const BenchOptions& options);

std::string bench_table(const std::vector<BenchResult>& results, const BenchOptions& options);
/// Columns: budget,frames,mean_time_ms,median_time_ms,stddev_time_ms,max_time_ms,
/// mean_inner_iterations,mean_outer_iterations,final_task_error
std::string bench_csv(const std::vector<BenchResult>& results);

}  // namespace gsik
