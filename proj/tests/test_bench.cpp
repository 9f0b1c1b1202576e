#include <doctest.h>

#include <sstream>

#include "gsik/bench.hpp"
#include "gsik/error.hpp"
#include "support.hpp"

using namespace gsik;

TEST_SUITE("bench") {
  TEST_CASE("one row per budget, each within its sweep cap") {
    BenchOptions o;
    o.frames = 40;
    const auto rows = run_bench(*testing::biped(), o);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const BenchResult& r = rows[i];
      CHECK(r.iteration_budget == o.budgets[i]);
      CHECK(r.frames == 40);
      CHECK(r.inner_iterations.size() == 40);
      CHECK(r.stddev_solve_time.has_value());
      CHECK(r.mean_solve_time > 0.0);
      CHECK(r.max_solve_time >= r.mean_solve_time);
      CHECK(r.median_solve_time > 0.0);
      CHECK(r.median_solve_time <= r.max_solve_time);
      CHECK(r.mean_inner_iterations <= r.iteration_budget * 2 * o.config.max_outer_iterations);
    }
    CHECK(rows[0].mean_inner_iterations <= rows[1].mean_inner_iterations);
    CHECK(rows[1].mean_inner_iterations <= rows[2].mean_inner_iterations);
  }

  TEST_CASE("a single frame has no spread") {
    BenchOptions o;
    o.frames = 1;
    o.budgets = {5};
    const auto rows = run_bench(*testing::biped(), o);
    CHECK_FALSE(rows.at(0).stddev_solve_time.has_value());
    CHECK(bench_csv(rows).find("5,1,") != std::string::npos);
  }

  TEST_CASE("everything but timing is deterministic") {
    for (MotionScript script : {MotionScript::Smooth, MotionScript::Stationary, MotionScript::Sporadic}) {
      CAPTURE(std::string(to_string(script)));
      const auto a = run_script(*testing::biped(), script, 60, 7, {}, true);
      const auto b = run_script(*testing::biped(), script, 60, 7, {}, true);
      CHECK(a.inner_iterations == b.inner_iterations);
      CHECK(a.final_task_error == b.final_task_error);
      CHECK(a.mean_outer_iterations == b.mean_outer_iterations);
    }
  }

  TEST_CASE("scripts move only what they claim to") {
    const Skeleton& s = *testing::biped();
    IkSession session(testing::biped());
    const auto rest = session.current_effector_goals(false);
    const std::size_t dragged = default_dragged_goal(s, rest);
    CHECK(s.effectors()[rest[dragged].site].name == "right-hand");
    const auto smooth = scripted_goals(MotionScript::Smooth, rest, dragged, 10, 1);
    for (std::size_t i = 0; i < rest.size(); ++i) {
      const double moved = (smooth[i].target_position - rest[i].target_position).norm();
      if (i == dragged) {
        CHECK(moved > 0.0);
      } else {
        CHECK(moved == 0.0);
      }
    }
    const auto still = scripted_goals(MotionScript::Stationary, rest, dragged, 10, 1);
    for (std::size_t i = 0; i < rest.size(); ++i) {
      CHECK((still[i].target_position - rest[i].target_position).norm() < 1e-4);
    }
  }

  TEST_CASE("warm starting beats cold starting on the stationary script") {
    IkConfig one;
    one.max_outer_iterations = 1;
    const auto warm = run_script(*testing::biped(), MotionScript::Stationary, 100, 1, one, true);
    const auto cold = run_script(*testing::biped(), MotionScript::Stationary, 100, 1, one, false);
    CHECK(warm.mean_inner_iterations < cold.mean_inner_iterations);
  }

  TEST_CASE("names, CSV layout and bad options") {
    CHECK(motion_script_from_string("sporadic") == MotionScript::Sporadic);
    CHECK_FALSE(motion_script_from_string("jerky").has_value());
    std::istringstream csv(bench_csv({}));
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "budget,frames,mean_time_ms,median_time_ms,stddev_time_ms,max_time_ms,mean_inner_iterations,"
          "mean_outer_iterations,final_task_error");
    BenchOptions o;
    o.budgets = {};
    CHECK_THROWS_AS(run_bench(*testing::biped(), o), Error);
    o.budgets = {0};
    CHECK_THROWS_AS(run_bench(*testing::biped(), o), Error);
    BenchOptions text;
    CHECK(bench_table({}, text).find("budget") != std::string::npos);
  }
}
