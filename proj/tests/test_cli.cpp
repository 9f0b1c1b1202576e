#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "support.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string command = std::string(GSIK_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe);
  std::array<char, 4096> buffer{};
  while (std::size_t n = std::fread(buffer.data(), 1, buffer.size(), pipe)) r.out.append(buffer.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture(const std::string& name) { return (testing::data_dir() / "fixtures" / name).string(); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 1") {
    CHECK(run("--help").code == 0);
    CHECK(run("").code == 1);
    CHECK(run("solve").code == 1);
    CHECK(run("bench --script jerky").code == 1);
    CHECK(run("--delta 0 solve --goals " + fixture("biped_pose.goals.json")).code == 1);
  }

  TEST_CASE("the two-link fixture converges") {
    const Run r = run("--skeleton " + (testing::data_dir() / "two_link.json").string() + " solve --goals " +
                      fixture("two_link_reach.goals.json"));
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["task_error"].get<double>() < 1e-3);
    CHECK(doc["status"] == "converged");
  }

  TEST_CASE("unreachable goals end at a best reach, not a failure") {
    const Run r = run("solve --goals " + fixture("biped_unreachable.goals.json"));
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["status"] == "best_reach");
    CHECK(doc["frames"].get<int>() < 200);
  }

  TEST_CASE("a reachable biped pose is matched") {
    const Run r = run("solve --goals " + fixture("biped_pose.goals.json"));
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["task_error"].get<double>() < 1e-3);
  }

  TEST_CASE("input errors exit with 3") {
    CHECK(run("solve --goals /nonexistent/goals.json").code == 3);
    const auto bad = std::filesystem::temp_directory_path() / "gsik_cli_bad_goals.json";
    std::ofstream(bad) << R"({"goals":[{"effector":"tail","position":[0,0,0]}]})";
    CHECK(run("solve --goals " + bad.string()).code == 3);
    std::ofstream(bad) << "{";
    CHECK(run("solve --goals " + bad.string()).code == 3);
    std::filesystem::remove(bad);
  }

  TEST_CASE("bench prints a row per budget and CSV on request") {
    const Run r = run("bench --frames 5 --csv -");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("budget,frames,mean_time_ms") != std::string::npos);
    CHECK(r.out.find("\n20,5,") != std::string::npos);
  }

  TEST_CASE("gait export of one step records one swap") {
    const auto path = std::filesystem::temp_directory_path() / "gsik_cli_gait.jsonl";
    const Run r = run("gait --duration 0.5 --output " + path.string());
    REQUIRE(r.code == 0);
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    const auto meta = nlohmann::json::parse(first);
    CHECK(meta["root_swaps"] == 1);
    CHECK(meta["limits_respected"] == true);
    std::filesystem::remove(path);
  }
}
