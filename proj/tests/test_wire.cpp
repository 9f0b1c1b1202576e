#include <doctest.h>

#include "gsik/error.hpp"
#include "gsik/io.hpp"
#include "gsik/wire.hpp"
#include "support.hpp"

using namespace gsik;
using testing::Rng;

namespace {

double real(Rng& rng) {
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: return 0.0;
    case 1: return testing::uniform(rng, -1, 1);
    case 2: return testing::uniform(rng, -1e6, 1e6);
    default: return std::ldexp(testing::uniform(rng, -1, 1), std::uniform_int_distribution<int>(-300, 300)(rng));
  }
}

std::string text(Rng& rng) {
  static const std::string alphabet = "abcXYZ_- 09\"\\/\n\t\xc3\xa9{}[]";
  std::string out;
  const int n = std::uniform_int_distribution<int>(0, 12)(rng);
  for (int i = 0; i < n; ++i) {
    char c = alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    // Keep multi-byte sequences whole so the string stays valid UTF-8.
    if (static_cast<unsigned char>(c) >= 0x80) {
      out += "\xc3\xa9";
    } else {
      out += c;
    }
  }
  return out;
}

template <std::size_t N>
std::array<double, N> reals(Rng& rng) {
  std::array<double, N> a{};
  for (auto& v : a) v = real(rng);
  return a;
}

template <class T>
std::optional<T> maybe(Rng& rng, T value) {
  return std::bernoulli_distribution(0.5)(rng) ? std::optional<T>(value) : std::nullopt;
}

wire::ClientMessage random_client(Rng& rng) {
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0: return wire::SetTarget{text(rng), reals<3>(rng), maybe(rng, reals<4>(rng))};
    case 1: {
      wire::SetConfig c;
      c.damping = maybe(rng, real(rng));
      c.max_iterations = maybe(rng, std::uniform_int_distribution<int>(-5, 1000)(rng));
      c.residual_tol = maybe(rng, real(rng));
      c.delta_x_tol = maybe(rng, real(rng));
      c.stagnation_tol = maybe(rng, real(rng));
      c.max_outer_iterations = maybe(rng, std::uniform_int_distribution<int>(-5, 10)(rng));
      c.max_step = maybe(rng, real(rng));
      return c;
    }
    case 2: {
      static const nlohmann::json doc = skeleton_to_json(*testing::biped());
      return wire::LoadSkeleton{std::bernoulli_distribution(0.5)(rng) ? doc : nlohmann::json(text(rng))};
    }
    case 3: return wire::StartGait{real(rng), real(rng), real(rng), text(rng), real(rng)};
    case 4: return wire::StopGait{};
    default: return wire::RebaseRoot{text(rng)};
  }
}

wire::ServerMessage random_server(Rng& rng) {
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: {
      wire::PoseUpdate u;
      const int n = std::uniform_int_distribution<int>(0, 8)(rng);
      for (int i = 0; i < n; ++i) {
        u.angles.push_back(real(rng));
        u.positions.push_back(reals<3>(rng));
      }
      for (int i = 0; i < n / 2; ++i) u.effector_errors.push_back({text(rng), real(rng), real(rng)});
      return u;
    }
    case 1: return wire::SolveStats{std::uniform_int_distribution<int>(0, 100)(rng), real(rng), text(rng), real(rng)};
    case 2: return wire::ErrorReply{text(rng)};
    default: return wire::SkeletonEcho{nlohmann::json{{"k", text(rng)}, {"v", real(rng)}}};
  }
}

ErrorCode parse_code(std::string_view s) {
  try {
    wire::parse_client(s);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("wire") {
  TEST_CASE("fuzzed messages survive a round trip") {
    Rng rng(51);
    for (int i = 0; i < 10000; ++i) {
      const wire::ClientMessage c = random_client(rng);
      const std::string s = wire::serialize(c);
      const wire::ClientMessage back = wire::parse_client(s);
      CHECK(back == c);
      CHECK(wire::serialize(back) == s);

      const wire::ServerMessage m = random_server(rng);
      CHECK(wire::parse_server(wire::serialize(m)) == m);
    }
  }

  TEST_CASE("every message carries its type tag") {
    CHECK(wire::to_json(wire::ClientMessage{wire::StopGait{}})["type"] == "StopGait");
    CHECK(wire::to_json(wire::ServerMessage{wire::SolveStats{}})["type"] == "SolveStats");
    CHECK(wire::type_name(wire::ClientMessage{wire::RebaseRoot{"x"}}) == "RebaseRoot");
    CHECK(wire::type_name(wire::ServerMessage{wire::ErrorReply{}}) == "Error");
  }

  TEST_CASE("a minimal SetTarget parses") {
    const auto m = wire::parse_client(R"({"type":"SetTarget","effector":"head","position":[1,2,3]})");
    const auto& t = std::get<wire::SetTarget>(m);
    CHECK(t.effector == "head");
    CHECK(t.position == wire::Vec3{1, 2, 3});
    CHECK_FALSE(t.orientation);
  }

  TEST_CASE("malformed input is a parse error") {
    for (const char* bad : {"", "{", "[]", "42", R"({"type":"Teleport"})", R"({"effector":"head"})",
                            R"({"type":"SetTarget","effector":"head"})",
                            R"({"type":"SetTarget","effector":"head","position":[1,2]})",
                            R"({"type":"SetTarget","effector":3,"position":[1,2,3]})",
                            R"({"type":"SetConfig","max_iterations":"many"})", R"({"type":"RebaseRoot"})"}) {
      CAPTURE(std::string(bad));
      CHECK(parse_code(bad) == ErrorCode::Parse);
    }
    CHECK_THROWS_AS(wire::parse_server(R"({"type":"SetTarget"})"), Error);
  }
}
