#include <doctest.h>

#include <cstring>
#include <numbers>
#include <set>

#include "gsik/error.hpp"
#include "gsik/kinematics.hpp"
#include "support.hpp"

using namespace gsik;
using testing::Rng;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a gsik::Error");
  return ErrorCode::InvalidArgument;
}

Joint joint(const char* name, std::optional<std::size_t> parent, Vec3 axis, Vec3 offset) {
  Joint j;
  j.name = name;
  j.parent = parent;
  j.axis = axis;
  j.offset = offset;
  j.limits = {-3, 3};
  return j;
}

}  // namespace

TEST_SUITE("kinematics") {
  TEST_CASE("default biped has thirty joints and the five movable effectors") {
    const Skeleton& s = *testing::biped();
    CHECK(s.joint_count() == 30);
    std::set<std::string> movable;
    for (const EffectorSite& e : s.effectors()) {
      if (e.joint) movable.insert(e.name);
    }
    CHECK(movable == std::set<std::string>{"head", "pelvis", "right-hand", "left-hand", "left-foot"});
    CHECK(s.joints()[s.root_index()].name == "r_ankle_z");
  }

  TEST_CASE("shoulders and hips expand into three joints joined by two zero-length links") {
    const Skeleton& s = *testing::biped();
    for (const char* prefix : {"r_hip_", "l_hip_", "r_shoulder_", "l_shoulder_"}) {
      int count = 0, zero_links = 0;
      for (const Joint& j : s.joints()) {
        if (j.name.rfind(prefix, 0) != 0) continue;
        ++count;
        if (j.offset.isZero(0.0)) ++zero_links;
      }
      CAPTURE(std::string(prefix));
      CHECK(count == 3);
      CHECK(zero_links == 2);
    }
  }

  TEST_CASE("zero angles accumulate offsets with identity rotations") {
    const Skeleton& s = *testing::biped();
    const GlobalTransforms fk = forward_kinematics(s, s.zero_pose());
    for (std::size_t i = 0; i < s.joint_count(); ++i) {
      const Joint& j = s.joints()[i];
      const Vec3 parent = j.parent ? fk.joints[*j.parent].position : s.root_transform().position;
      CHECK((fk.joints[i].position - (parent + j.offset)).norm() < 1e-15);
      CHECK(fk.joints[i].rotation.isApprox(Mat3::Identity(), 1e-15));
    }
  }

  TEST_CASE("a quarter turn about z carries a unit child offset onto +y") {
    std::vector<Joint> joints{joint("a", std::nullopt, Vec3::UnitZ(), Vec3::Zero()),
                              joint("b", 0, Vec3::UnitZ(), Vec3(1, 0, 0))};
    const Skeleton s(std::move(joints), {});
    Pose p{VecX::Zero(2)};
    p.angles[0] = std::numbers::pi / 2;
    const GlobalTransforms fk = forward_kinematics(s, p);
    CHECK((fk.joints[1].position - Vec3(0, 1, 0)).norm() < 1e-15);
  }

  TEST_CASE("random chains agree with the homogeneous matrix product") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const Skeleton s = testing::random_chain(rng, trial < 100 ? 3 : 1 + trial % 10);
      const Pose p = testing::random_pose(s, rng);
      const GlobalTransforms fk = forward_kinematics(s, p);
      const auto ref = oracle::forward(testing::oracle_joints(s), p.angles, testing::oracle_base(s));
      for (std::size_t i = 0; i < s.joint_count(); ++i) {
        CHECK((fk.joints[i].position - ref[i].block<3, 1>(0, 3)).norm() < 1e-12);
        CHECK((fk.joints[i].rotation - ref[i].block<3, 3>(0, 0)).norm() < 1e-12);
      }
      const EffectorState tip = effector_state(s, p, 0);
      CHECK((tip.position - oracle::point(ref.back(), s.effectors()[0].offset)).norm() < 1e-12);
    }
  }

  TEST_CASE("pose length must match the joint count") {
    const Skeleton& s = *testing::biped();
    CHECK(code_of([&] { forward_kinematics(s, Pose{VecX::Zero(29)}); }) == ErrorCode::Dimension);
  }

  TEST_CASE("forward kinematics is deterministic to the bit") {
    Rng rng(3);
    const Skeleton& s = *testing::biped();
    const Pose p = testing::random_pose(s, rng);
    const GlobalTransforms a = forward_kinematics(s, p);
    const GlobalTransforms b = forward_kinematics(s, p);
    for (std::size_t i = 0; i < s.joint_count(); ++i) {
      CHECK(std::memcmp(a.joints[i].position.data(), b.joints[i].position.data(), sizeof(double) * 3) == 0);
      CHECK(std::memcmp(a.joints[i].rotation.data(), b.joints[i].rotation.data(), sizeof(double) * 9) == 0);
    }
  }

  TEST_CASE("three co-located joints reproduce an XYZ Euler rotation") {
    std::vector<Joint> joints{joint("x", std::nullopt, Vec3::UnitX(), Vec3::Zero()),
                              joint("y", 0, Vec3::UnitY(), Vec3::Zero()),
                              joint("z", 1, Vec3::UnitZ(), Vec3::Zero())};
    const Vec3 tip_offset(0.3, -0.7, 0.2);
    const Skeleton s(std::move(joints), {{"tip", 2, tip_offset}});
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
      Pose p{VecX(3)};
      for (int k = 0; k < 3; ++k) p.angles[k] = testing::uniform(rng, -3, 3);
      const oracle::M3 euler = oracle::rodrigues(Vec3::UnitX(), p.angles[0]) *
                               oracle::rodrigues(Vec3::UnitY(), p.angles[1]) *
                               oracle::rodrigues(Vec3::UnitZ(), p.angles[2]);
      CHECK((effector_state(s, p, 0).position - euler * tip_offset).norm() < 1e-9);
    }
  }

  TEST_CASE("effector state follows the owning joint frame") {
    Rng rng(8);
    const Skeleton& s = *testing::biped();
    const Pose p = testing::random_pose(s, rng);
    const GlobalTransforms fk = forward_kinematics(s, p);
    const auto ref = oracle::forward(testing::oracle_joints(s), p.angles, testing::oracle_base(s));
    for (std::size_t site = 0; site < s.effector_count(); ++site) {
      const EffectorSite& e = s.effectors()[site];
      const EffectorState st = effector_state(s, fk, site);
      if (!e.joint) {
        CHECK((st.position - s.root_transform().apply(e.offset)).norm() < 1e-15);
        continue;
      }
      CHECK((st.position - fk.joints[*e.joint].apply(e.offset)).norm() < 1e-15);
      CHECK((st.position - oracle::point(ref[*e.joint], e.offset)).norm() < 1e-12);
      CHECK(st.orientation.isApprox(fk.joints[*e.joint].rotation));
    }
    CHECK(code_of([&] { effector_state(s, fk, s.effector_count()); }) == ErrorCode::Index);
  }

  TEST_CASE("a base site with zero offset sits at the root transform") {
    std::vector<Joint> joints{joint("a", std::nullopt, Vec3::UnitZ(), Vec3::Zero())};
    RigidTransform root;
    root.position = Vec3(1, 2, 3);
    const Skeleton s(std::move(joints), {{"base", std::nullopt, Vec3::Zero()}}, root);
    CHECK((effector_state(s, s.zero_pose(), 0).position - Vec3(1, 2, 3)).norm() == 0.0);
  }

  TEST_CASE("construction rejects malformed trees") {
    auto make = [](std::vector<Joint> j, std::vector<EffectorSite> e = {}) { Skeleton(std::move(j), std::move(e)); };
    CHECK(code_of([&] { make({}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { make({joint("a", std::nullopt, Vec3(1, 1, 0), Vec3::Zero())}); }) ==
          ErrorCode::InvalidArgument);
    Joint inverted = joint("a", std::nullopt, Vec3::UnitX(), Vec3::Zero());
    inverted.limits = {1, -1};
    CHECK(code_of([&] { make({inverted}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] {
            make({joint("a", std::nullopt, Vec3::UnitX(), Vec3::Zero()), joint("b", std::nullopt, Vec3::UnitX(), Vec3::Zero())});
          }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] {
            make({joint("a", 1, Vec3::UnitX(), Vec3::Zero()), joint("b", std::nullopt, Vec3::UnitX(), Vec3::Zero())});
          }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { make({joint("a", std::nullopt, Vec3::UnitX(), Vec3::Zero())}, {{"e", 4, Vec3::Zero()}}); }) ==
          ErrorCode::Index);
  }

  TEST_CASE("rebasing onto the current root changes nothing") {
    Rng rng(21);
    const Skeleton& s = *testing::biped();
    const Pose p = testing::random_pose(s, rng);
    const RebasedSkeleton r = rebase(s, p, s.root_index());
    CHECK(r.skeleton.joint_count() == s.joint_count());
    const GlobalTransforms a = forward_kinematics(s, p), b = forward_kinematics(r.skeleton, r.pose);
    for (std::size_t i = 0; i < s.joint_count(); ++i) CHECK((a.joints[i].position - b.joints[i].position).norm() == 0.0);
  }

  TEST_CASE("right to left foot rebase keeps every joint and effector in place") {
    Rng rng(22);
    const Skeleton& s = *testing::biped();
    const std::size_t left = *s.find_joint("l_ankle_z");
    for (int trial = 0; trial < 100; ++trial) {
      const Pose p = testing::random_pose(s, rng);
      const auto before = oracle::forward(testing::oracle_joints(s), p.angles, testing::oracle_base(s));
      const RebasedSkeleton r = rebase(s, p, left);
      const GlobalTransforms after = forward_kinematics(r.skeleton, r.pose);
      for (std::size_t i = 0; i < s.joint_count(); ++i) {
        CHECK((after.joints[r.new_index[i]].position - before[i].block<3, 1>(0, 3)).norm() < 1e-9);
      }
      for (std::size_t site = 0; site < s.effector_count(); ++site) {
        const EffectorState x = effector_state(s, p, site);
        const EffectorState y = effector_state(r.skeleton, after, site);
        CHECK(r.skeleton.effectors()[site].name == s.effectors()[site].name);
        CHECK((x.position - y.position).norm() < 1e-9);
      }
      for (std::size_t i = 0; i < r.skeleton.joint_count(); ++i) {
        if (auto parent = r.skeleton.joints()[i].parent) CHECK(*parent < i);
      }
    }
  }

  TEST_CASE("movable effectors keep their world orientation across a rebase") {
    Rng rng(23);
    const Skeleton& s = *testing::biped();
    const Pose p = testing::random_pose(s, rng);
    const RebasedSkeleton r = rebase(s, p, *s.find_joint("l_ankle_z"));
    for (const char* name : {"head", "pelvis", "right-hand", "left-hand"}) {
      const std::size_t site = *s.find_effector(name);
      const Mat3 a = effector_state(s, p, site).orientation;
      const Mat3 b = effector_state(r.skeleton, r.pose, site).orientation;
      CAPTURE(std::string(name));
      CHECK((a - b).norm() < 1e-9);
    }
  }

  TEST_CASE("rebasing there and back restores the original geometry") {
    Rng rng(24);
    const Skeleton& s = *testing::biped();
    for (int trial = 0; trial < 20; ++trial) {
      const Pose p = testing::random_pose(s, rng);
      const RebasedSkeleton there = rebase(s, p, *s.find_joint("l_ankle_z"));
      const RebasedSkeleton back =
          rebase(there.skeleton, there.pose, *there.skeleton.find_joint(s.joints()[s.root_index()].name));
      const GlobalTransforms a = forward_kinematics(s, p), b = forward_kinematics(back.skeleton, back.pose);
      for (std::size_t i = 0; i < s.joint_count(); ++i) {
        const std::size_t j = *back.skeleton.find_joint(s.joints()[i].name);
        CHECK((a.joints[i].position - b.joints[j].position).norm() < 1e-9);
      }
    }
  }

  TEST_CASE("random chains rebase onto their tip") {
    Rng rng(25);
    for (int trial = 0; trial < 50; ++trial) {
      const Skeleton s = testing::random_chain(rng, 2 + trial % 8);
      const Pose p = testing::random_pose(s, rng);
      const RebasedSkeleton r = rebase(s, p, s.joint_count() - 1);
      const GlobalTransforms a = forward_kinematics(s, p), b = forward_kinematics(r.skeleton, r.pose);
      for (std::size_t i = 0; i < s.joint_count(); ++i) {
        CHECK((a.joints[i].position - b.joints[r.new_index[i]].position).norm() < 1e-9);
      }
      CHECK((effector_state(s, a, 0).position - effector_state(r.skeleton, b, 0).position).norm() < 1e-9);
    }
  }

  TEST_CASE("rebase rejects bad targets") {
    const Skeleton& s = *testing::biped();
    CHECK(code_of([&] { rebase(s, s.rest_pose(), 30); }) == ErrorCode::Index);
    CHECK(code_of([&] { rebase(s, s.rest_pose(), *s.find_joint("r_knee")); }) == ErrorCode::InvalidArgument);
  }
}
