#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <vector>

#include "gsik/jacobian.hpp"
#include "gsik/kinematics.hpp"
#include "oracles.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return GSIK_DATA_DIR; }

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline gsik::Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> n;
  gsik::Vec3 v(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-6) v = gsik::Vec3(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline gsik::Vec3 random_vec(Rng& rng, double scale) {
  return gsik::Vec3(uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale));
}

// Serial chain with random axes and offsets and one effector at the tip.
inline gsik::Skeleton random_chain(Rng& rng, std::size_t length, double limit = 3.0) {
  std::vector<gsik::Joint> joints;
  for (std::size_t i = 0; i < length; ++i) {
    gsik::Joint j;
    j.name = "j" + std::to_string(i);
    if (i > 0) j.parent = i - 1;
    j.axis = random_unit(rng);
    j.offset = i == 0 ? gsik::Vec3::Zero() : random_vec(rng, 0.5);
    j.limits = {-limit, limit};
    joints.push_back(j);
  }
  gsik::EffectorSite tip{"tip", length - 1, random_vec(rng, 0.3)};
  gsik::RigidTransform root;
  root.rotation = gsik::axis_rotation(random_unit(rng), uniform(rng, -3, 3));
  root.position = random_vec(rng, 1.0);
  return gsik::Skeleton(std::move(joints), {tip}, root);
}

inline std::vector<oracle::ChainJoint> oracle_joints(const gsik::Skeleton& s) {
  std::vector<oracle::ChainJoint> out;
  for (const gsik::Joint& j : s.joints()) out.push_back({j.parent, j.axis, j.offset});
  return out;
}

inline oracle::M4 oracle_base(const gsik::Skeleton& s) {
  oracle::M4 m = oracle::M4::Identity();
  m.block<3, 3>(0, 0) = s.root_transform().rotation;
  m.block<3, 1>(0, 3) = s.root_transform().position;
  return m;
}

inline gsik::Pose random_pose(const gsik::Skeleton& s, Rng& rng) {
  gsik::Pose p{gsik::VecX(static_cast<Eigen::Index>(s.joint_count()))};
  for (std::size_t i = 0; i < s.joint_count(); ++i) {
    const auto& l = s.joints()[i].limits;
    p.angles[static_cast<Eigen::Index>(i)] = uniform(rng, l.lower, l.upper);
  }
  return p;
}

inline std::shared_ptr<const gsik::Skeleton> biped() {
  static const auto s = std::make_shared<const gsik::Skeleton>(gsik::build_default_biped());
  return s;
}

// Planar arm in the xy plane: shoulder at the origin, two unit links.
inline gsik::Skeleton two_link(double limit = 3.14159) {
  std::vector<gsik::Joint> joints(2);
  joints[0].name = "shoulder";
  joints[0].axis = gsik::Vec3::UnitZ();
  joints[0].limits = {-limit, limit};
  joints[1].name = "elbow";
  joints[1].parent = 0;
  joints[1].axis = gsik::Vec3::UnitZ();
  joints[1].offset = gsik::Vec3(1, 0, 0);
  joints[1].limits = {-limit, limit};
  return gsik::Skeleton(std::move(joints), {{"tip", 1, gsik::Vec3(1, 0, 0)}});
}

inline constexpr double kFdStep = 1e-6;

// Central differences of every goal's site position and frame rotation,
// computed with the oracle forward kinematics.
inline gsik::MatX finite_difference_jacobian(const gsik::Skeleton& s, const gsik::Pose& p, const std::vector<gsik::EffectorGoal>& goals) {
  const auto joints = oracle_joints(s);
  const auto base = oracle_base(s);
  const std::size_t m = gsik::task_row_count(goals);
  gsik::MatX J = gsik::MatX::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(s.joint_count()));
  for (std::size_t k = 0; k < s.joint_count(); ++k) {
    gsik::VecX up = p.angles, down = p.angles;
    up[static_cast<Eigen::Index>(k)] += kFdStep;
    down[static_cast<Eigen::Index>(k)] -= kFdStep;
    const auto fp = oracle::forward(joints, up, base);
    const auto fm = oracle::forward(joints, down, base);
    Eigen::Index row = 0;
    for (const gsik::EffectorGoal& g : goals) {
      const gsik::EffectorSite& site = s.effectors()[g.site];
      const oracle::M4 a = site.joint ? fp[*site.joint] : base;
      const oracle::M4 b = site.joint ? fm[*site.joint] : base;
      if (g.position_enabled) {
        const gsik::Vec3 d = (oracle::point(a, site.offset) - oracle::point(b, site.offset)) / (2 * kFdStep);
        J.block<3, 1>(row, static_cast<Eigen::Index>(k)) = g.weight * d;
        row += 3;
      }
      if (g.orientation_enabled) {
        const gsik::Mat3 ra = a.block<3, 3>(0, 0), rb = b.block<3, 3>(0, 0);
        J.block<3, 1>(row, static_cast<Eigen::Index>(k)) = g.weight * oracle::rotation_log(ra * rb.transpose()) / (2 * kFdStep);
        row += 3;
      }
    }
  }
  return J;
}

inline std::vector<gsik::EffectorGoal> six_dof_goals(const gsik::Skeleton& s, Rng& rng) {
  std::vector<gsik::EffectorGoal> goals;
  for (std::size_t site = 0; site < s.effector_count(); ++site) {
    if (!s.effectors()[site].joint) continue;
    gsik::EffectorGoal g;
    g.site = site;
    g.target_position = random_vec(rng, 1.0);
    g.target_orientation = gsik::axis_rotation(random_unit(rng), uniform(rng, -2, 2));
    g.orientation_enabled = true;
    goals.push_back(g);
  }
  return goals;
}

}  // namespace testing
