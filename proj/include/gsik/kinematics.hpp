#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsik/math.hpp"

namespace gsik {

struct JointLimits {
  double lower = 0.0;
  double upper = 0.0;

  double clamp(double angle) const {
    return angle < lower ? lower : (angle > upper ? upper : angle);
  }
  bool contains(double angle) const { return lower <= angle && angle <= upper; }
};

/// One revolute degree of freedom. A joint frame sits at the joint position
/// and carries the orientation of the link it drives.
struct Joint {
  std::string name;
  std::optional<std::size_t> parent;
  Vec3 axis = Vec3::UnitZ();
  Vec3 offset = Vec3::Zero();
  JointLimits limits;
  double rest = 0.0;
};

/// A point rigidly attached to a joint frame, or to the base frame when
/// `joint` is empty.
struct EffectorSite {
  std::string name;
  std::optional<std::size_t> joint;
  Vec3 offset = Vec3::Zero();
};

struct Pose {
  VecX angles;

  std::size_t size() const { return static_cast<std::size_t>(angles.size()); }
};

/// World transforms in joint storage order, plus the base frame.
struct GlobalTransforms {
  RigidTransform base;
  std::vector<RigidTransform> joints;
};

struct EffectorState {
  Vec3 position = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();
};

/// Immutable articulated tree. Construction validates every structural
/// invariant; an instance that exists is well formed.
class Skeleton {
 public:
  Skeleton(std::vector<Joint> joints, std::vector<EffectorSite> effectors,
           RigidTransform root_transform = {});

  const std::vector<Joint>& joints() const { return joints_; }
  const std::vector<EffectorSite>& effectors() const { return effectors_; }
  const RigidTransform& root_transform() const { return root_transform_; }
  std::size_t joint_count() const { return joints_.size(); }
  std::size_t effector_count() const { return effectors_.size(); }
  std::size_t root_index() const { return root_index_; }

  const std::vector<std::size_t>& children(std::size_t joint) const {
    return children_.at(joint);
  }

  /// True when `ancestor` lies on the path from the root to `joint`
  /// (inclusive of `joint` itself).
  bool is_ancestor(std::size_t ancestor, std::size_t joint) const;

  /// Joints that move effector `site`, ordered root first. Empty for a
  /// base-attached site.
  const std::vector<std::size_t>& effector_chain(std::size_t site) const {
    return effector_chains_.at(site);
  }

  std::optional<std::size_t> find_joint(std::string_view name) const;
  std::optional<std::size_t> find_effector(std::string_view name) const;

  Pose rest_pose() const;
  Pose zero_pose() const;

  /// Throws a dimension error unless `pose` has one angle per joint.
  void check_pose(const Pose& pose) const;

 private:
  std::vector<Joint> joints_;
  std::vector<EffectorSite> effectors_;
  RigidTransform root_transform_;
  std::size_t root_index_ = 0;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::size_t>> effector_chains_;
  // depth_[j] and the parent links give O(depth) ancestor queries.
  std::vector<std::size_t> depth_;
};

/// Loads the shipped 30-DOF biped (right foot as the base).
Skeleton build_default_biped();

GlobalTransforms forward_kinematics(const Skeleton& skeleton, const Pose& pose);

EffectorState effector_state(const Skeleton& skeleton,
                             const GlobalTransforms& transforms,
                             std::size_t site);
EffectorState effector_state(const Skeleton& skeleton, const Pose& pose,
                             std::size_t site);

struct RebasedSkeleton {
  Skeleton skeleton;
  /// Same angles as the input pose, permuted into the new storage order.
  Pose pose;
  /// new_index[old joint index] = index of that joint in `skeleton`.
  std::vector<std::size_t> new_index;
};

/// Re-roots the tree at `new_root` so that its link becomes the fixed base,
/// preserving every joint's world position for the supplied pose. Joints
/// on the old-root to new-root path get their axes negated, so angles and
/// limits carry over unchanged.
RebasedSkeleton rebase(const Skeleton& skeleton, const Pose& pose,
                       std::size_t new_root);

}  // namespace gsik
