#include "gsik/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "gsik/error.hpp"
#include "gsik/io.hpp"

namespace gsik {

namespace detail {
extern const std::string_view kDefaultBipedJson;
}

namespace {

std::string joint_label(std::size_t i, const Joint& j) {
  return "joint " + std::to_string(i) + " (" + j.name + ")";
}

}  // namespace

Skeleton::Skeleton(std::vector<Joint> joints, std::vector<EffectorSite> effectors,
                   RigidTransform root_transform)
    : joints_(std::move(joints)),
      effectors_(std::move(effectors)),
      root_transform_(std::move(root_transform)) {
  if (joints_.empty()) throw Error(ErrorCode::InvalidArgument, "skeleton has no joints");
  if (!is_rotation(root_transform_.rotation) || !root_transform_.position.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "root transform is not a rigid transform");
  }

  std::set<std::string, std::less<>> names;
  std::size_t roots = 0;
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const Joint& j = joints_[i];
    if (!names.insert(j.name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate joint name '" + j.name + "'");
    }
    if (!j.axis.allFinite() || std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, joint_label(i, j) + ": axis must have unit length");
    }
    if (!j.offset.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, joint_label(i, j) + ": offset is not finite");
    }
    if (!std::isfinite(j.limits.lower) || !std::isfinite(j.limits.upper) ||
        j.limits.lower > j.limits.upper) {
      throw Error(ErrorCode::InvalidArgument, joint_label(i, j) + ": limits must satisfy lower <= upper");
    }
    if (!j.limits.contains(j.rest)) {
      throw Error(ErrorCode::InvalidArgument, joint_label(i, j) + ": rest angle outside limits");
    }
    if (j.parent) {
      if (*j.parent >= i) {
        throw Error(ErrorCode::InvalidArgument,
                    joint_label(i, j) + ": parent must precede the joint (topological order)");
      }
    } else {
      ++roots;
      root_index_ = i;
    }
  }
  if (roots != 1) {
    throw Error(ErrorCode::InvalidArgument,
                "skeleton must have exactly one root joint, found " + std::to_string(roots));
  }

  children_.assign(joints_.size(), {});
  depth_.assign(joints_.size(), 0);
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    if (auto p = joints_[i].parent) {
      children_[*p].push_back(i);
      depth_[i] = depth_[*p] + 1;
    }
  }

  std::set<std::string, std::less<>> site_names;
  effector_chains_.reserve(effectors_.size());
  for (std::size_t s = 0; s < effectors_.size(); ++s) {
    const EffectorSite& site = effectors_[s];
    if (!site_names.insert(site.name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate effector name '" + site.name + "'");
    }
    if (site.joint && *site.joint >= joints_.size()) {
      throw Error(ErrorCode::Index, "effector '" + site.name + "' references joint " +
                                        std::to_string(*site.joint) + " of " +
                                        std::to_string(joints_.size()));
    }
    if (!site.offset.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "effector '" + site.name + "' offset is not finite");
    }
    std::vector<std::size_t> chain;
    for (auto j = site.joint; j; j = joints_[*j].parent) chain.push_back(*j);
    std::reverse(chain.begin(), chain.end());
    effector_chains_.push_back(std::move(chain));
  }
}

bool Skeleton::is_ancestor(std::size_t ancestor, std::size_t joint) const {
  if (ancestor >= joints_.size() || joint >= joints_.size()) return false;
  while (depth_[joint] > depth_[ancestor]) joint = *joints_[joint].parent;
  return joint == ancestor;
}

std::optional<std::size_t> Skeleton::find_joint(std::string_view name) const {
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    if (joints_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Skeleton::find_effector(std::string_view name) const {
  for (std::size_t i = 0; i < effectors_.size(); ++i) {
    if (effectors_[i].name == name) return i;
  }
  return std::nullopt;
}

Pose Skeleton::rest_pose() const {
  Pose p{VecX(static_cast<Eigen::Index>(joints_.size()))};
  for (std::size_t i = 0; i < joints_.size(); ++i) p.angles[static_cast<Eigen::Index>(i)] = joints_[i].rest;
  return p;
}

Pose Skeleton::zero_pose() const {
  return Pose{VecX::Zero(static_cast<Eigen::Index>(joints_.size()))};
}

void Skeleton::check_pose(const Pose& pose) const {
  if (pose.size() != joints_.size()) {
    throw Error(ErrorCode::Dimension, "pose has " + std::to_string(pose.size()) +
                                          " angles, skeleton has " +
                                          std::to_string(joints_.size()) + " joints");
  }
}

Skeleton build_default_biped() { return skeleton_from_json(detail::kDefaultBipedJson); }

GlobalTransforms forward_kinematics(const Skeleton& skeleton, const Pose& pose) {
  skeleton.check_pose(pose);
  const auto& joints = skeleton.joints();
  GlobalTransforms out;
  out.base = skeleton.root_transform();
  out.joints.resize(joints.size());
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const Joint& j = joints[i];
    const RigidTransform& parent = j.parent ? out.joints[*j.parent] : out.base;
    RigidTransform& t = out.joints[i];
    t.position = parent.position + parent.rotation * j.offset;
    t.rotation = parent.rotation * axis_rotation(j.axis, pose.angles[static_cast<Eigen::Index>(i)]);
  }
  return out;
}

EffectorState effector_state(const Skeleton& skeleton, const GlobalTransforms& transforms,
                             std::size_t site) {
  if (site >= skeleton.effector_count()) {
    throw Error(ErrorCode::Index, "effector index " + std::to_string(site) + " out of range (" +
                                      std::to_string(skeleton.effector_count()) + " sites)");
  }
  const EffectorSite& s = skeleton.effectors()[site];
  const RigidTransform& frame = s.joint ? transforms.joints.at(*s.joint) : transforms.base;
  return {frame.apply(s.offset), frame.rotation};
}

EffectorState effector_state(const Skeleton& skeleton, const Pose& pose, std::size_t site) {
  return effector_state(skeleton, forward_kinematics(skeleton, pose), site);
}

RebasedSkeleton rebase(const Skeleton& skeleton, const Pose& pose, std::size_t new_root) {
  const std::size_t n = skeleton.joint_count();
  if (new_root >= n) {
    throw Error(ErrorCode::Index, "rebase target joint " + std::to_string(new_root) +
                                      " out of range (" + std::to_string(n) + " joints)");
  }
  skeleton.check_pose(pose);

  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  if (new_root == skeleton.root_index()) return {skeleton, pose, identity};

  if (!skeleton.children(new_root).empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "cannot rebase onto joint '" + skeleton.joints()[new_root].name +
                    "': it has child joints, which would become extra roots");
  }

  const auto& old = skeleton.joints();
  const GlobalTransforms fk = forward_kinematics(skeleton, pose);

  // path[0] = old root ... path[k] = new root
  std::vector<std::size_t> path;
  for (std::optional<std::size_t> j = new_root; j; j = old[*j].parent) path.push_back(*j);
  std::reverse(path.begin(), path.end());
  const std::size_t k = path.size() - 1;
  std::vector<std::optional<std::size_t>> path_pos(n);
  for (std::size_t m = 0; m <= k; ++m) path_pos[path[m]] = m;

  std::vector<Joint> joints = old;
  for (std::size_t i = 0; i < n; ++i) {
    if (path_pos[i]) continue;
    if (auto p = old[i].parent; p && path_pos[*p]) {
      // The parent's link is now carried by the next joint along the path.
      const std::size_t next = path[*path_pos[*p] + 1];
      joints[i].parent = next;
      joints[i].offset = old[i].offset - old[next].offset;
    }
  }
  for (std::size_t m = 0; m < k; ++m) {
    const std::size_t j = path[m];
    const std::size_t next = path[m + 1];
    joints[j].parent = next;
    joints[j].axis = -old[j].axis;
    joints[j].offset = -old[next].offset;
  }
  joints[new_root].parent.reset();
  joints[new_root].axis = -old[new_root].axis;
  joints[new_root].offset = Vec3::Zero();

  std::vector<EffectorSite> sites = skeleton.effectors();
  for (EffectorSite& s : sites) {
    if (!s.joint) {
      s.joint = path[0];
      s.offset -= old[path[0]].offset;
    } else if (*s.joint == new_root) {
      s.joint.reset();
    } else if (auto m = path_pos[*s.joint]) {
      const std::size_t next = path[*m + 1];
      s.joint = next;
      s.offset -= old[next].offset;
    }
  }

  // Depth-first preorder from the new root, children in old index order.
  std::vector<std::vector<std::size_t>> kids(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (joints[i].parent) kids[*joints[i].parent].push_back(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<std::size_t> stack{new_root};
  while (!stack.empty()) {
    const std::size_t j = stack.back();
    stack.pop_back();
    order.push_back(j);
    for (auto it = kids[j].rbegin(); it != kids[j].rend(); ++it) stack.push_back(*it);
  }

  std::vector<std::size_t> new_index(n);
  for (std::size_t pos = 0; pos < n; ++pos) new_index[order[pos]] = pos;

  std::vector<Joint> sorted;
  sorted.reserve(n);
  Pose new_pose{VecX(static_cast<Eigen::Index>(n))};
  for (std::size_t pos = 0; pos < n; ++pos) {
    Joint j = joints[order[pos]];
    if (j.parent) j.parent = new_index[*j.parent];
    sorted.push_back(std::move(j));
    new_pose.angles[static_cast<Eigen::Index>(pos)] = pose.angles[static_cast<Eigen::Index>(order[pos])];
  }
  for (EffectorSite& s : sites) {
    if (s.joint) s.joint = new_index[*s.joint];
  }

  return {Skeleton(std::move(sorted), std::move(sites), fk.joints[new_root]), std::move(new_pose),
          std::move(new_index)};
}

}  // namespace gsik
