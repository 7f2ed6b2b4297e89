#pragma once

#include <clay/types.hpp>

#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

namespace clay {

/// One parallel-jaw pinch: end-effector center, yaw, final fingertip gap.
struct GraspAction {
  double x = 0.0;      // meters
  double y = 0.0;      // meters
  double z = 0.0;      // meters
  double rot_z = 0.0;  // radians, normalized to [-pi, pi)
  double d = 0.0;      // final fingertip separation, meters

  Vec3 position() const { return {x, y, z}; }
  bool all_finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) &&
           std::isfinite(rot_z) && std::isfinite(d);
  }
};

struct GripperModel {
  double finger_width = 0.02;      // meters, cross-section along the grasp x-axis
  double finger_height = 0.03;     // meters, cross-section along z
  double finger_thickness = 0.01;  // meters, behind the inner face
  double max_open = 0.08;          // d_max, meters
  double min_close = 0.006;        // d_min, meters

  bool valid() const {
    return finger_width > 0.0 && finger_height > 0.0 && finger_thickness > 0.0 &&
           min_close > 0.0 && min_close < max_open;
  }
};

/// Box with orthonormal axes (columns of `axes`); closed at the boundary.
struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  // columns: grasp x, closing axis, z
  Vec3 half_extents = Vec3::Zero();

  bool contains(const Vec3& p) const {
    const Vec3 local = axes.transpose() * (p - center);
    return (local.cwiseAbs().array() <= half_extents.array()).all();
  }
};

/// Volumes swept by the two fingers closing from max_open to d.
struct SweptRegion {
  OrientedBox finger_pos;  // finger approaching from +closing axis
  OrientedBox finger_neg;
  Vec3 closing_axis = Vec3::UnitY();

  bool contains(const Vec3& p) const {
    return finger_pos.contains(p) || finger_neg.contains(p);
  }
};

struct GraspConstraints {
  double max_stretch = 0.0;  // meters; <= 0 resolves to 1.2 x median NN spacing
  Index k_neighbors = 8;     // redistribution fan-out and constraint graph degree
  int max_sweeps = 50;       // relaxation cap
};

/// Finger sweep volumes for an action: each box spans from the opening
/// separation max_open down to d along the closing axis (cos rot_z,
/// sin rot_z, 0), with cross-section finger_width x finger_height, the pair
/// symmetric about the grasp center.
SweptRegion swept_region(const GraspAction& action, const GripperModel& gripper);

/// Median distance to the nearest other point; 0 for clouds of fewer than
/// two points. Lower median on even counts.
double median_nn_spacing(const PointCloud& cloud);

/// Concrete constraints for a cloud: non-positive max_stretch becomes
/// 1.2 x median_nn_spacing(cloud).
GraspConstraints resolved_constraints(const GraspConstraints& constraints,
                                      const PointCloud& cloud);

/// Deforms the cloud under one pinch. Points inside the closed gripper
/// channel (between the opening positions of the fingers) project along the
/// closing axis onto the nearer final inner face; each projected point's
/// displacement excess over max_stretch is split across its k nearest
/// untouched neighbors along outward tangents; neighbor-pair distances are
/// then relaxed back to within max_stretch of their originals by
/// deterministic sequential sweeps. Size-preserving; d = max_open is the
/// identity.
PointCloud apply_grasp(const PointCloud& cloud, const GraspAction& action,
                       const GripperModel& gripper, const GraspConstraints& constraints);

/// Projection step of apply_grasp alone, for sparse centroid clouds.
Points propagate_centroids(const Points& centroids, const GraspAction& action,
                           const GripperModel& gripper);

/// JSON-lines action serialization: {"x":..,"y":..,"z":..,"rot_z":..,"d":..}.
void write_actions_jsonl(std::ostream& out, const std::vector<GraspAction>& actions);
void write_actions_jsonl_file(const std::string& path, const std::vector<GraspAction>& actions);
std::vector<GraspAction> read_actions_jsonl(std::istream& in);
std::vector<GraspAction> read_actions_jsonl_file(const std::string& path);

}  // namespace clay
