#pragma once

#include <clay/grasp.hpp>
#include <clay/preprocess.hpp>
#include <clay/types.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace clay {

/// Height of the elevated stage surface in the world frame.
inline constexpr double kStageZ = 0.0;

/// Diameter and height of the starting clay cylinder.
inline constexpr double kClayDiameter = 0.06;
inline constexpr double kClayHeight = 0.025;

struct TargetShape {
  std::string name;
  std::map<std::string, double> params;  // dimensions in meters
  PointCloud cloud;
};

struct EnvConfig {
  double noise_sigma = 0.0;  // meters, per-coordinate jitter after each step
  bool reshell = false;      // re-run base completion + downsample after each step
  std::uint64_t seed = 0;
  GripperModel gripper;
  GraspConstraints constraints;
  double base_band = 0.003;  // reshell parameters
  double grid_step = 0.002;
};

/// n surface samples of the starting cylinder (side, top, and bottom caps,
/// counts proportional to area), base resting on the stage. The bottom cap
/// keeps min z at the stage height exactly.
PointCloud make_initial_clay(Index n, std::uint64_t seed);

const std::vector<std::string>& target_names();

/// Procedural closed-surface target at the stage origin. Every shape's
/// volume stays within 15% of the starting cylinder's. Dimensions are
/// recorded in the returned params and in docs/FORMATS.md.
TargetShape make_target(const std::string& name, Index n, std::uint64_t seed);

/// Hardware stand-in: apply_grasp, then optional Gaussian jitter, then
/// optional re-shelling back to the input size. With noise_sigma = 0 and
/// reshell = false the output is bitwise the apply_grasp result.
PointCloud env_step(const PointCloud& cloud, const GraspAction& action, const EnvConfig& cfg);

/// Asymmetric wedge plate (slab, tilted prism, off-corner cube) for
/// registration tests; no rotation maps the surface near itself.
PointCloud make_registration_object(Index n, std::uint64_t seed);

/// count camera poses (world-from-camera) evenly spaced on a horizontal
/// ring of the given radius and height, each looking at look_at.
std::vector<RigidTransform> ring_cameras(int count, double radius, double height,
                                         const Vec3& look_at = Vec3::Zero());

/// One RawScan per camera: the object transformed into the camera frame with
/// back-facing points culled by the hemisphere heuristic and Gaussian sensor
/// noise added, labeled clay; plus generated stage and table points labeled
/// accordingly. Set the extra counts to zero for object-only scans.
std::vector<RawScan> synth_scan(const PointCloud& object,
                                const std::vector<RigidTransform>& cameras,
                                double sensor_noise, std::uint64_t seed,
                                Index n_stage = 256, Index n_table = 256);

/// Jitters a pose by a rotation of up to max_angle radians about a random
/// axis and a translation of up to max_shift meters. Stands in for the
/// hand-measured approximate extrinsics that seed calibration.
RigidTransform perturb_pose(const RigidTransform& pose, double max_angle, double max_shift,
                            std::uint64_t seed);

}  // namespace clay
