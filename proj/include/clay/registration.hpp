#pragma once

#include <clay/types.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace clay {

struct Correspondence {
  Index source_index = 0;
  Index target_index = 0;
  double residual = 0.0;  // meters
};

struct RegistrationResult {
  RigidTransform transform;
  Index inlier_count = 0;
  double rms_error = 0.0;  // over the final correspondence set, meters
  int iterations = 0;
};

struct RansacParams {
  int iterations = 1000;
  double inlier_threshold = 0.005;  // meters
  int sample_size = 3;              // minimal rigid fit
  std::uint64_t seed = 0;
};

struct IcpParams {
  int max_iters = 50;
  double convergence_tol = 1e-9;          // stop when RMS improves less, meters
  double max_correspondence_dist = 0.02;  // meters
};

/// Least-squares rigid fit source -> target over paired rows
/// (orthogonal Procrustes via SVD, reflection-corrected).
RigidTransform fit_rigid(const Points& source, const Points& target);

/// Coarse alignment. Putative matches come from nearest neighbors after the
/// source centroid is shifted onto the target centroid; each iteration fits a
/// transform to sample_size putative pairs and is scored by how many source
/// points land within inlier_threshold of some target point. The winner is
/// refit on its inlier matches. Collinear samples are skipped; if every
/// iteration degenerates, NoSolutionError.
RegistrationResult ransac_align(const PointCloud& source, const PointCloud& target,
                                const RansacParams& params);

/// Point-to-point ICP from an initial transform. Iterations whose match set
/// is empty raise IcpStallError carrying the last transform. The reported
/// RMS never increases from one accepted iteration to the next.
RegistrationResult icp_refine(const PointCloud& source, const PointCloud& target,
                              const RigidTransform& init, const IcpParams& params);

/// Applies each scan's transform into the world frame and concatenates.
PointCloud fuse_views(const std::vector<std::pair<PointCloud, RigidTransform>>& scans);

/// Camera-pose recovery: aligns each scan (camera frame) onto the reference
/// cloud (world frame), yielding world-from-camera transforms. With
/// initial_poses, RANSAC is skipped and ICP starts from the given pose;
/// without, ransac_align seeds ICP.
std::vector<RegistrationResult> calibrate_views(
    const std::vector<PointCloud>& scans, const PointCloud& reference,
    const std::vector<RigidTransform>* initial_poses, const RansacParams& ransac_params,
    const IcpParams& icp_params);

}  // namespace clay
