#pragma once

#include <clay/grasp.hpp>
#include <clay/types.hpp>

#include <cstdint>
#include <vector>

namespace clay {

struct SamplerConfig {
  Index n_clusters = 10;
  Index n_samples = 35;
  Aabb bounds{Vec3(-0.2, -0.2, 0.0), Vec3(0.2, 0.2, 0.3)};
  std::uint64_t seed = 0;
  GripperModel gripper;
};

/// A matched state/target centroid pair and its Euclidean distance.
struct CentroidPair {
  Vec3 state = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  double distance = 0.0;
};

struct PairedClusters {
  std::vector<CentroidPair> pairs;     // bijection, ascending by match order
  std::vector<double> probabilities;   // distance / total distance; sums to 1
  bool degenerate = false;             // state ~ target; probabilities unusable
};

/// K-means both clouds with the same seed, then matches centroids greedily by
/// ascending distance (ties by state then target cluster index) until every
/// centroid is paired. Degenerate when the mean pair distance is below 1 nm.
PairedClusters pair_clusters(const PointCloud& state, const PointCloud& target,
                             Index k, std::uint64_t seed);

/// Inverse-CDF draws of pair indices, proportional to pair distance.
std::vector<std::size_t> draw_pairs(const PairedClusters& paired, Index n_draws,
                                    std::uint64_t seed);

/// The action aimed at pushing mu_state toward mu_target: position half a
/// gripper width past the state centroid along the pair direction, fingers
/// closing along that direction, gap set by the remaining distance to the
/// target. Position and gap are clamped to bounds and gripper limits.
GraspAction action_from_pair(const Vec3& mu_state, const Vec3& mu_target,
                             const SamplerConfig& cfg);

/// cfg.n_samples actions from distance-weighted pair draws (with
/// replacement). An empty list signals convergence (state ~ target).
std::vector<GraspAction> geometric_sample(const PointCloud& state, const PointCloud& target,
                                          const SamplerConfig& cfg);

/// cfg.n_samples actions uniform over the 5-D action box
/// (bounds x [-pi, pi) x [d_min, d_max)).
std::vector<GraspAction> random_sample(const SamplerConfig& cfg);

}  // namespace clay
