#pragma once

#include <clay/types.hpp>

#include <cstdint>
#include <vector>

namespace clay {

/// Greedy farthest-point sampling. The start index is a seeded uniform draw;
/// each following pick maximizes the minimum distance to the chosen set, with
/// ties resolved to the lowest index.
std::vector<Index> farthest_point_sample(const PointCloud& cloud, Index k,
                                         std::uint64_t seed);

/// Uniform sample of n points without replacement (partial Fisher-Yates).
PointCloud downsample_random(const PointCloud& cloud, Index n, std::uint64_t seed);

/// Points of one kNN group, expressed relative to the group's centroid.
struct PointGroup {
  std::vector<Index> indices;  // into the source cloud, ascending (d2, index)
  Points local;                // group_size x 3, centroid subtracted
};

/// For each centroid, the group_size nearest cloud points (ties by index),
/// re-expressed relative to that centroid. Groups may overlap.
std::vector<PointGroup> knn_group(const PointCloud& cloud, const Points& centroids,
                                  Index group_size);

}  // namespace clay
