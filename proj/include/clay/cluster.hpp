#pragma once

#include <clay/types.hpp>

#include <cstdint>
#include <vector>

namespace clay {

struct ClusterSet {
  Points centroids;               // k x 3; each row is the mean of its members
  std::vector<Index> assignment;  // per cloud point, index into centroids

  Index cluster_count() const { return centroids.rows(); }
};

struct KMeansTrace {
  std::vector<double> objective;  // sum of squared point-to-centroid distances
  int iterations = 0;
};

/// Lloyd k-means seeded by farthest-point sampling. Stops when the largest
/// centroid movement drops below tol or after max_iters assignment rounds.
/// Empty clusters are repaired by stealing the farthest point of the largest
/// cluster, so no cluster is empty on return.
ClusterSet kmeans(const PointCloud& cloud, Index k, std::uint64_t seed,
                  int max_iters = 100, double tol = 1e-10,
                  KMeansTrace* trace = nullptr);

/// Number of distinct coordinate triples in the cloud.
Index distinct_point_count(const PointCloud& cloud);

}  // namespace clay
