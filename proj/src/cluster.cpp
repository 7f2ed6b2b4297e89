#include <clay/cluster.hpp>

#include <clay/sampling.hpp>

#include <algorithm>
#include <array>
#include <limits>
#include <set>

namespace clay {

Index distinct_point_count(const PointCloud& cloud) {
  std::set<std::array<double, 3>> seen;
  for (Index i = 0; i < cloud.size(); ++i) {
    seen.insert({cloud.points(i, 0), cloud.points(i, 1), cloud.points(i, 2)});
  }
  return static_cast<Index>(seen.size());
}

namespace {

Index nearest_centroid(const Points& centroids, const Vec3& p) {
  Index best = 0;
  double best_d2 = squared_distance(p, centroids.row(0).transpose());
  for (Index c = 1; c < centroids.rows(); ++c) {
    const double d2 = squared_distance(p, centroids.row(c).transpose());
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

/// Moves the farthest member of the largest cluster into each empty cluster.
void repair_empty_clusters(const PointCloud& cloud, Points& centroids,
                           std::vector<Index>& assignment, std::vector<Index>& counts) {
  const Index k = centroids.rows();
  for (Index empty = 0; empty < k; ++empty) {
    if (counts[static_cast<std::size_t>(empty)] > 0) continue;

    Index largest = 0;
    for (Index c = 1; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(largest)])
        largest = c;
    }
    Index farthest = -1;
    double far_d2 = -1.0;
    for (Index i = 0; i < cloud.size(); ++i) {
      if (assignment[static_cast<std::size_t>(i)] != largest) continue;
      const double d2 =
          squared_distance(cloud.point(i), centroids.row(largest).transpose());
      if (d2 > far_d2) {
        far_d2 = d2;
        farthest = i;
      }
    }
    assignment[static_cast<std::size_t>(farthest)] = empty;
    centroids.row(empty) = cloud.points.row(farthest);
    --counts[static_cast<std::size_t>(largest)];
    ++counts[static_cast<std::size_t>(empty)];
  }
}

}  // namespace

ClusterSet kmeans(const PointCloud& cloud, Index k, std::uint64_t seed, int max_iters,
                  double tol, KMeansTrace* trace) {
  if (k < 1) throw InvalidInputError("kmeans: k must be positive");
  if (k > distinct_point_count(cloud))
    throw InvalidInputError("kmeans: k exceeds the number of distinct points");

  const Index n = cloud.size();
  ClusterSet result;
  result.centroids.resize(k, 3);
  const std::vector<Index> starts = farthest_point_sample(cloud, k, seed);
  for (Index c = 0; c < k; ++c) {
    result.centroids.row(c) = cloud.points.row(starts[static_cast<std::size_t>(c)]);
  }
  result.assignment.assign(static_cast<std::size_t>(n), 0);

  if (trace) {
    trace->objective.clear();
    trace->iterations = 0;
  }

  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    std::fill(counts.begin(), counts.end(), Index{0});
    for (Index i = 0; i < n; ++i) {
      const Index c = nearest_centroid(result.centroids, cloud.point(i));
      result.assignment[static_cast<std::size_t>(i)] = c;
      ++counts[static_cast<std::size_t>(c)];
    }
    repair_empty_clusters(cloud, result.centroids, result.assignment, counts);

    Points means = Points::Zero(k, 3);
    for (Index i = 0; i < n; ++i) {
      means.row(result.assignment[static_cast<std::size_t>(i)]) += cloud.points.row(i);
    }
    double movement = 0.0;
    for (Index c = 0; c < k; ++c) {
      means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
      movement = std::max(
          movement, (means.row(c) - result.centroids.row(c)).norm());
    }
    result.centroids = means;

    if (trace) {
      double objective = 0.0;
      for (Index i = 0; i < n; ++i) {
        objective += squared_distance(
            cloud.point(i),
            result.centroids.row(result.assignment[static_cast<std::size_t>(i)])
                .transpose());
      }
      trace->objective.push_back(objective);
      trace->iterations = iter + 1;
    }

    if (movement < tol) break;
  }
  return result;
}

}  // namespace clay
