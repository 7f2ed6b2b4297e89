#include <clay/sampling.hpp>

#include <clay/kdtree.hpp>
#include <clay/rng.hpp>

#include <limits>
#include <numeric>

namespace clay {

std::vector<Index> farthest_point_sample(const PointCloud& cloud, Index k,
                                         std::uint64_t seed) {
  const Index n = cloud.size();
  if (k < 1 || k > n)
    throw InvalidInputError("farthest_point_sample: k must be in [1, cloud size]");

  Rng rng(seed);
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  chosen.push_back(static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));

  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  taken[static_cast<std::size_t>(chosen.back())] = 1;
  std::vector<double> min_d2(static_cast<std::size_t>(n),
                             std::numeric_limits<double>::infinity());
  for (Index pick = 1; pick < k; ++pick) {
    const Vec3 last = cloud.point(chosen.back());
    Index best = -1;
    double best_d2 = -1.0;
    for (Index i = 0; i < n; ++i) {
      auto& d2 = min_d2[static_cast<std::size_t>(i)];
      d2 = std::min(d2, squared_distance(cloud.point(i), last));
      if (!taken[static_cast<std::size_t>(i)] && d2 > best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    chosen.push_back(best);
    taken[static_cast<std::size_t>(best)] = 1;
  }
  return chosen;
}

PointCloud downsample_random(const PointCloud& cloud, Index n, std::uint64_t seed) {
  const Index total = cloud.size();
  if (n > total) throw InvalidInputError("downsample_random: n exceeds cloud size");

  Rng rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = 0; i < n; ++i) {
    const auto j = i + static_cast<Index>(
                           rng.uniform_index(static_cast<std::uint64_t>(total - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  PointCloud out;
  out.frame = cloud.frame;
  out.points.resize(n, 3);
  for (Index i = 0; i < n; ++i) {
    out.points.row(i) = cloud.points.row(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<PointGroup> knn_group(const PointCloud& cloud, const Points& centroids,
                                  Index group_size) {
  if (centroids.rows() == 0) throw InvalidInputError("knn_group: no centroids");
  if (group_size < 1 || group_size > cloud.size())
    throw InvalidInputError("knn_group: group_size must be in [1, cloud size]");

  const KdTree tree(cloud.points);
  std::vector<PointGroup> groups(static_cast<std::size_t>(centroids.rows()));
  std::vector<double> d2;
  for (Index c = 0; c < centroids.rows(); ++c) {
    const Vec3 centroid = centroids.row(c).transpose();
    PointGroup& group = groups[static_cast<std::size_t>(c)];
    tree.knearest(centroid, static_cast<int>(group_size), group.indices, d2);
    group.local.resize(group_size, 3);
    for (Index i = 0; i < group_size; ++i) {
      group.local.row(i) =
          cloud.points.row(group.indices[static_cast<std::size_t>(i)]) -
          centroid.transpose();
    }
  }
  return groups;
}

}  // namespace clay
