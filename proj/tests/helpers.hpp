#pragma once

#include <clay/rng.hpp>
#include <clay/types.hpp>

#include <limits>
#include <utility>

namespace clay::testing {

/// Uniform cloud in [-extent, extent]^3.
inline PointCloud random_cloud(Index n, Rng& rng, double extent = 1.0) {
  Points pts(n, 3);
  for (Index i = 0; i < n; ++i) {
    pts(i, 0) = rng.uniform(-extent, extent);
    pts(i, 1) = rng.uniform(-extent, extent);
    pts(i, 2) = rng.uniform(-extent, extent);
  }
  return PointCloud(std::move(pts));
}

/// Independent O(n*m) Chamfer oracle: same kernel, same accumulation order.
inline double brute_chamfer(const PointCloud& a, const PointCloud& b) {
  const auto directed = [](const Points& from, const Points& to) {
    double total = 0.0;
    for (Index i = 0; i < from.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < to.rows(); ++j) {
        const double d2 = squared_distance(from.row(i).transpose(), to.row(j).transpose());
        if (d2 < best) best = d2;
      }
      total += best;
    }
    return total;
  };
  return directed(a.points, b.points) + directed(b.points, a.points);
}

/// Linear-scan nearest neighbor with the lowest-index tie rule.
inline std::pair<Index, double> linear_nn(const Vec3& q, const Points& pts) {
  Index best_idx = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < pts.rows(); ++j) {
    const double d2 = squared_distance(q, pts.row(j).transpose());
    if (d2 < best) {
      best = d2;
      best_idx = j;
    }
  }
  return {best_idx, best};
}

/// Seeded random rotation (uniform axis, uniform angle) plus translation.
inline RigidTransform random_rigid(Rng& rng, double max_shift = 1.0) {
  Vec3 axis = rng.normal3(1.0);
  while (axis.norm() < 1e-12) axis = rng.normal3(1.0);
  axis.normalize();
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(rng.uniform(0.0, 2.0 * M_PI), axis).toRotationMatrix();
  t.translation = Vec3(rng.uniform(-max_shift, max_shift), rng.uniform(-max_shift, max_shift),
                       rng.uniform(-max_shift, max_shift));
  return t;
}

}  // namespace clay::testing
