#pragma once

#include <clay/kdtree.hpp>
#include <clay/types.hpp>

#include <utility>

namespace clay {

/// Symmetric sum of squared nearest-neighbor distances between two clouds.
/// Both directed sums are accumulated in point order with the
/// squared_distance kernel, so the value matches a brute-force double loop
/// exactly.
double chamfer_distance(const PointCloud& a, const PointCloud& b);

/// Variant reusing caller-built indices; a_tree indexes a, b_tree indexes b.
double chamfer_distance(const Points& a, const Points& b, const KdTree& a_tree,
                        const KdTree& b_tree);

/// Reporting variant: each directed sum divided by its own cloud size.
double chamfer_mean(const PointCloud& a, const PointCloud& b);

/// Index of the cloud point nearest to query plus its squared distance.
/// Equal distances resolve to the lowest index.
std::pair<Index, double> nearest_neighbor(const Vec3& query, const PointCloud& cloud);

}  // namespace clay
