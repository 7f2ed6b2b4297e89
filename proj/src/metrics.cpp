#include <clay/metrics.hpp>

namespace clay {

namespace {

void require_metric_pair(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw InvalidInputError("chamfer_distance: empty cloud");
  if (a.frame != b.frame)
    throw InvalidInputError("chamfer_distance: frame mismatch (" + a.frame + " vs " +
                            b.frame + ")");
}

double directed_sum(const Points& from, const KdTree& to_tree) {
  double sum = 0.0;
  for (Index i = 0; i < from.rows(); ++i) {
    sum += to_tree.min_squared_distance(from.row(i).transpose());
  }
  return sum;
}

}  // namespace

double chamfer_distance(const Points& a, const Points& b, const KdTree& a_tree,
                        const KdTree& b_tree) {
  return directed_sum(a, b_tree) + directed_sum(b, a_tree);
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  require_metric_pair(a, b);
  const KdTree a_tree(a.points);
  const KdTree b_tree(b.points);
  return chamfer_distance(a.points, b.points, a_tree, b_tree);
}

double chamfer_mean(const PointCloud& a, const PointCloud& b) {
  require_metric_pair(a, b);
  const KdTree a_tree(a.points);
  const KdTree b_tree(b.points);
  return directed_sum(a.points, b_tree) / static_cast<double>(a.size()) +
         directed_sum(b.points, a_tree) / static_cast<double>(b.size());
}

std::pair<Index, double> nearest_neighbor(const Vec3& query, const PointCloud& cloud) {
  if (cloud.empty()) throw InvalidInputError("nearest_neighbor: empty cloud");
  return KdTree(cloud.points).nearest(query);
}

}  // namespace clay
