#include <clay/kdtree.hpp>
#include <clay/preprocess.hpp>
#include <clay/sampling.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace clay {

namespace {

Points take_rows(const Points& pts, const std::vector<Index>& keep) {
  Points out(static_cast<Index>(keep.size()), 3);
  for (std::size_t k = 0; k < keep.size(); ++k)
    out.row(static_cast<Index>(k)) = pts.row(keep[k]);
  return out;
}

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Boundary-inclusive test against a counterclockwise convex polygon.
bool inside_convex(const std::vector<Vec2>& hull, const Vec2& p) {
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross2(hull[i], hull[(i + 1) % n], p) < -1e-12) return false;
  }
  return true;
}

}  // namespace

std::string to_string(Label label) {
  switch (label) {
    case Label::clay: return "clay";
    case Label::table: return "table";
    case Label::stage: return "stage";
    case Label::other: return "other";
  }
  throw InvalidInputError("to_string: unknown label");
}

Label label_from_string(const std::string& text) {
  if (text == "clay") return Label::clay;
  if (text == "table") return Label::table;
  if (text == "stage") return Label::stage;
  if (text == "other") return Label::other;
  throw InvalidInputError("label_from_string: unknown label '" + text + "'");
}

RawScan crop_workspace(const RawScan& scan, const Aabb& bounds) {
  if (!bounds.valid()) throw InvalidInputError("crop_workspace: invalid bounds");
  if (scan.labels.size() != static_cast<std::size_t>(scan.size()))
    throw InvalidInputError("crop_workspace: label/point length mismatch");

  std::vector<Index> keep;
  for (Index i = 0; i < scan.size(); ++i) {
    if (bounds.contains(scan.cloud.point(i))) keep.push_back(i);
  }

  RawScan out;
  out.cloud.frame = scan.cloud.frame;
  out.cloud.points = take_rows(scan.cloud.points, keep);
  out.labels.reserve(keep.size());
  for (Index i : keep) out.labels.push_back(scan.labels[static_cast<std::size_t>(i)]);
  return out;
}

PointCloud isolate_clay(const RawScan& scan) {
  if (scan.labels.size() != static_cast<std::size_t>(scan.size()))
    throw InvalidInputError("isolate_clay: label/point length mismatch");

  std::vector<Index> keep;
  for (Index i = 0; i < scan.size(); ++i) {
    if (scan.labels[static_cast<std::size_t>(i)] == Label::clay) keep.push_back(i);
  }
  if (keep.empty()) throw EmptyClayError("isolate_clay: no clay-labeled points");
  return PointCloud(take_rows(scan.cloud.points, keep), scan.cloud.frame);
}

PointCloud remove_outliers(const PointCloud& cloud, Index k_neighbors, double std_ratio) {
  if (k_neighbors < 1) throw InvalidInputError("remove_outliers: k_neighbors must be >= 1");
  if (cloud.size() <= k_neighbors)
    throw InvalidInputError("remove_outliers: cloud not larger than k_neighbors");

  const KdTree tree(cloud.points);
  const Index n = cloud.size();
  std::vector<double> mean_dist(static_cast<std::size_t>(n));
  std::vector<Index> idx;
  std::vector<double> d2;
  for (Index i = 0; i < n; ++i) {
    // k+1 nearest includes the query point itself; drop it by index. With
    // coincident points the self entry may not make the cut, so drop the
    // farthest entry instead — the k kept distances are the same either way.
    tree.knearest(cloud.point(i), static_cast<int>(k_neighbors) + 1, idx, d2);
    double sum = 0.0;
    Index counted = 0;
    bool self_seen = false;
    for (std::size_t j = 0; j < idx.size() && counted < k_neighbors; ++j) {
      if (!self_seen && idx[j] == i) {
        self_seen = true;
        continue;
      }
      sum += std::sqrt(d2[j]);
      ++counted;
    }
    mean_dist[static_cast<std::size_t>(i)] = sum / static_cast<double>(counted);
  }

  double mean = 0.0;
  for (double d : mean_dist) mean += d;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double d : mean_dist) var += (d - mean) * (d - mean);
  const double std_dev = std::sqrt(var / static_cast<double>(n));
  const double threshold = mean + std_ratio * std_dev;

  std::vector<Index> keep;
  for (Index i = 0; i < n; ++i) {
    if (mean_dist[static_cast<std::size_t>(i)] <= threshold) keep.push_back(i);
  }
  return PointCloud(take_rows(cloud.points, keep), cloud.frame);
}

std::vector<Index> convex_hull_2d(const std::vector<Vec2>& pts) {
  const auto n = static_cast<Index>(pts.size());
  if (n < 3) return {};

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto& pa = pts[static_cast<std::size_t>(a)];
    const auto& pb = pts[static_cast<std::size_t>(b)];
    return pa.x() < pb.x() || (pa.x() == pb.x() && pa.y() < pb.y());
  });

  auto at = [&](Index i) -> const Vec2& { return pts[static_cast<std::size_t>(i)]; };
  std::vector<Index> hull(2 * static_cast<std::size_t>(n));
  std::size_t k = 0;
  for (Index i = 0; i < n; ++i) {  // lower chain
    const Index p = order[static_cast<std::size_t>(i)];
    while (k >= 2 && cross2(at(hull[k - 2]), at(hull[k - 1]), at(p)) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (Index i = n - 2; i >= 0; --i) {  // upper chain
    const Index p = order[static_cast<std::size_t>(i)];
    while (k >= lower && cross2(at(hull[k - 2]), at(hull[k - 1]), at(p)) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);  // last point repeats the first
  if (hull.size() < 3) return {};
  return hull;
}

PointCloud complete_base(const PointCloud& cloud, double base_band, double grid_step) {
  if (cloud.empty()) throw InvalidInputError("complete_base: empty cloud");
  if (base_band <= 0.0 || grid_step <= 0.0)
    throw InvalidInputError("complete_base: base_band and grid_step must be positive");

  const double min_z = cloud.points.col(2).minCoeff();
  std::vector<Vec2> band;
  for (Index i = 0; i < cloud.size(); ++i) {
    if (cloud.points(i, 2) < min_z + base_band)
      band.emplace_back(cloud.points(i, 0), cloud.points(i, 1));
  }
  if (band.size() < 3)
    throw NoBaseError("complete_base: fewer than 3 points in the base band");

  const std::vector<Index> hull_idx = convex_hull_2d(band);
  if (hull_idx.empty())
    throw NoBaseError("complete_base: base outline is degenerate");
  std::vector<Vec2> hull;
  hull.reserve(hull_idx.size());
  for (Index i : hull_idx) hull.push_back(band[static_cast<std::size_t>(i)]);

  Vec2 lo = hull[0];
  Vec2 hi = hull[0];
  for (const Vec2& p : hull) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }

  std::vector<Vec2> fill;
  for (double x = lo.x(); x <= hi.x() + 1e-12; x += grid_step) {
    for (double y = lo.y(); y <= hi.y() + 1e-12; y += grid_step) {
      if (inside_convex(hull, Vec2(x, y))) fill.emplace_back(x, y);
    }
  }

  PointCloud out;
  out.frame = cloud.frame;
  out.points.resize(cloud.size() + static_cast<Index>(fill.size()), 3);
  out.points.topRows(cloud.size()) = cloud.points;
  for (std::size_t k = 0; k < fill.size(); ++k) {
    out.points.row(cloud.size() + static_cast<Index>(k)) << fill[k].x(), fill[k].y(), min_z;
  }
  return out;
}

ClayShell preprocess_pipeline(const RawScan& scan, const PreprocessConfig& config) {
  if (config.n < 1) throw InvalidInputError("preprocess_pipeline: n must be >= 1");

  // Stage errors already carry their operation name in the message.
  const RawScan cropped = crop_workspace(scan, config.bounds);
  const PointCloud clay = isolate_clay(cropped);
  const PointCloud filtered = remove_outliers(clay, config.k_neighbors, config.std_ratio);
  const PointCloud closed = complete_base(filtered, config.base_band, config.grid_step);

  if (closed.size() < config.n)
    throw InvalidInputError("preprocess_pipeline: fewer points than n after base completion");

  const double base_z = closed.points.col(2).minCoeff();
  PointCloud shell = downsample_random(closed, config.n, config.seed);

  // The random draw can miss every base-plane point; swap the lowest one in
  // so the shell keeps min z == base_z.
  Index sample_min = 0;
  shell.points.col(2).minCoeff(&sample_min);
  if (shell.points(sample_min, 2) > base_z) {
    Index lowest = 0;
    closed.points.col(2).minCoeff(&lowest);
    Index highest = 0;
    shell.points.col(2).maxCoeff(&highest);
    shell.points.row(highest) = closed.points.row(lowest);
  }

  return {std::move(shell), base_z};
}

void write_labels(std::ostream& out, const std::vector<Label>& labels) {
  for (Label label : labels) out << to_string(label) << '\n';
}

void write_labels_file(const std::string& path, const std::vector<Label>& labels) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("write_labels_file: cannot open " + path);
  write_labels(out, labels);
  if (!out) throw InvalidInputError("write_labels_file: write failed for " + path);
}

std::vector<Label> read_labels(std::istream& in) {
  std::vector<Label> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    labels.push_back(label_from_string(line));
  }
  return labels;
}

std::vector<Label> read_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("read_labels_file: cannot open " + path);
  return read_labels(in);
}

}  // namespace clay
