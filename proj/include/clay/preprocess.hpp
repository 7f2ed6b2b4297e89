#pragma once

#include <clay/types.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace clay {

/// Stand-in for color classification of a raw scan point.
enum class Label { clay, table, stage, other };

std::string to_string(Label label);
Label label_from_string(const std::string& text);

struct RawScan {
  PointCloud cloud;
  std::vector<Label> labels;  // same length as cloud

  Index size() const { return cloud.size(); }
};

/// Cleaned, enclosed, fixed-size clay cloud resting on the stage plane.
struct ClayShell {
  PointCloud cloud;
  double base_z = 0.0;  // stage height; min z of cloud within 1e-6
};

struct PreprocessConfig {
  Aabb bounds{Vec3(-0.2, -0.2, -0.05), Vec3(0.2, 0.2, 0.3)};
  Index n = 2048;              // output cloud size
  double base_band = 0.003;    // base-point band above min z, meters
  double grid_step = 0.002;    // base fill spacing, meters
  Index k_neighbors = 20;      // outlier filter neighborhood
  double std_ratio = 2.0;      // outlier filter threshold multiplier
  std::uint64_t seed = 0;
};

/// Keeps the points inside the closed box, labels carried along.
RawScan crop_workspace(const RawScan& scan, const Aabb& bounds);

/// Exactly the clay-labeled points. EmptyClayError when there are none.
PointCloud isolate_clay(const RawScan& scan);

/// Statistical outlier filter: drops points whose mean distance to their
/// k nearest neighbors exceeds (global mean + std_ratio * global std).
PointCloud remove_outliers(const PointCloud& cloud, Index k_neighbors, double std_ratio);

/// Closes the bottom of a shell: x-y convex hull of points with
/// z < min_z + base_band, filled with a grid at z = min_z spaced grid_step,
/// appended to the input. NoBaseError when fewer than 3 band points exist.
PointCloud complete_base(const PointCloud& cloud, double base_band, double grid_step);

/// crop -> isolate -> remove_outliers -> complete_base -> downsample to n.
/// Stage errors propagate with the stage name attached.
ClayShell preprocess_pipeline(const RawScan& scan, const PreprocessConfig& config);

/// One label token per line, matching point order.
void write_labels(std::ostream& out, const std::vector<Label>& labels);
void write_labels_file(const std::string& path, const std::vector<Label>& labels);
std::vector<Label> read_labels(std::istream& in);
std::vector<Label> read_labels_file(const std::string& path);

/// Indices of the convex hull of 2-D points in counterclockwise order
/// (monotone chain; collinear boundary points dropped). Exposed for tests.
std::vector<Index> convex_hull_2d(const std::vector<Vec2>& pts);

}  // namespace clay
