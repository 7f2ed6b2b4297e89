#include <clay/grasp.hpp>
#include <clay/kdtree.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

namespace clay {

namespace {

// Grasp-local frame: u is the closing axis (fingers travel along +-u),
// v completes a right-handed basis with world z.
struct GraspFrame {
  Vec3 center;
  Vec3 u;
  Vec3 v;

  GraspFrame(const GraspAction& action)
      : center(action.position()),
        u(std::cos(action.rot_z), std::sin(action.rot_z), 0.0),
        v(std::sin(action.rot_z), -std::cos(action.rot_z), 0.0) {}

  double lu(const Vec3& p) const { return (p - center).dot(u); }
  double lv(const Vec3& p) const { return (p - center).dot(v); }
  double lz(const Vec3& p) const { return p.z() - center.z(); }
};

void validate_action(const GraspAction& action, const GripperModel& gripper,
                     const char* op) {
  if (!gripper.valid())
    throw InvalidInputError(std::string(op) + ": invalid gripper dimensions");
  if (!action.all_finite())
    throw InvalidInputError(std::string(op) + ": non-finite action");
  if (action.d < gripper.min_close || action.d > gripper.max_open)
    throw InvalidInputError(std::string(op) + ": d outside [d_min, d_max]");
}

// sign with sign(0) = +1, so a point exactly on the grasp center plane
// lands deterministically on the +u face.
double face_sign(double lu) { return lu >= 0.0 ? 1.0 : -1.0; }

bool channel_inlier(const GraspFrame& frame, const GripperModel& gripper, const Vec3& p) {
  return std::abs(frame.lu(p)) <= 0.5 * gripper.max_open &&
         std::abs(frame.lv(p)) <= 0.5 * gripper.finger_width &&
         std::abs(frame.lz(p)) <= 0.5 * gripper.finger_height;
}

// Unit direction away from the closing axis at constant lu; material flows
// sideways out of the pinch along it. Degenerates on the axis itself, where
// +v is the deterministic fallback.
Vec3 outward_tangent(const GraspFrame& frame, const Vec3& p) {
  const Vec3 t = frame.v * frame.lv(p) + Vec3::UnitZ() * frame.lz(p);
  const double norm = t.norm();
  if (norm < 1e-12) return frame.v;
  return t / norm;
}

// Region no free point may occupy after the pinch: the open gripper channel
// (swept volume, inter-finger slab, and final finger bodies), faces excluded.
struct ForbiddenRegion {
  GraspFrame frame;
  double face;   // |lu| of the final inner faces
  double outer;  // |lu| of the outer forbidden bound
  double half_w;
  double half_h;

  ForbiddenRegion(const GraspAction& action, const GripperModel& gripper)
      : frame(action),
        face(0.5 * action.d),
        outer(std::max(0.5 * gripper.max_open, 0.5 * action.d + gripper.finger_thickness)),
        half_w(0.5 * gripper.finger_width),
        half_h(0.5 * gripper.finger_height) {}

  // Snaps p along the closing axis to the nearer allowed plane (inner face
  // or outer bound) when it lies strictly inside the region.
  void snap(Vec3& p) const {
    if (std::abs(frame.lv(p)) >= half_w || std::abs(frame.lz(p)) >= half_h) return;
    const double lu = frame.lu(p);
    const double au = std::abs(lu);
    if (au >= outer || au == face) return;
    const double target = au - face <= outer - au ? face : outer;
    p += frame.u * (face_sign(lu) * target - lu);
  }
};

// Undirected kNN graph edges (a < b), ascending, with rest lengths.
struct GraphEdge {
  Index a;
  Index b;
  double rest;

  bool operator<(const GraphEdge& o) const { return a < o.a || (a == o.a && b < o.b); }
};

std::vector<GraphEdge> knn_graph(const Points& pts, const KdTree& tree, Index k) {
  std::set<std::pair<Index, Index>> seen;
  std::vector<Index> idx;
  std::vector<double> d2;
  for (Index i = 0; i < pts.rows(); ++i) {
    tree.knearest(pts.row(i).transpose(), static_cast<int>(k) + 1, idx, d2);
    Index counted = 0;
    bool self_seen = false;
    for (std::size_t j = 0; j < idx.size() && counted < k; ++j) {
      if (!self_seen && idx[j] == i) {
        self_seen = true;
        continue;
      }
      seen.emplace(std::min(i, idx[j]), std::max(i, idx[j]));
      ++counted;
    }
  }
  std::vector<GraphEdge> edges;
  edges.reserve(seen.size());
  for (const auto& [a, b] : seen) {
    edges.push_back({a, b, (pts.row(a) - pts.row(b)).norm()});
  }
  return edges;  // set iteration order is already ascending (a, b)
}

}  // namespace

SweptRegion swept_region(const GraspAction& action, const GripperModel& gripper) {
  validate_action(action, gripper, "swept_region");

  const GraspFrame frame(action);
  const double depth = 0.5 * (gripper.max_open - action.d);  // per finger
  const double mid = 0.5 * (0.5 * gripper.max_open + 0.5 * action.d);

  Mat3 axes;
  axes.col(0) = frame.v;
  axes.col(1) = frame.u;
  axes.col(2) = Vec3::UnitZ();
  const Vec3 half(0.5 * gripper.finger_width, 0.5 * depth, 0.5 * gripper.finger_height);

  SweptRegion region;
  region.closing_axis = frame.u;
  region.finger_pos = {frame.center + frame.u * mid, axes, half};
  region.finger_neg = {frame.center - frame.u * mid, axes, half};
  return region;
}

double median_nn_spacing(const PointCloud& cloud) {
  const Index n = cloud.size();
  if (n < 2) return 0.0;

  const KdTree tree(cloud.points);
  std::vector<double> spacing;
  spacing.reserve(static_cast<std::size_t>(n));
  std::vector<Index> idx;
  std::vector<double> d2;
  for (Index i = 0; i < n; ++i) {
    tree.knearest(cloud.point(i), 2, idx, d2);
    // The self entry is usually first; with coincident points it may be
    // displaced by a lower-index twin, in which case that twin is the
    // nearest neighbor (distance 0).
    const std::size_t j = idx[0] == i ? 1 : 0;
    spacing.push_back(std::sqrt(d2[j]));
  }
  const auto mid = spacing.begin() + (spacing.size() - 1) / 2;  // lower median
  std::nth_element(spacing.begin(), mid, spacing.end());
  return *mid;
}

GraspConstraints resolved_constraints(const GraspConstraints& constraints,
                                      const PointCloud& cloud) {
  GraspConstraints out = constraints;
  if (out.k_neighbors < 1)
    throw InvalidInputError("resolved_constraints: k_neighbors must be >= 1");
  if (out.max_sweeps < 0)
    throw InvalidInputError("resolved_constraints: max_sweeps must be >= 0");
  if (out.max_stretch <= 0.0) out.max_stretch = 1.2 * median_nn_spacing(cloud);
  return out;
}

PointCloud apply_grasp(const PointCloud& cloud, const GraspAction& action,
                       const GripperModel& gripper, const GraspConstraints& constraints) {
  validate_action(action, gripper, "apply_grasp");
  if (cloud.empty()) throw InvalidInputError("apply_grasp: empty cloud");
  if (!cloud.all_finite()) throw InvalidInputError("apply_grasp: non-finite cloud");

  if (action.d == gripper.max_open) return cloud;  // empty sweep, exact identity

  const GraspConstraints resolved = resolved_constraints(constraints, cloud);
  const GraspFrame frame(action);
  const ForbiddenRegion forbidden(action, gripper);
  const Index n = cloud.size();

  std::vector<char> inlier(static_cast<std::size_t>(n), 0);
  std::vector<Index> inliers;
  std::vector<Index> outsiders;
  for (Index i = 0; i < n; ++i) {
    if (channel_inlier(frame, gripper, cloud.point(i))) {
      inlier[static_cast<std::size_t>(i)] = 1;
      inliers.push_back(i);
    } else {
      outsiders.push_back(i);
    }
  }
  if (inliers.empty()) return cloud;

  Points out = cloud.points;
  std::vector<char> moved(static_cast<std::size_t>(n), 0);

  // Phase 1: project every channel point onto the nearer final inner face.
  std::vector<double> excess(inliers.size(), 0.0);
  for (std::size_t k = 0; k < inliers.size(); ++k) {
    const Index i = inliers[k];
    const double lu = frame.lu(cloud.point(i));
    const double shift = face_sign(lu) * 0.5 * action.d - lu;
    out.row(i) += (frame.u * shift).transpose();
    moved[static_cast<std::size_t>(i)] = 1;
    excess[k] = std::max(0.0, std::abs(shift) - resolved.max_stretch);
  }

  // Phase 2: split each projected point's displacement excess across its
  // k nearest untouched neighbors, pushed along their outward tangents.
  if (!outsiders.empty()) {
    Points outsider_pts(static_cast<Index>(outsiders.size()), 3);
    for (std::size_t k = 0; k < outsiders.size(); ++k)
      outsider_pts.row(static_cast<Index>(k)) = cloud.points.row(outsiders[k]);
    const KdTree outsider_tree(outsider_pts);
    const int fan = static_cast<int>(
        std::min<Index>(resolved.k_neighbors, static_cast<Index>(outsiders.size())));

    std::vector<Index> idx;
    std::vector<double> d2;
    for (std::size_t k = 0; k < inliers.size(); ++k) {
      if (excess[k] <= 0.0) continue;
      outsider_tree.knearest(cloud.point(inliers[k]), fan, idx, d2);
      const double share = excess[k] / static_cast<double>(fan);
      for (Index local : idx) {
        const Index j = outsiders[static_cast<std::size_t>(local)];
        Vec3 p = out.row(j).transpose();
        p += outward_tangent(frame, p) * share;
        forbidden.snap(p);
        out.row(j) = p.transpose();
        moved[static_cast<std::size_t>(j)] = 1;
      }
    }
  }

  // Phase 3: Gauss-Seidel sweeps restoring neighbor-pair distances to within
  // max_stretch of their originals. Edges activate once an endpoint has
  // moved; projected points stay pinned to the faces.
  const KdTree full_tree(cloud.points);
  const std::vector<GraphEdge> edges = knn_graph(cloud.points, full_tree, resolved.k_neighbors);

  std::vector<char> active(edges.size(), 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    active[e] = moved[static_cast<std::size_t>(edges[e].a)] ||
                moved[static_cast<std::size_t>(edges[e].b)];
  }

  constexpr double kSlack = 1e-12;  // ignore sub-numeric violations
  for (int sweep = 0; sweep < resolved.max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (!active[e]) continue;
      const Index a = edges[e].a;
      const Index b = edges[e].b;
      const bool pin_a = inlier[static_cast<std::size_t>(a)];
      const bool pin_b = inlier[static_cast<std::size_t>(b)];
      if (pin_a && pin_b) continue;

      Vec3 pa = out.row(a).transpose();
      Vec3 pb = out.row(b).transpose();
      const double dist = (pb - pa).norm();
      double target = dist;
      if (dist > edges[e].rest + resolved.max_stretch + kSlack) {
        target = edges[e].rest + resolved.max_stretch;
      } else if (dist < edges[e].rest - resolved.max_stretch - kSlack) {
        target = edges[e].rest - resolved.max_stretch;
      } else {
        continue;
      }

      const Vec3 dir = dist > 1e-12 ? Vec3((pb - pa) / dist) : outward_tangent(frame, pa);
      const double correction = target - dist;  // >0 lengthens the edge
      if (pin_a) {
        pb += dir * correction;
        forbidden.snap(pb);
        out.row(b) = pb.transpose();
      } else if (pin_b) {
        pa -= dir * correction;
        forbidden.snap(pa);
        out.row(a) = pa.transpose();
      } else {
        pa -= dir * (0.5 * correction);
        pb += dir * (0.5 * correction);
        forbidden.snap(pa);
        forbidden.snap(pb);
        out.row(a) = pa.transpose();
        out.row(b) = pb.transpose();
      }
      moved[static_cast<std::size_t>(a)] |= !pin_a;
      moved[static_cast<std::size_t>(b)] |= !pin_b;
      changed = true;
    }
    if (!changed) break;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (!active[e]) {
        active[e] = moved[static_cast<std::size_t>(edges[e].a)] ||
                    moved[static_cast<std::size_t>(edges[e].b)];
      }
    }
  }

  // Separations above max_open - 2*thickness leave part of the final finger
  // body beyond the opening plane, outside the channel, where stationary
  // points were never projected; eject any such stragglers. A no-op for
  // smaller separations: every in-band point already sits on a boundary.
  for (Index i = 0; i < n; ++i) {
    Vec3 p = out.row(i).transpose();
    forbidden.snap(p);
    out.row(i) = p.transpose();
  }

  return PointCloud(std::move(out), cloud.frame);
}

Points propagate_centroids(const Points& centroids, const GraspAction& action,
                           const GripperModel& gripper) {
  validate_action(action, gripper, "propagate_centroids");
  if (centroids.rows() == 0) throw InvalidInputError("propagate_centroids: empty input");

  if (action.d == gripper.max_open) return centroids;

  const GraspFrame frame(action);
  Points out = centroids;
  for (Index i = 0; i < out.rows(); ++i) {
    const Vec3 p = out.row(i).transpose();
    if (!channel_inlier(frame, gripper, p)) continue;
    const double lu = frame.lu(p);
    out.row(i) += (frame.u * (face_sign(lu) * 0.5 * action.d - lu)).transpose();
  }
  return out;
}

void write_actions_jsonl(std::ostream& out, const std::vector<GraspAction>& actions) {
  for (const GraspAction& a : actions) {
    nlohmann::json j;
    j["x"] = a.x;
    j["y"] = a.y;
    j["z"] = a.z;
    j["rot_z"] = a.rot_z;
    j["d"] = a.d;
    out << j.dump() << '\n';
  }
}

void write_actions_jsonl_file(const std::string& path, const std::vector<GraspAction>& actions) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("write_actions_jsonl_file: cannot open " + path);
  write_actions_jsonl(out, actions);
  if (!out) throw InvalidInputError("write_actions_jsonl_file: write failed for " + path);
}

std::vector<GraspAction> read_actions_jsonl(std::istream& in) {
  std::vector<GraspAction> actions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInputError("read_actions_jsonl: line " + std::to_string(line_no) + ": " +
                              e.what());
    }
    GraspAction a;
    try {
      a.x = j.at("x").get<double>();
      a.y = j.at("y").get<double>();
      a.z = j.at("z").get<double>();
      a.rot_z = j.at("rot_z").get<double>();
      a.d = j.at("d").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInputError("read_actions_jsonl: line " + std::to_string(line_no) + ": " +
                              e.what());
    }
    actions.push_back(a);
  }
  return actions;
}

std::vector<GraspAction> read_actions_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("read_actions_jsonl_file: cannot open " + path);
  return read_actions_jsonl(in);
}

}  // namespace clay
