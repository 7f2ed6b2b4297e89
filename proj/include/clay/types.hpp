#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace clay {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Index = Eigen::Index;

// One point per row, meters.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Squared Euclidean distance, evaluated as dx*dx + dy*dy + dz*dz left to
/// right. Every nearest-neighbor path in the library uses this kernel so that
/// accelerated queries agree with a plain linear scan bit for bit.
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

struct PointCloud {
  Points points;
  std::string frame = "world";

  PointCloud() = default;
  explicit PointCloud(Points pts, std::string f = "world")
      : points(std::move(pts)), frame(std::move(f)) {}

  Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }
  Vec3 point(Index i) const { return points.row(i).transpose(); }
  Vec3 centroid() const { return points.colwise().mean().transpose(); }
  bool all_finite() const { return points.allFinite(); }
};

/// Rotation (proper orthonormal) plus translation. Composition applies the
/// right-hand transform first, as with homogeneous matrices.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(rotation.transpose() * translation);
    return inv;
  }

  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform out;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation * b.translation + a.translation;
    return out;
  }

  static RigidTransform identity() { return {}; }
};

inline bool is_rigid(const RigidTransform& t, double tol = 1e-9) {
  const Mat3 gram = t.rotation.transpose() * t.rotation;
  return (gram - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(t.rotation.determinant() - 1.0) <= tol && t.translation.allFinite();
}

inline Points transform_points(const RigidTransform& t, const Points& pts) {
  return (pts * t.rotation.transpose()).rowwise() + t.translation.transpose();
}

inline PointCloud transform_cloud(const RigidTransform& t, const PointCloud& cloud,
                                  std::string frame) {
  return PointCloud(transform_points(t, cloud.points), std::move(frame));
}

/// Rotation about the vertical axis through the origin.
inline RigidTransform rotation_z(double angle) {
  RigidTransform t;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  t.rotation << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return t;
}

/// Axis-aligned box, closed on all faces.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool valid() const { return (min.array() < max.array()).all(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Vec3 clamp(const Vec3& p) const { return p.cwiseMax(min).cwiseMin(max); }
};

class InvalidInputError : public std::invalid_argument {
 public:
  explicit InvalidInputError(const std::string& msg) : std::invalid_argument(msg) {}
};

class EmptyClayError : public InvalidInputError {
 public:
  explicit EmptyClayError(const std::string& msg) : InvalidInputError(msg) {}
};

class NoBaseError : public InvalidInputError {
 public:
  explicit NoBaseError(const std::string& msg) : InvalidInputError(msg) {}
};

class NoSolutionError : public std::runtime_error {
 public:
  explicit NoSolutionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// ICP found no correspondences in an iteration; carries the last transform.
class IcpStallError : public std::runtime_error {
 public:
  IcpStallError(const std::string& msg, RigidTransform last)
      : std::runtime_error(msg), last_transform(std::move(last)) {}

  RigidTransform last_transform;
};

}  // namespace clay
