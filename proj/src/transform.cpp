#include <clay/transform.hpp>

#include <cmath>

namespace clay {

PointCloud rotate_z(const PointCloud& cloud, double angle, const Vec3& pivot) {
  if (!std::isfinite(angle)) throw InvalidInputError("rotate_z: non-finite angle");
  const RigidTransform rot = rotation_z(angle);
  PointCloud out = cloud;
  out.points = (cloud.points.rowwise() - pivot.transpose()) * rot.rotation.transpose();
  out.points.rowwise() += pivot.transpose();
  return out;
}

double normalize_angle(double angle) {
  double a = std::remainder(angle, 2.0 * M_PI);  // (-pi, pi]
  if (a >= M_PI) a -= 2.0 * M_PI;
  return a;
}

}  // namespace clay
