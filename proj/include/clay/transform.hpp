#pragma once

#include <clay/types.hpp>

namespace clay {

/// Rotates every point about the vertical axis through pivot. Keeps the frame.
PointCloud rotate_z(const PointCloud& cloud, double angle, const Vec3& pivot);

/// Angle wrapped into [-pi, pi).
double normalize_angle(double angle);

}  // namespace clay
