#pragma once

#include <clay/types.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace clay {

/// ASCII PLY with x,y,z properties. The frame label travels as a
/// "comment frame=<name>" header line. Coordinates are written with nine
/// significant digits, which round-trips values to that precision.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);

/// Headerless "x,y,z" lines, same nine-digit convention. CSV carries no
/// frame label; read_csv returns frame "world".
void write_csv(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_csv(const std::filesystem::path& path);

/// Nine-significant-digit decimal form used by both writers.
std::string format_coord(double value);

/// Camera extrinsics as text: a name line followed by a 4x4 row-major
/// homogeneous matrix, blocks separated by blank lines. Full double
/// precision, so poses round-trip exactly.
void write_extrinsics(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, RigidTransform>>& poses);
std::vector<std::pair<std::string, RigidTransform>> read_extrinsics(
    const std::filesystem::path& path);

}  // namespace clay
