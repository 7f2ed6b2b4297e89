#include <clay/io.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace clay {

std::string format_coord(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out = open_output(path);
  out << "ply\n"
      << "format ascii 1.0\n"
      << "comment frame=" << cloud.frame << "\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "end_header\n";
  for (Index i = 0; i < cloud.size(); ++i) {
    out << format_coord(cloud.points(i, 0)) << ' ' << format_coord(cloud.points(i, 1))
        << ' ' << format_coord(cloud.points(i, 2)) << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw InvalidInputError(path.string() + ": not a PLY file");

  PointCloud cloud;
  Index vertex_count = -1;
  std::vector<std::string> vertex_props;
  std::string current_element;
  bool ascii = false;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "end_header") break;
    if (word == "format") {
      ls >> word;
      ascii = (word == "ascii");
    } else if (word == "comment") {
      std::string rest;
      std::getline(ls, rest);
      const auto pos = rest.find("frame=");
      if (pos != std::string::npos) cloud.frame = rest.substr(pos + 6);
    } else if (word == "element") {
      ls >> current_element;
      if (current_element == "vertex") ls >> vertex_count;
    } else if (word == "property" && current_element == "vertex") {
      std::string type, name;
      ls >> type >> name;
      vertex_props.push_back(name);
    }
  }
  if (!ascii) throw InvalidInputError(path.string() + ": only ascii PLY is supported");
  if (vertex_count < 0) throw InvalidInputError(path.string() + ": no vertex element");

  int xi = -1, yi = -1, zi = -1;
  for (int i = 0; i < static_cast<int>(vertex_props.size()); ++i) {
    if (vertex_props[static_cast<std::size_t>(i)] == "x") xi = i;
    if (vertex_props[static_cast<std::size_t>(i)] == "y") yi = i;
    if (vertex_props[static_cast<std::size_t>(i)] == "z") zi = i;
  }
  if (xi < 0 || yi < 0 || zi < 0)
    throw InvalidInputError(path.string() + ": vertex element lacks x/y/z");

  cloud.points.resize(vertex_count, 3);
  std::vector<double> values(vertex_props.size());
  for (Index v = 0; v < vertex_count; ++v) {
    if (!std::getline(in, line))
      throw InvalidInputError(path.string() + ": truncated vertex data");
    std::istringstream ls(line);
    for (double& val : values) {
      if (!(ls >> val))
        throw InvalidInputError(path.string() + ": malformed vertex line");
    }
    cloud.points(v, 0) = values[static_cast<std::size_t>(xi)];
    cloud.points(v, 1) = values[static_cast<std::size_t>(yi)];
    cloud.points(v, 2) = values[static_cast<std::size_t>(zi)];
  }
  if (!cloud.all_finite())
    throw InvalidInputError(path.string() + ": non-finite coordinates");
  return cloud;
}

void write_csv(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out = open_output(path);
  for (Index i = 0; i < cloud.size(); ++i) {
    out << format_coord(cloud.points(i, 0)) << ',' << format_coord(cloud.points(i, 1))
        << ',' << format_coord(cloud.points(i, 2)) << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

void write_extrinsics(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, RigidTransform>>& poses) {
  std::ofstream out = open_output(path);
  char buf[40];
  bool first = true;
  for (const auto& [name, pose] : poses) {
    if (!first) out << '\n';
    first = false;
    out << name << '\n';
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        double value;
        if (r < 3) {
          value = c < 3 ? pose.rotation(r, c) : pose.translation(r);
        } else {
          value = c < 3 ? 0.0 : 1.0;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        out << (c == 0 ? "" : " ") << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::vector<std::pair<std::string, RigidTransform>> read_extrinsics(
    const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::pair<std::string, RigidTransform>> poses;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string name = line;
    RigidTransform pose;
    for (int r = 0; r < 4; ++r) {
      if (!std::getline(in, line))
        throw InvalidInputError(path.string() + ": truncated matrix for " + name);
      std::istringstream ls(line);
      double row[4];
      if (!(ls >> row[0] >> row[1] >> row[2] >> row[3]))
        throw InvalidInputError(path.string() + ": malformed matrix row for " + name);
      if (r < 3) {
        pose.rotation(r, 0) = row[0];
        pose.rotation(r, 1) = row[1];
        pose.rotation(r, 2) = row[2];
        pose.translation(r) = row[3];
      }
    }
    poses.emplace_back(name, pose);
  }
  return poses;
}

PointCloud read_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<Vec3> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Vec3 p;
    char comma = ',';
    std::istringstream ls(line);
    if (!(ls >> p.x() >> comma >> p.y() >> comma >> p.z()))
      throw InvalidInputError(path.string() + ": malformed CSV line: " + line);
    rows.push_back(p);
  }
  PointCloud cloud;
  cloud.points.resize(static_cast<Index>(rows.size()), 3);
  for (Index i = 0; i < cloud.size(); ++i) {
    cloud.points.row(i) = rows[static_cast<std::size_t>(i)].transpose();
  }
  if (!cloud.all_finite())
    throw InvalidInputError(path.string() + ": non-finite coordinates");
  return cloud;
}

}  // namespace clay
