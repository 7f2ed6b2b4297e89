#include <clay/rng.hpp>
#include <clay/sampling.hpp>
#include <clay/sim.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace clay {

namespace {

constexpr double kTau = 2.0 * M_PI;

// One samplable piece of a closed surface.
struct SurfacePatch {
  double area;
  std::function<Vec3(Rng&)> draw;
};

// Area-weighted surface sampling with optional rejection (used to knock out
// patch regions buried inside a sibling solid of a union shape).
Points sample_surface(const std::vector<SurfacePatch>& patches, Index n, Rng& rng,
                      const std::function<bool(const Vec3&)>& reject = nullptr) {
  std::vector<double> cumulative(patches.size());
  double total = 0.0;
  for (std::size_t p = 0; p < patches.size(); ++p) {
    total += patches[p].area;
    cumulative[p] = total;
  }

  Points out(n, 3);
  for (Index i = 0; i < n; ++i) {
    Vec3 point;
    do {
      const double r = rng.uniform() * total;
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
      const auto p = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                   static_cast<std::ptrdiff_t>(patches.size()) - 1));
      point = patches[p].draw(rng);
    } while (reject && reject(point));
    out.row(i) = point.transpose();
  }
  return out;
}

struct Box {
  double x0, x1, y0, y1, z0, z1;

  bool strictly_inside(const Vec3& p) const {
    return p.x() > x0 && p.x() < x1 && p.y() > y0 && p.y() < y1 && p.z() > z0 && p.z() < z1;
  }
};

// Six faces in a fixed order (bottom, top, -x, +x, -y, +y).
void add_box_patches(std::vector<SurfacePatch>& patches, const Box& b) {
  const double dx = b.x1 - b.x0;
  const double dy = b.y1 - b.y0;
  const double dz = b.z1 - b.z0;
  auto face = [&](double area, auto draw) { patches.push_back({area, draw}); };
  face(dx * dy, [b, dx, dy](Rng& rng) {
    return Vec3(b.x0 + dx * rng.uniform(), b.y0 + dy * rng.uniform(), b.z0);
  });
  face(dx * dy, [b, dx, dy](Rng& rng) {
    return Vec3(b.x0 + dx * rng.uniform(), b.y0 + dy * rng.uniform(), b.z1);
  });
  face(dy * dz, [b, dy, dz](Rng& rng) {
    return Vec3(b.x0, b.y0 + dy * rng.uniform(), b.z0 + dz * rng.uniform());
  });
  face(dy * dz, [b, dy, dz](Rng& rng) {
    return Vec3(b.x1, b.y0 + dy * rng.uniform(), b.z0 + dz * rng.uniform());
  });
  face(dx * dz, [b, dx, dz](Rng& rng) {
    return Vec3(b.x0 + dx * rng.uniform(), b.y0, b.z0 + dz * rng.uniform());
  });
  face(dx * dz, [b, dx, dz](Rng& rng) {
    return Vec3(b.x0 + dx * rng.uniform(), b.y1, b.z0 + dz * rng.uniform());
  });
}

// Closed surface of a union of axis-aligned boxes: patch points falling
// strictly inside a sibling box are resampled.
PointCloud sample_box_union(const std::vector<Box>& boxes, Index n, std::uint64_t seed) {
  std::vector<SurfacePatch> patches;
  for (const Box& b : boxes) add_box_patches(patches, b);
  const auto reject = [&boxes](const Vec3& p) {
    return std::any_of(boxes.begin(), boxes.end(),
                       [&p](const Box& b) { return b.strictly_inside(p); });
  };
  Rng rng(seed);
  return PointCloud(sample_surface(patches, n, rng, reject));
}

Vec3 uniform_in_triangle(const Vec3& a, const Vec3& b, const Vec3& c, Rng& rng) {
  const double su = std::sqrt(rng.uniform());
  const double v = rng.uniform();
  return (1.0 - su) * a + su * (1.0 - v) * b + su * v * c;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

PointCloud make_initial_clay(Index n, std::uint64_t seed) {
  if (n < 100) throw InvalidInputError("make_initial_clay: n must be >= 100");

  const double r = 0.5 * kClayDiameter;
  const double h = kClayHeight;
  const double side_area = kTau * r * h;
  const double cap_area = M_PI * r * r;
  const double total = side_area + 2.0 * cap_area;

  // Largest-remainder split of n across side/top/bottom, bottom kept >= 1 so
  // min z sits on the stage exactly.
  const double shares[3] = {side_area / total, cap_area / total, cap_area / total};
  Index counts[3];
  double fractions[3];
  Index assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double want = static_cast<double>(n) * shares[k];
    counts[k] = static_cast<Index>(std::floor(want));
    fractions[k] = want - std::floor(want);
    assigned += counts[k];
  }
  for (Index left = n - assigned; left > 0; --left) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (fractions[k] > fractions[best]) best = k;
    }
    ++counts[best];
    fractions[best] = -1.0;
  }
  if (counts[2] == 0) {
    counts[2] = 1;
    --counts[counts[0] >= counts[1] ? 0 : 1];
  }

  Rng rng(seed);
  Points pts(n, 3);
  Index row = 0;
  for (Index i = 0; i < counts[0]; ++i) {  // side
    const double theta = kTau * rng.uniform();
    const double z = kStageZ + h * rng.uniform();
    pts.row(row++) << r * std::cos(theta), r * std::sin(theta), z;
  }
  for (Index i = 0; i < counts[1]; ++i) {  // top cap
    const double rho = r * std::sqrt(rng.uniform());
    const double theta = kTau * rng.uniform();
    pts.row(row++) << rho * std::cos(theta), rho * std::sin(theta), kStageZ + h;
  }
  for (Index i = 0; i < counts[2]; ++i) {  // bottom cap
    const double rho = r * std::sqrt(rng.uniform());
    const double theta = kTau * rng.uniform();
    pts.row(row++) << rho * std::cos(theta), rho * std::sin(theta), kStageZ;
  }
  return PointCloud(std::move(pts));
}

const std::vector<std::string>& target_names() {
  static const std::vector<std::string> names = {"X",        "T",    "square",  "line",
                                                 "cylinder", "triangle", "cone", "pyramid"};
  return names;
}

TargetShape make_target(const std::string& name, Index n, std::uint64_t seed) {
  if (n < 100) throw InvalidInputError("make_target: n must be >= 100");

  TargetShape shape;
  shape.name = name;

  if (name == "cylinder") {
    shape.params = {{"diameter", kClayDiameter}, {"height", kClayHeight}};
    shape.cloud = make_initial_clay(n, seed);
    return shape;
  }
  if (name == "line") {
    const Box b{-0.054, 0.054, -0.012, 0.012, kStageZ, kStageZ + 0.025};
    shape.params = {{"length", 0.108}, {"width", 0.024}, {"height", 0.025}};
    shape.cloud = sample_box_union({b}, n, seed);
    return shape;
  }
  if (name == "square") {
    const Box b{-0.0266, 0.0266, -0.0266, 0.0266, kStageZ, kStageZ + 0.025};
    shape.params = {{"side", 0.0532}, {"height", 0.025}};
    shape.cloud = sample_box_union({b}, n, seed);
    return shape;
  }
  if (name == "X") {
    const Box along_x{-0.04, 0.04, -0.01, 0.01, kStageZ, kStageZ + 0.025};
    const Box along_y{-0.01, 0.01, -0.04, 0.04, kStageZ, kStageZ + 0.025};
    shape.params = {{"arm_length", 0.08}, {"arm_width", 0.02}, {"height", 0.025}};
    shape.cloud = sample_box_union({along_x, along_y}, n, seed);
    return shape;
  }
  if (name == "T") {
    const Box bar{-0.042, 0.042, 0.012, 0.036, kStageZ, kStageZ + 0.025};
    const Box stem{-0.012, 0.012, -0.030, 0.018, kStageZ, kStageZ + 0.025};
    shape.params = {{"bar_length", 0.084}, {"bar_width", 0.024},
                    {"stem_length", 0.048}, {"stem_width", 0.024}, {"height", 0.025}};
    shape.cloud = sample_box_union({bar, stem}, n, seed);
    return shape;
  }
  if (name == "triangle") {
    const double side = 0.0808;
    const double height = 0.025;
    const double circum = side / std::sqrt(3.0);
    Vec3 v[3];
    for (int k = 0; k < 3; ++k) {
      const double angle = M_PI / 2.0 + kTau * k / 3.0;
      v[k] = Vec3(circum * std::cos(angle), circum * std::sin(angle), kStageZ);
    }
    const Vec3 lift(0.0, 0.0, height);

    std::vector<SurfacePatch> patches;
    for (int k = 0; k < 3; ++k) {  // side rectangles, split into two triangles
      const Vec3 a = v[k];
      const Vec3 b = v[(k + 1) % 3];
      patches.push_back({triangle_area(a, b, a + lift), [a, b, lift](Rng& rng) {
                           return uniform_in_triangle(a, b, a + lift, rng);
                         }});
      patches.push_back({triangle_area(b, b + lift, a + lift), [a, b, lift](Rng& rng) {
                           return uniform_in_triangle(b, b + lift, a + lift, rng);
                         }});
    }
    for (const Vec3& offset : {Vec3::Zero().eval(), lift}) {  // caps
      const Vec3 a = v[0] + offset;
      const Vec3 b = v[1] + offset;
      const Vec3 c = v[2] + offset;
      patches.push_back({triangle_area(a, b, c), [a, b, c](Rng& rng) {
                           return uniform_in_triangle(a, b, c, rng);
                         }});
    }
    shape.params = {{"side", side}, {"height", height}};
    Rng rng(seed);
    shape.cloud = PointCloud(sample_surface(patches, n, rng));
    return shape;
  }
  if (name == "cone") {
    const double r = 0.04;
    const double h = 0.0422;
    std::vector<SurfacePatch> patches;
    patches.push_back({M_PI * r * r, [r](Rng& rng) {  // base disk
                         const double rho = r * std::sqrt(rng.uniform());
                         const double theta = kTau * rng.uniform();
                         return Vec3(rho * std::cos(theta), rho * std::sin(theta), kStageZ);
                       }});
    const double slant = std::sqrt(r * r + h * h);
    patches.push_back({M_PI * r * slant, [r, h](Rng& rng) {  // lateral surface
                         const double rho = std::sqrt(rng.uniform());  // density ~ radius
                         const double theta = kTau * rng.uniform();
                         return Vec3(r * rho * std::cos(theta), r * rho * std::sin(theta),
                                     kStageZ + h * (1.0 - rho));
                       }});
    shape.params = {{"radius", r}, {"height", h}};
    Rng rng(seed);
    shape.cloud = PointCloud(sample_surface(patches, n, rng));
    return shape;
  }
  if (name == "pyramid") {
    const double half = 0.0325;
    const double h = 0.0502;
    const Vec3 apex(0.0, 0.0, kStageZ + h);
    const Vec3 corners[4] = {Vec3(-half, -half, kStageZ), Vec3(half, -half, kStageZ),
                             Vec3(half, half, kStageZ), Vec3(-half, half, kStageZ)};
    std::vector<SurfacePatch> patches;
    patches.push_back({4.0 * half * half, [half](Rng& rng) {  // base square
                         return Vec3(half * (2.0 * rng.uniform() - 1.0),
                                     half * (2.0 * rng.uniform() - 1.0), kStageZ);
                       }});
    for (int k = 0; k < 4; ++k) {
      const Vec3 a = corners[k];
      const Vec3 b = corners[(k + 1) % 4];
      patches.push_back({triangle_area(a, b, apex), [a, b, apex](Rng& rng) {
                           return uniform_in_triangle(a, b, apex, rng);
                         }});
    }
    shape.params = {{"base", 2.0 * half}, {"height", h}};
    Rng rng(seed);
    shape.cloud = PointCloud(sample_surface(patches, n, rng));
    return shape;
  }
  throw InvalidInputError("make_target: unknown shape '" + name + "'");
}

PointCloud env_step(const PointCloud& cloud, const GraspAction& action, const EnvConfig& cfg) {
  if (cfg.noise_sigma < 0.0) throw InvalidInputError("env_step: noise_sigma must be >= 0");

  PointCloud out = apply_grasp(cloud, action, cfg.gripper, cfg.constraints);
  if (cfg.noise_sigma > 0.0) {
    Rng rng(stage_seed(cfg.seed, "env-noise"));
    for (Index i = 0; i < out.size(); ++i) {
      out.points.row(i) += rng.normal3(cfg.noise_sigma).transpose();
    }
  }
  if (cfg.reshell) {
    const Index n = cloud.size();
    const PointCloud closed = complete_base(out, cfg.base_band, cfg.grid_step);
    out = downsample_random(closed, n, stage_seed(cfg.seed, "env-reshell"));
  }
  return out;
}

PointCloud make_registration_object(Index n, std::uint64_t seed) {
  if (n < 10) throw InvalidInputError("make_registration_object: n must be >= 10");

  // Asymmetric wedge plate: base slab, a tilted triangular prism, and an
  // off-corner cube. Distinct principal axes pin rotation coarsely, mixed
  // face orientations price every translation direction, and the offsets
  // leave no rotational or mirror symmetry.
  const Box slab{0.000, 0.100, 0.000, 0.070, 0.000, 0.020};
  const Box cube{0.080, 0.095, 0.050, 0.065, 0.020, 0.032};
  const double y0 = 0.008, y1 = 0.054;  // prism extent along y
  const Vec3 heel(0.075, 0.0, 0.020);   // prism cross-section in x-z
  const Vec3 toe(0.015, 0.0, 0.020);
  const Vec3 peak(0.015, 0.0, 0.055);

  std::vector<SurfacePatch> patches;
  add_box_patches(patches, slab);
  add_box_patches(patches, cube);
  const auto rect = [&patches](const Vec3& origin, const Vec3& u, const Vec3& v) {
    patches.push_back({u.cross(v).norm(), [origin, u, v](Rng& rng) {
                         return (origin + rng.uniform() * u + rng.uniform() * v).eval();
                       }});
  };
  const Vec3 span(0.0, y1 - y0, 0.0);
  rect(heel + Vec3(0, y0, 0), peak - heel, span);  // slope
  rect(toe + Vec3(0, y0, 0), peak - toe, span);    // back wall
  for (double y : {y0, y1}) {                      // triangular end caps
    const Vec3 off(0, y, 0);
    const Vec3 a = heel + off, b = toe + off, c = peak + off;
    patches.push_back({triangle_area(a, b, c),
                       [a, b, c](Rng& rng) { return uniform_in_triangle(a, b, c, rng); }});
  }

  Rng rng(seed);
  PointCloud cloud(sample_surface(patches, n, rng));
  cloud.points.rowwise() -= cloud.centroid().transpose();
  return cloud;
}

std::vector<RigidTransform> ring_cameras(int count, double radius, double height,
                                         const Vec3& look_at) {
  if (count < 1) throw InvalidInputError("ring_cameras: count must be >= 1");
  if (radius <= 0.0) throw InvalidInputError("ring_cameras: radius must be positive");

  std::vector<RigidTransform> poses;
  poses.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double phi = kTau * k / count;
    const Vec3 pos(look_at.x() + radius * std::cos(phi), look_at.y() + radius * std::sin(phi),
                   height);
    Vec3 forward = look_at - pos;
    forward.normalize();
    Vec3 up = Vec3::UnitZ();
    if (std::abs(forward.dot(up)) > 1.0 - 1e-9) up = Vec3::UnitX();
    const Vec3 right = forward.cross(up).normalized();
    const Vec3 down = forward.cross(right);

    RigidTransform pose;
    pose.rotation.col(0) = right;
    pose.rotation.col(1) = down;
    pose.rotation.col(2) = forward;
    pose.translation = pos;
    poses.push_back(pose);
  }
  return poses;
}

std::vector<RawScan> synth_scan(const PointCloud& object,
                                const std::vector<RigidTransform>& cameras,
                                double sensor_noise, std::uint64_t seed, Index n_stage,
                                Index n_table) {
  if (object.empty()) throw InvalidInputError("synth_scan: empty object");
  if (cameras.empty()) throw InvalidInputError("synth_scan: no cameras");
  if (sensor_noise < 0.0) throw InvalidInputError("synth_scan: negative sensor noise");

  const Vec3 centroid = object.centroid();
  std::vector<RawScan> scans;
  scans.reserve(cameras.size());

  for (std::size_t k = 0; k < cameras.size(); ++k) {
    Rng rng(stage_seed(seed, "scan", k));
    const RigidTransform& pose = cameras[k];
    const RigidTransform world_to_cam = pose.inverse();

    Vec3 cam_dir = pose.translation - centroid;
    if (cam_dir.norm() < 1e-12) cam_dir = Vec3::UnitZ();
    cam_dir.normalize();

    std::vector<Vec3> points;
    std::vector<Label> labels;
    for (Index i = 0; i < object.size(); ++i) {  // hemisphere visibility cull
      const Vec3 p = object.point(i);
      if ((p - centroid).dot(cam_dir) <= 0.0) continue;
      points.push_back(world_to_cam.apply(p) + rng.normal3(sensor_noise));
      labels.push_back(Label::clay);
    }
    for (Index i = 0; i < n_stage; ++i) {  // stage disk under the clay
      const double rho = 0.08 * std::sqrt(rng.uniform());
      const double theta = kTau * rng.uniform();
      const Vec3 p(rho * std::cos(theta), rho * std::sin(theta), kStageZ);
      points.push_back(world_to_cam.apply(p) + rng.normal3(sensor_noise));
      labels.push_back(Label::stage);
    }
    for (Index i = 0; i < n_table; ++i) {  // table annulus below the stage
      const double rho = std::sqrt(0.12 * 0.12 +
                                   (0.25 * 0.25 - 0.12 * 0.12) * rng.uniform());
      const double theta = kTau * rng.uniform();
      const Vec3 p(rho * std::cos(theta), rho * std::sin(theta), kStageZ - 0.04);
      points.push_back(world_to_cam.apply(p) + rng.normal3(sensor_noise));
      labels.push_back(Label::table);
    }

    RawScan scan;
    scan.cloud.frame = "camera" + std::to_string(k);
    scan.cloud.points.resize(static_cast<Index>(points.size()), 3);
    for (std::size_t i = 0; i < points.size(); ++i) {
      scan.cloud.points.row(static_cast<Index>(i)) = points[i].transpose();
    }
    scan.labels = std::move(labels);
    scans.push_back(std::move(scan));
  }
  return scans;
}

RigidTransform perturb_pose(const RigidTransform& pose, double max_angle, double max_shift,
                            std::uint64_t seed) {
  if (max_angle < 0.0 || max_shift < 0.0)
    throw InvalidInputError("perturb_pose: negative perturbation bound");

  Rng rng(seed);
  Vec3 axis = rng.normal3(1.0);
  if (axis.norm() < 1e-12) axis = Vec3::UnitZ();
  axis.normalize();
  const double angle = max_angle * rng.uniform();

  Vec3 shift_dir = rng.normal3(1.0);
  if (shift_dir.norm() < 1e-12) shift_dir = Vec3::UnitX();
  shift_dir.normalize();

  RigidTransform out;
  out.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix() * pose.rotation;
  out.translation = pose.translation + max_shift * rng.uniform() * shift_dir;
  return out;
}

}  // namespace clay
