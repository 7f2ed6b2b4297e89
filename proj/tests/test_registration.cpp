#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <clay/metrics.hpp>
#include <clay/registration.hpp>
#include <clay/rng.hpp>
#include <clay/sim.hpp>
#include <clay/transform.hpp>
#include <clay/types.hpp>

#include "helpers.hpp"

#include <cmath>
#include <utility>
#include <vector>

using namespace clay;

namespace {

constexpr double kPi = 3.14159265358979323846;

double pose_error(const RigidTransform& a, const RigidTransform& b) {
  return (a.rotation - b.rotation).norm() + (a.translation - b.translation).norm();
}

RigidTransform yaw_shift(double angle, const Vec3& shift) {
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
  t.translation = shift;
  return t;
}

}  // namespace

TEST_CASE("fit_rigid recovers an exact correspondence transform") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 3 + static_cast<Index>(rng.uniform() * 40);
    PointCloud source = testing::random_cloud(n, rng, 0.5);
    const RigidTransform truth = testing::random_rigid(rng, 0.3);
    const Points target = transform_points(truth, source.points);
    const RigidTransform fit = fit_rigid(source.points, target);
    CHECK(pose_error(fit, truth) < 1e-9);
    CHECK(is_rigid(fit));
  }
}

TEST_CASE("fit_rigid handles noisy pairs in least squares") {
  Rng rng(4);
  PointCloud source = testing::random_cloud(200, rng, 0.5);
  const RigidTransform truth = testing::random_rigid(rng, 0.2);
  Points target = transform_points(truth, source.points);
  for (Index i = 0; i < target.rows(); ++i) target.row(i) += rng.normal3(1e-4).transpose();
  const RigidTransform fit = fit_rigid(source.points, target);
  CHECK(pose_error(fit, truth) < 1e-3);
}

TEST_CASE("fit_rigid input validation and collinear behavior") {
  Points two(2, 3), three(3, 3);
  two << 0, 0, 0, 1, 0, 0;
  three << 0, 0, 0, 1, 0, 0, 2, 0, 0;  // collinear
  Points target2 = two, target3 = three;
  CHECK_THROWS_AS(fit_rigid(two, target2), InvalidInputError);

  // Collinear exact pairs underdetermine the rotation about the line, but
  // the fit must still be rigid and map the line onto itself.
  const RigidTransform fit = fit_rigid(three, target3);
  CHECK(is_rigid(fit));
  CHECK((transform_points(fit, three) - target3).cwiseAbs().maxCoeff() < 1e-9);

  Points mismatched(4, 3);
  mismatched.setZero();
  CHECK_THROWS_AS(fit_rigid(three, mismatched), InvalidInputError);
}

TEST_CASE("ransac_align recovers identity on identical clouds") {
  const PointCloud object = make_registration_object(512, 21);
  RansacParams params;
  params.seed = 5;
  const RegistrationResult result = ransac_align(object, object, params);
  CHECK(pose_error(result.transform, RigidTransform{}) < 1e-9);
  CHECK(result.inlier_count == object.size());
  CHECK(result.rms_error < 1e-12);
}

TEST_CASE("ransac_align recovers a moderate rotation plus shift") {
  const PointCloud object = make_registration_object(512, 22);
  const RigidTransform truth = yaw_shift(kPi / 6.0, Vec3(0.1, 0.0, 0.0));
  const PointCloud moved = transform_cloud(truth, object, "world");
  RansacParams params;
  params.seed = 9;
  const RegistrationResult coarse = ransac_align(object, moved, params);
  const RegistrationResult fine = icp_refine(object, moved, coarse.transform, IcpParams{});
  CHECK(pose_error(fine.transform, truth) < 1e-6);
}

TEST_CASE("ransac_align tolerates 20 percent gross outliers") {
  Rng rng(31);
  const PointCloud object = make_registration_object(400, 23);
  const RigidTransform truth = yaw_shift(0.3, Vec3(0.05, -0.02, 0.0));

  PointCloud corrupted = transform_cloud(truth, object, "world");
  const Index clean_n = corrupted.size();
  const Index extra = clean_n / 5;
  corrupted.points.conservativeResize(clean_n + extra, 3);
  for (Index i = 0; i < extra; ++i) {
    corrupted.points.row(clean_n + i) =
        Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
            .transpose();
  }

  RansacParams params;
  params.seed = 13;
  const RegistrationResult coarse = ransac_align(object, corrupted, params);
  const RegistrationResult fine =
      icp_refine(object, corrupted, coarse.transform, IcpParams{});
  CHECK(pose_error(fine.transform, truth) < 1e-3);

  // The fitted transform classifies the injected junk as outliers.
  const Points mapped = transform_points(fine.transform, object.points);
  KdTree tree(corrupted.points);
  std::vector<bool> matched(static_cast<std::size_t>(corrupted.size()), false);
  for (Index i = 0; i < mapped.rows(); ++i) {
    const auto [j, d2] = tree.nearest(mapped.row(i).transpose());
    if (std::sqrt(d2) <= params.inlier_threshold)
      matched[static_cast<std::size_t>(j)] = true;
  }
  Index junk_matched = 0;
  for (Index i = clean_n; i < corrupted.size(); ++i)
    if (matched[static_cast<std::size_t>(i)]) ++junk_matched;
  // Junk lives in a 1 m box around a ~10 cm object; at most a sliver can
  // land within the inlier gate by chance.
  CHECK(junk_matched <= extra / 10);
}

TEST_CASE("ransac_align throws when no valid sample exists") {
  PointCloud line;
  line.points.resize(8, 3);
  for (Index i = 0; i < 8; ++i) line.points.row(i) = Vec3(0.01 * i, 0.0, 0.0).transpose();
  PointCloud target = line;
  RansacParams params;
  params.iterations = 50;
  CHECK_THROWS_AS(ransac_align(line, target, params), NoSolutionError);
}

TEST_CASE("icp_refine is a fixed point at the exact pose") {
  const PointCloud object = make_registration_object(600, 24);
  Rng rng(8);
  const RigidTransform truth = testing::random_rigid(rng, 0.1);
  const PointCloud moved = transform_cloud(truth, object, "world");
  const RegistrationResult result = icp_refine(object, moved, truth, IcpParams{});
  CHECK(pose_error(result.transform, truth) < 1e-12);
  CHECK(result.rms_error < 1e-12);
}

TEST_CASE("icp_refine converges from a nearby pose on clean data") {
  const PointCloud object = make_registration_object(800, 25);
  Rng rng(55);
  for (int trial = 0; trial < 6; ++trial) {
    const RigidTransform truth = yaw_shift(rng.uniform(-kPi, kPi),
                                           Vec3(rng.uniform(-0.05, 0.05),
                                                rng.uniform(-0.05, 0.05), 0.0));
    const PointCloud moved = transform_cloud(truth, object, "world");
    const RigidTransform init =
        perturb_pose(truth, 5.0 * kPi / 180.0, 0.01, 1000 + static_cast<std::uint64_t>(trial));
    const RegistrationResult result = icp_refine(object, moved, init, IcpParams{});
    CHECK(pose_error(result.transform, truth) < 1e-6);
    CHECK(result.rms_error < 1e-9);
    CHECK(result.iterations <= IcpParams{}.max_iters);
  }
}

TEST_CASE("icp_refine never reports a worse rms than it accepts") {
  const PointCloud object = make_registration_object(512, 26);
  Rng rng(66);
  const RigidTransform truth = yaw_shift(0.4, Vec3(0.02, 0.01, 0.0));
  PointCloud moved = transform_cloud(truth, object, "world");
  for (Index i = 0; i < moved.size(); ++i)
    moved.points.row(i) += rng.normal3(0.001).transpose();
  const RigidTransform init = perturb_pose(truth, 8.0 * kPi / 180.0, 0.02, 424242);

  const RegistrationResult refined = icp_refine(object, moved, init, IcpParams{});

  // RMS of the init pose over gated matches, for comparison.
  const Points mapped = transform_points(init, object.points);
  KdTree tree(moved.points);
  double sum = 0.0;
  Index count = 0;
  const double gate2 = IcpParams{}.max_correspondence_dist * IcpParams{}.max_correspondence_dist;
  for (Index i = 0; i < mapped.rows(); ++i) {
    const auto [j, d2] = tree.nearest(mapped.row(i).transpose());
    if (d2 <= gate2) {
      sum += d2;
      ++count;
    }
  }
  REQUIRE(count > 0);
  const double init_rms = std::sqrt(sum / static_cast<double>(count));
  CHECK(refined.rms_error <= init_rms + 1e-12);
}

TEST_CASE("icp_refine stalls cleanly when the gate excludes every match") {
  const PointCloud object = make_registration_object(256, 27);
  RigidTransform far_init;
  far_init.translation = Vec3(10.0, 0.0, 0.0);  // far beyond the 2 cm gate
  PointCloud target = object;
  IcpParams params;
  params.max_correspondence_dist = 0.001;
  bool threw = false;
  try {
    icp_refine(object, target, far_init, params);
  } catch (const IcpStallError& e) {
    threw = true;
    CHECK(pose_error(e.last_transform, far_init) < 1e-15);
  }
  CHECK(threw);
}

TEST_CASE("fuse_views concatenates transformed scans") {
  Rng rng(91);
  PointCloud a = testing::random_cloud(10, rng, 0.2);
  PointCloud b = testing::random_cloud(14, rng, 0.2);
  const RigidTransform ta = testing::random_rigid(rng, 0.3);
  const RigidTransform tb = testing::random_rigid(rng, 0.3);
  const PointCloud fused = fuse_views({{a, ta}, {b, tb}});
  REQUIRE(fused.size() == a.size() + b.size());
  CHECK(fused.frame == "world");
  CHECK((fused.points.topRows(a.size()) - transform_points(ta, a.points))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((fused.points.bottomRows(b.size()) - transform_points(tb, b.points))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("registration is equivariant under a world-frame change") {
  // Conjugating the problem by a rigid map conjugates the answer.
  const PointCloud object = make_registration_object(512, 28);
  const RigidTransform truth = yaw_shift(kPi / 6.0, Vec3(0.08, 0.0, 0.0));
  const PointCloud moved = transform_cloud(truth, object, "world");

  Rng rng(17);
  const RigidTransform world_change = testing::random_rigid(rng, 0.2);
  const PointCloud moved2 = transform_cloud(world_change, moved, "world");

  RansacParams params;
  params.seed = 2;
  const RigidTransform base =
      icp_refine(object, moved, ransac_align(object, moved, params).transform, IcpParams{})
          .transform;
  const RigidTransform conjugated =
      icp_refine(object, moved2, ransac_align(object, moved2, params).transform,
                 IcpParams{})
          .transform;
  CHECK(pose_error(conjugated, world_change * base) < 1e-6);
}

TEST_CASE("calibrate_views validates input sizes") {
  const PointCloud object = make_registration_object(128, 29);
  std::vector<PointCloud> scans = {object, object};
  std::vector<RigidTransform> inits(1);
  CHECK_THROWS_AS(
      calibrate_views(scans, object, &inits, RansacParams{}, IcpParams{}),
      InvalidInputError);
}

TEST_CASE("calibrate_views with inits matches direct icp_refine") {
  const PointCloud object = make_registration_object(700, 30);
  std::vector<PointCloud> scans;
  std::vector<RigidTransform> truths, inits;
  for (int k = 0; k < 3; ++k) {
    const RigidTransform pose =
        yaw_shift(kPi * (0.3 + 0.4 * k), Vec3(0.02 * k, -0.01, 0.0));
    // Scan lives in the camera frame: world point = pose.apply(scan point).
    scans.push_back(transform_cloud(pose.inverse(), object, "camera"));
    truths.push_back(pose);
    inits.push_back(perturb_pose(pose, 4.0 * kPi / 180.0, 0.008, 7u + static_cast<std::uint64_t>(k)));
  }

  const auto results =
      calibrate_views(scans, object, &inits, RansacParams{}, IcpParams{});
  REQUIRE(results.size() == scans.size());
  for (std::size_t k = 0; k < scans.size(); ++k) {
    CHECK(pose_error(results[k].transform, truths[k]) < 1e-6);
    const RegistrationResult direct =
        icp_refine(scans[k], object, inits[k], IcpParams{});
    CHECK(pose_error(results[k].transform, direct.transform) == 0.0);
    CHECK(results[k].rms_error == direct.rms_error);
  }
}
