#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <clay/kdtree.hpp>
#include <clay/metrics.hpp>
#include <clay/transform.hpp>

#include "helpers.hpp"

#include <algorithm>
#include <cmath>

using namespace clay;
using clay::testing::brute_chamfer;
using clay::testing::linear_nn;
using clay::testing::random_cloud;
using clay::testing::random_rigid;

TEST_CASE("chamfer forced values") {
  Points a1(1, 3), b1(1, 3);
  a1 << 0, 0, 0;
  b1 << 1, 0, 0;
  CHECK(chamfer_distance(PointCloud(a1), PointCloud(b1)) == 2.0);

  Points a2(2, 3);
  a2 << 0, 0, 0, 2, 0, 0;
  CHECK(chamfer_distance(PointCloud(a2), PointCloud(b1)) == 3.0);

  Rng rng(21);
  const PointCloud cloud = random_cloud(120, rng);
  CHECK(chamfer_distance(cloud, cloud) == 0.0);
}

TEST_CASE("chamfer equals the brute-force oracle exactly") {
  Rng rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    const Index na = 1 + static_cast<Index>(rng.uniform() * 511);
    const Index nb = 1 + static_cast<Index>(rng.uniform() * 511);
    const PointCloud a = random_cloud(na, rng);
    const PointCloud b = random_cloud(nb, rng);
    const double fast = chamfer_distance(a, b);
    CHECK(fast == brute_chamfer(a, b));
    CHECK(fast == chamfer_distance(b, a));  // symmetry, bit for bit
  }
}

TEST_CASE("chamfer is rigid-invariant within 1e-9 relative") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const PointCloud a = random_cloud(80, rng);
    const PointCloud b = random_cloud(70, rng);
    const RigidTransform t = random_rigid(rng);
    const double before = chamfer_distance(a, b);
    const double after = chamfer_distance(PointCloud(transform_points(t, a.points)),
                                          PointCloud(transform_points(t, b.points)));
    CHECK(std::abs(after - before) <= 1e-9 * std::max(1.0, before));
  }
}

TEST_CASE("chamfer_mean divides each directed sum by its cloud size") {
  Points a(2, 3), b(1, 3);
  a << 0, 0, 0, 2, 0, 0;
  b << 1, 0, 0;
  // forward (1+1)/2 + backward 1/1
  CHECK(chamfer_mean(PointCloud(a), PointCloud(b)) == 2.0);
}

TEST_CASE("chamfer rejects empty clouds") {
  Points one(1, 3);
  one << 0, 0, 0;
  CHECK_THROWS_AS(chamfer_distance(PointCloud(), PointCloud(one)), InvalidInputError);
  CHECK_THROWS_AS(chamfer_distance(PointCloud(one), PointCloud()), InvalidInputError);
}

TEST_CASE("nearest_neighbor basics and tie-break") {
  Points pts(6, 3);
  pts << 0, 0, 0, 5, 0, 0, 1, 0, 0, 9, 9, 9, 4, 4, 4, -1, 0, 0;
  const PointCloud cloud(pts);
  // query inside the cloud
  auto [idx, d2] = nearest_neighbor(Vec3(5, 0, 0), cloud);
  CHECK(idx == 1);
  CHECK(d2 == 0.0);
  // query equidistant to indices 2 and 5: lowest index wins
  Points twin(7, 3);
  twin << 9, 9, 9, 8, 8, 8, 1, 0, 0, 7, 7, 7, 6, 6, 6, -1, 0, 0, 2, 2, 2;
  auto [t_idx, t_d2] = nearest_neighbor(Vec3(0, 0, 0), PointCloud(twin));
  CHECK(t_idx == 2);  // indices 2 and 5 both at distance 1; lowest wins
  CHECK(t_d2 == 1.0);
  CHECK_THROWS_AS(nearest_neighbor(Vec3::Zero(), PointCloud()), InvalidInputError);
}

TEST_CASE("KdTree matches the linear scan on 1000 points x 100 queries") {
  Rng rng(24);
  const PointCloud cloud = random_cloud(1000, rng);
  const KdTree tree(cloud.points);
  for (int q = 0; q < 100; ++q) {
    const Vec3 query = random_cloud(1, rng).point(0);
    const auto fast = tree.nearest(query);
    const auto slow = linear_nn(query, cloud.points);
    CHECK(fast.first == slow.first);
    CHECK(fast.second == slow.second);
    CHECK(nearest_neighbor(query, cloud) == slow);
  }
}

TEST_CASE("KdTree handles duplicates with the lowest-index rule") {
  Points pts(5, 3);
  pts << 1, 1, 1, 2, 2, 2, 1, 1, 1, 0, 0, 0, 2, 2, 2;
  const KdTree tree(pts);
  CHECK(tree.nearest(Vec3(1, 1, 1)).first == 0);
  CHECK(tree.nearest(Vec3(2, 2, 2)).first == 1);
}

TEST_CASE("KdTree knearest is sorted and clamped") {
  Rng rng(25);
  const PointCloud cloud = random_cloud(200, rng);
  const KdTree tree(cloud.points);
  std::vector<Index> indices;
  std::vector<double> d2;
  const Vec3 q = random_cloud(1, rng).point(0);
  tree.knearest(q, 10, indices, d2);
  REQUIRE(indices.size() == 10);
  CHECK(std::is_sorted(d2.begin(), d2.end()));

  // Against a full sort of the linear scan.
  std::vector<std::pair<double, Index>> all;
  for (Index j = 0; j < cloud.size(); ++j) {
    all.emplace_back(squared_distance(q, cloud.point(j)), j);
  }
  std::sort(all.begin(), all.end());
  for (int i = 0; i < 10; ++i) {
    CHECK(indices[i] == all[static_cast<std::size_t>(i)].second);
    CHECK(d2[i] == all[static_cast<std::size_t>(i)].first);
  }

  tree.knearest(q, 1000, indices, d2);  // k beyond size clamps
  CHECK(indices.size() == 200);
}
