#include <clay/kdtree.hpp>
#include <clay/registration.hpp>
#include <clay/rng.hpp>

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <vector>

namespace clay {

namespace {

// Nearest target row for every source row, with residuals.
std::vector<Correspondence> nearest_matches(const Points& source, const KdTree& target_tree) {
  std::vector<Correspondence> matches(static_cast<std::size_t>(source.rows()));
  for (Index i = 0; i < source.rows(); ++i) {
    auto [j, d2] = target_tree.nearest(source.row(i).transpose());
    matches[static_cast<std::size_t>(i)] = {i, j, std::sqrt(d2)};
  }
  return matches;
}

double rms_of(const std::vector<Correspondence>& matches) {
  double sum = 0.0;
  for (const auto& m : matches) sum += m.residual * m.residual;
  return matches.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(matches.size()));
}

RigidTransform fit_from_matches(const Points& source, const Points& target,
                                const std::vector<Correspondence>& matches) {
  Points s(static_cast<Index>(matches.size()), 3);
  Points t(static_cast<Index>(matches.size()), 3);
  for (std::size_t k = 0; k < matches.size(); ++k) {
    s.row(static_cast<Index>(k)) = source.row(matches[k].source_index);
    t.row(static_cast<Index>(k)) = target.row(matches[k].target_index);
  }
  return fit_rigid(s, t);
}

// Squared area of the triangle spanned by three sample rows; the degeneracy
// test for minimal samples.
double triangle_area_sq(const Points& pts, Index a, Index b, Index c) {
  const Vec3 ab = (pts.row(b) - pts.row(a)).transpose();
  const Vec3 ac = (pts.row(c) - pts.row(a)).transpose();
  return 0.25 * ab.cross(ac).squaredNorm();
}

}  // namespace

RigidTransform fit_rigid(const Points& source, const Points& target) {
  if (source.rows() != target.rows())
    throw InvalidInputError("fit_rigid: row count mismatch");
  if (source.rows() < 3)
    throw InvalidInputError("fit_rigid: needs at least 3 pairs");

  const Vec3 sc = source.colwise().mean().transpose();
  const Vec3 tc = target.colwise().mean().transpose();
  const Points sd = source.rowwise() - sc.transpose();
  const Points td = target.rowwise() - tc.transpose();

  const Mat3 h = sd.transpose() * td;
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixV() * svd.matrixU().transpose();
  if (r.determinant() < 0.0) {
    Mat3 v = svd.matrixV();
    v.col(2) *= -1.0;
    r = v * svd.matrixU().transpose();
  }
  return {r, tc - r * sc};
}

RegistrationResult ransac_align(const PointCloud& source, const PointCloud& target,
                                const RansacParams& params) {
  if (source.empty() || target.empty())
    throw InvalidInputError("ransac_align: empty cloud");
  if (params.sample_size != 3)
    throw InvalidInputError("ransac_align: sample_size must be 3");
  if (source.size() < 3)
    throw InvalidInputError("ransac_align: source needs at least 3 points");

  const KdTree target_tree(target.points);

  // Putative pairs: centroid pre-alignment then nearest neighbor.
  const Vec3 shift = target.centroid() - source.centroid();
  const Points shifted = source.points.rowwise() + shift.transpose();
  const std::vector<Correspondence> putative = nearest_matches(shifted, target_tree);

  Rng rng(params.seed);
  const double thr2 = params.inlier_threshold * params.inlier_threshold;
  const auto n = static_cast<std::size_t>(source.size());

  RigidTransform best_transform;
  Index best_inliers = -1;
  std::vector<char> best_mask(n, 0);
  std::vector<char> mask(n, 0);

  for (int iter = 0; iter < params.iterations; ++iter) {
    const Index a = static_cast<Index>(rng.uniform_index(n));
    const Index b = static_cast<Index>(rng.uniform_index(n));
    const Index c = static_cast<Index>(rng.uniform_index(n));
    if (a == b || a == c || b == c) continue;
    if (triangle_area_sq(source.points, a, b, c) < 1e-24) continue;

    Points s(3, 3), t(3, 3);
    int row = 0;
    for (Index idx : {a, b, c}) {
      s.row(row) = source.point(idx);
      t.row(row) = target.point(putative[static_cast<std::size_t>(idx)].target_index);
      ++row;
    }
    const RigidTransform candidate = fit_rigid(s, t);

    // Score: transformed source points within threshold of any target point.
    const Points moved = transform_points(candidate, source.points);
    Index inliers = 0;
    for (Index i = 0; i < moved.rows(); ++i) {
      const bool in = target_tree.nearest(moved.row(i).transpose()).second <= thr2;
      mask[static_cast<std::size_t>(i)] = in ? 1 : 0;
      inliers += in ? 1 : 0;
    }
    if (inliers > best_inliers) {  // strict: first-reaching iteration wins ties
      best_inliers = inliers;
      best_transform = candidate;
      best_mask = mask;
    }
  }

  if (best_inliers < 0)
    throw NoSolutionError("ransac_align: all iterations degenerate");

  RegistrationResult result;
  result.transform = best_transform;
  result.inlier_count = best_inliers;
  result.iterations = params.iterations;

  // Refit on the winning inlier set when it can support a rigid fit.
  if (best_inliers >= 3) {
    const Points moved = transform_points(best_transform, source.points);
    std::vector<Correspondence> inlier_matches;
    inlier_matches.reserve(static_cast<std::size_t>(best_inliers));
    for (Index i = 0; i < source.size(); ++i) {
      if (!best_mask[static_cast<std::size_t>(i)]) continue;
      auto [j, d2] = target_tree.nearest(moved.row(i).transpose());
      inlier_matches.push_back({i, j, std::sqrt(d2)});
    }
    result.transform = fit_from_matches(source.points, target.points, inlier_matches);

    const Points refined = transform_points(result.transform, source.points);
    Index refined_inliers = 0;
    double sum2 = 0.0;
    for (Index i = 0; i < refined.rows(); ++i) {
      const double d2 = target_tree.nearest(refined.row(i).transpose()).second;
      if (d2 <= thr2) {
        ++refined_inliers;
        sum2 += d2;
      }
    }
    result.inlier_count = refined_inliers;
    result.rms_error =
        refined_inliers > 0 ? std::sqrt(sum2 / static_cast<double>(refined_inliers)) : 0.0;
  }
  return result;
}

RegistrationResult icp_refine(const PointCloud& source, const PointCloud& target,
                              const RigidTransform& init, const IcpParams& params) {
  if (source.empty() || target.empty())
    throw InvalidInputError("icp_refine: empty cloud");

  const KdTree target_tree(target.points);
  const double max_d2 = params.max_correspondence_dist * params.max_correspondence_dist;

  RigidTransform current = init;
  RigidTransform best = init;
  double best_rms = std::numeric_limits<double>::infinity();
  double prev_rms = std::numeric_limits<double>::infinity();
  int iters_run = 0;
  Index best_count = 0;

  for (int iter = 0; iter < params.max_iters; ++iter) {
    const Points moved = transform_points(current, source.points);

    std::vector<Correspondence> matches;
    matches.reserve(static_cast<std::size_t>(moved.rows()));
    for (Index i = 0; i < moved.rows(); ++i) {
      auto [j, d2] = target_tree.nearest(moved.row(i).transpose());
      if (d2 <= max_d2) matches.push_back({i, j, std::sqrt(d2)});
    }
    if (matches.empty())
      throw IcpStallError("icp_refine: no correspondences within range", current);

    const double rms = rms_of(matches);
    ++iters_run;
    if (rms < best_rms) {
      best_rms = rms;
      best = current;
      best_count = static_cast<Index>(matches.size());
    }
    if (rms < params.convergence_tol) break;
    if (iter > 0 && std::abs(prev_rms - rms) < params.convergence_tol) break;
    prev_rms = rms;

    if (matches.size() < 3) break;  // too few pairs to refit; keep the best seen
    current = fit_from_matches(source.points, target.points, matches);
  }

  RegistrationResult result;
  result.transform = best;
  result.inlier_count = best_count;
  result.rms_error = best_rms;
  result.iterations = iters_run;
  return result;
}

std::vector<RegistrationResult> calibrate_views(
    const std::vector<PointCloud>& scans, const PointCloud& reference,
    const std::vector<RigidTransform>* initial_poses, const RansacParams& ransac_params,
    const IcpParams& icp_params) {
  if (scans.empty()) throw InvalidInputError("calibrate_views: no scans");
  if (initial_poses && initial_poses->size() != scans.size())
    throw InvalidInputError("calibrate_views: initial pose count mismatch");

  std::vector<RegistrationResult> results;
  results.reserve(scans.size());
  for (std::size_t k = 0; k < scans.size(); ++k) {
    RigidTransform init;
    if (initial_poses) {
      // An approximate pose replaces the coarse stage: centroid-shift
      // putative matching only tolerates moderate rotations, and refinement
      // from a hand-measured pose is both cheaper and less biased.
      init = (*initial_poses)[k];
    } else {
      RansacParams rp = ransac_params;
      rp.seed = ransac_params.seed + k;  // independent streams per camera
      init = ransac_align(scans[k], reference, rp).transform;
    }
    results.push_back(icp_refine(scans[k], reference, init, icp_params));
  }
  return results;
}

PointCloud fuse_views(const std::vector<std::pair<PointCloud, RigidTransform>>& scans) {
  if (scans.empty()) throw InvalidInputError("fuse_views: no scans");
  Index total = 0;
  for (const auto& [cloud, transform] : scans) total += cloud.size();

  PointCloud fused;
  fused.frame = "world";
  fused.points.resize(total, 3);
  Index row = 0;
  for (const auto& [cloud, transform] : scans) {
    fused.points.middleRows(row, cloud.size()) = transform_points(transform, cloud.points);
    row += cloud.size();
  }
  return fused;
}

}  // namespace clay
