#include <clay/cluster.hpp>
#include <clay/rng.hpp>
#include <clay/sampler.hpp>
#include <clay/transform.hpp>

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

namespace clay {

namespace {

void validate_config(const SamplerConfig& cfg, const char* op) {
  if (cfg.n_clusters < 1)
    throw InvalidInputError(std::string(op) + ": n_clusters must be >= 1");
  if (cfg.n_samples < 0)
    throw InvalidInputError(std::string(op) + ": n_samples must be >= 0");
  if (!cfg.bounds.valid()) throw InvalidInputError(std::string(op) + ": invalid bounds");
  if (!cfg.gripper.valid())
    throw InvalidInputError(std::string(op) + ": invalid gripper dimensions");
}

}  // namespace

PairedClusters pair_clusters(const PointCloud& state, const PointCloud& target,
                             Index k, std::uint64_t seed) {
  const ClusterSet state_set = kmeans(state, k, seed);
  const ClusterSet target_set = kmeans(target, k, seed);

  // All k^2 candidate matches, ascending by (distance, state idx, target idx).
  std::vector<std::tuple<double, Index, Index>> candidates;
  candidates.reserve(static_cast<std::size_t>(k * k));
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      const double dist = (state_set.centroids.row(i) - target_set.centroids.row(j)).norm();
      candidates.emplace_back(dist, i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  PairedClusters out;
  std::vector<char> state_used(static_cast<std::size_t>(k), 0);
  std::vector<char> target_used(static_cast<std::size_t>(k), 0);
  for (const auto& [dist, i, j] : candidates) {
    if (state_used[static_cast<std::size_t>(i)] || target_used[static_cast<std::size_t>(j)])
      continue;
    state_used[static_cast<std::size_t>(i)] = 1;
    target_used[static_cast<std::size_t>(j)] = 1;
    out.pairs.push_back({state_set.centroids.row(i).transpose(),
                         target_set.centroids.row(j).transpose(), dist});
    if (static_cast<Index>(out.pairs.size()) == k) break;
  }

  double total = 0.0;
  for (const CentroidPair& pair : out.pairs) total += pair.distance;
  out.degenerate = total <= 0.0 || total / static_cast<double>(k) < 1e-9;
  out.probabilities.resize(out.pairs.size(), 0.0);
  if (!out.degenerate) {
    for (std::size_t p = 0; p < out.pairs.size(); ++p)
      out.probabilities[p] = out.pairs[p].distance / total;
  }
  return out;
}

std::vector<std::size_t> draw_pairs(const PairedClusters& paired, Index n_draws,
                                    std::uint64_t seed) {
  if (paired.degenerate || paired.pairs.empty())
    throw InvalidInputError("draw_pairs: degenerate pairing");

  std::vector<double> cumulative(paired.probabilities.size());
  double acc = 0.0;
  for (std::size_t p = 0; p < paired.probabilities.size(); ++p) {
    acc += paired.probabilities[p];
    cumulative[p] = acc;
  }
  cumulative.back() = 1.0;  // guard against rounding shortfall

  Rng rng(seed);
  std::vector<std::size_t> draws(static_cast<std::size_t>(n_draws));
  for (std::size_t n = 0; n < draws.size(); ++n) {
    const double r = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    draws[n] = static_cast<std::size_t>(it - cumulative.begin());
  }
  return draws;
}

GraspAction action_from_pair(const Vec3& mu_state, const Vec3& mu_target,
                             const SamplerConfig& cfg) {
  validate_config(cfg, "action_from_pair");
  const Vec3 delta = mu_target - mu_state;
  const double dist = delta.norm();
  if (dist < 1e-12)
    throw InvalidInputError("action_from_pair: coincident centroids");
  const Vec3 dir = delta / dist;

  const Vec3 position = cfg.bounds.clamp(mu_state + 0.5 * cfg.gripper.max_open * dir);
  GraspAction action;
  action.x = position.x();
  action.y = position.y();
  action.z = position.z();
  action.rot_z = normalize_angle(std::atan2(dir.y(), dir.x()));
  action.d = std::clamp(0.5 * (mu_target - position).norm(), cfg.gripper.min_close,
                        cfg.gripper.max_open);
  return action;
}

std::vector<GraspAction> geometric_sample(const PointCloud& state, const PointCloud& target,
                                          const SamplerConfig& cfg) {
  validate_config(cfg, "geometric_sample");
  if (cfg.n_samples < 1)
    throw InvalidInputError("geometric_sample: n_samples must be >= 1");

  const PairedClusters paired =
      pair_clusters(state, target, cfg.n_clusters, stage_seed(cfg.seed, "clusters"));
  if (paired.degenerate) return {};  // converged: nothing left to push

  const std::vector<std::size_t> draws =
      draw_pairs(paired, cfg.n_samples, stage_seed(cfg.seed, "draws"));

  std::vector<GraspAction> actions;
  actions.reserve(draws.size());
  for (std::size_t idx : draws) {
    actions.push_back(action_from_pair(paired.pairs[idx].state, paired.pairs[idx].target, cfg));
  }
  return actions;
}

std::vector<GraspAction> random_sample(const SamplerConfig& cfg) {
  validate_config(cfg, "random_sample");

  Rng rng(cfg.seed);
  std::vector<GraspAction> actions(static_cast<std::size_t>(cfg.n_samples));
  for (GraspAction& action : actions) {
    action.x = rng.uniform(cfg.bounds.min.x(), cfg.bounds.max.x());
    action.y = rng.uniform(cfg.bounds.min.y(), cfg.bounds.max.y());
    action.z = rng.uniform(cfg.bounds.min.z(), cfg.bounds.max.z());
    action.rot_z = rng.uniform(-M_PI, M_PI);
    action.d = rng.uniform(cfg.gripper.min_close, cfg.gripper.max_open);
    action.rot_z = normalize_angle(action.rot_z);
  }
  return actions;
}

}  // namespace clay
