#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <clay/metrics.hpp>
#include <clay/planner.hpp>
#include <clay/rng.hpp>
#include <clay/sampler.hpp>
#include <clay/transform.hpp>
#include <clay/types.hpp>

#include <json.hpp>

#include "helpers.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace clay;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Two tight blobs of exact duplicates: k-means with k = 2 recovers the
// blob positions exactly.
PointCloud two_blobs(const Vec3& a, const Vec3& b, Index per_blob) {
  PointCloud cloud;
  cloud.points.resize(2 * per_blob, 3);
  for (Index i = 0; i < per_blob; ++i) {
    cloud.points.row(i) = a.transpose();
    cloud.points.row(per_blob + i) = b.transpose();
  }
  return cloud;
}

PointCloud shifted(const PointCloud& cloud, const Vec3& offset) {
  PointCloud out = cloud;
  out.points.rowwise() += offset.transpose();
  return out;
}

}  // namespace

TEST_CASE("pair_clusters flags the degenerate state ~ target case") {
  Rng rng(3);
  const PointCloud cloud = testing::random_cloud(60, rng, 0.03);
  const PairedClusters paired = pair_clusters(cloud, cloud, 5, 11);
  CHECK(paired.degenerate);
  REQUIRE(paired.pairs.size() == 5);
  for (const CentroidPair& pair : paired.pairs) CHECK(pair.distance < 1e-9);
}

TEST_CASE("pair distances (1, 3) give probabilities (0.25, 0.75)") {
  const PointCloud state = two_blobs(Vec3(0, 0, 0), Vec3(10, 0, 0), 4);
  const PointCloud target = two_blobs(Vec3(0, 0, 1), Vec3(10, 0, 3), 4);
  const PairedClusters paired = pair_clusters(state, target, 2, 7);

  REQUIRE(paired.pairs.size() == 2);
  CHECK_FALSE(paired.degenerate);
  CHECK(paired.pairs[0].distance == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(paired.pairs[1].distance == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(paired.probabilities[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(paired.probabilities[1] == doctest::Approx(0.75).epsilon(1e-12));

  // Matching is a bijection ordered by ascending distance.
  CHECK((paired.pairs[0].state - Vec3(0, 0, 0)).norm() < 1e-12);
  CHECK((paired.pairs[0].target - Vec3(0, 0, 1)).norm() < 1e-12);
  CHECK((paired.pairs[1].state - Vec3(10, 0, 0)).norm() < 1e-12);
  CHECK((paired.pairs[1].target - Vec3(10, 0, 3)).norm() < 1e-12);
}

TEST_CASE("a pure translation shows up as every pair's delta") {
  Rng rng(5);
  const PointCloud state = testing::random_cloud(256, rng, 0.03);
  const PointCloud target = shifted(state, Vec3(0.02, 0.0, 0.0));
  const PairedClusters paired = pair_clusters(state, target, 4, 9);

  REQUIRE(paired.pairs.size() == 4);
  for (const CentroidPair& pair : paired.pairs) {
    const Vec3 delta = pair.target - pair.state;
    CHECK((delta - Vec3(0.02, 0.0, 0.0)).norm() < 1e-6);
    CHECK(pair.distance == doctest::Approx(0.02).epsilon(1e-6));
  }
}

TEST_CASE("draw_pairs follows the distance weights and skips zero-weight pairs") {
  PairedClusters paired;
  paired.pairs = {CentroidPair{Vec3::Zero(), Vec3::Zero(), 0.0},
                  CentroidPair{Vec3::Zero(), Vec3::Zero(), 1.0},
                  CentroidPair{Vec3::Zero(), Vec3::Zero(), 3.0}};
  paired.probabilities = {0.0, 0.25, 0.75};

  const std::vector<std::size_t> draws = draw_pairs(paired, 100000, 17);
  REQUIRE(draws.size() == 100000);
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t idx : draws) {
    REQUIRE(idx < 3);
    ++counts[idx];
  }
  CHECK(counts[0] == 0);  // zero-probability pair is never drawn
  const double f1 = static_cast<double>(counts[1]) / 100000.0;
  CHECK(std::abs(f1 - 0.25) < 0.01);

  // Deterministic per seed.
  CHECK(draw_pairs(paired, 100, 17) ==
        std::vector<std::size_t>(draws.begin(), draws.begin() + 100));
  CHECK(draw_pairs(paired, 100, 18) != std::vector<std::size_t>(draws.begin(),
                                                                draws.begin() + 100));
}

TEST_CASE("action_from_pair reproduces the hand-computed example") {
  SamplerConfig cfg;  // gripper max_open 0.08, default workspace bounds
  const GraspAction action =
      action_from_pair(Vec3(0, 0, 0), Vec3(0.02, 0, 0), cfg);
  // position = mu_state + (max_open / 2) * direction
  CHECK(std::abs(action.x - 0.04) < 1e-12);
  CHECK(std::abs(action.y) < 1e-12);
  CHECK(std::abs(action.z) < 1e-12);
  CHECK(action.rot_z == 0.0);
  // d = half the remaining distance |mu_target - position| = 0.01
  CHECK(std::abs(action.d - 0.01) < 1e-12);
}

TEST_CASE("action_from_pair points the closing axis along delta") {
  SamplerConfig cfg;
  const GraspAction up = action_from_pair(Vec3(0, 0, 0.1), Vec3(0, 0.05, 0.1), cfg);
  CHECK(up.rot_z == doctest::Approx(kPi / 2.0));

  const GraspAction diag =
      action_from_pair(Vec3(0, 0, 0.1), Vec3(-0.03, -0.03, 0.1), cfg);
  CHECK(diag.rot_z == doctest::Approx(-3.0 * kPi / 4.0));
}

TEST_CASE("action_from_pair clamps position and gap") {
  SamplerConfig cfg;
  // Position lands past the +x wall and below the z floor: clamped inside.
  const GraspAction clamped =
      action_from_pair(Vec3(0.19, 0.0, -0.05), Vec3(0.30, 0.0, -0.05), cfg);
  CHECK(cfg.bounds.contains(clamped.position()));
  CHECK(clamped.x == cfg.bounds.max.x());
  CHECK(clamped.z == cfg.bounds.min.z());

  // Far target: gap capped at d_max.
  const GraspAction wide = action_from_pair(Vec3(0, 0, 0.1), Vec3(0.4, 0, 0.1), cfg);
  CHECK(wide.d == cfg.gripper.max_open);

  // Target sitting at the grasp position: gap floored at d_min.
  const GraspAction tight =
      action_from_pair(Vec3(0, 0, 0.1), Vec3(0.04, 0, 0.1), cfg);
  CHECK(tight.d == cfg.gripper.min_close);
}

TEST_CASE("action_from_pair is equivariant under a z-rotation") {
  SamplerConfig cfg;
  const Vec3 mu_state(0.02, -0.01, 0.1);
  const Vec3 mu_target(0.05, 0.03, 0.1);
  const GraspAction base = action_from_pair(mu_state, mu_target, cfg);

  const double theta = 0.5;
  const Mat3 rot = rotation_z(theta).rotation;
  const GraspAction turned = action_from_pair(rot * mu_state, rot * mu_target, cfg);

  CHECK((turned.position() - rot * base.position()).norm() < 1e-12);
  CHECK(turned.rot_z == doctest::Approx(normalize_angle(base.rot_z + theta)));
  CHECK(turned.d == doctest::Approx(base.d).epsilon(1e-12));
}

TEST_CASE("geometric_sample emits n_samples valid actions") {
  Rng rng(6);
  const PointCloud state = testing::random_cloud(128, rng, 0.03);
  const PointCloud target = shifted(state, Vec3(0.015, -0.01, 0.0));

  SamplerConfig cfg;
  cfg.seed = 4;
  const std::vector<GraspAction> actions = geometric_sample(state, target, cfg);
  REQUIRE(actions.size() == 35);
  for (const GraspAction& a : actions) {
    CHECK(a.all_finite());
    CHECK(cfg.bounds.contains(a.position()));
    CHECK(a.d >= cfg.gripper.min_close);
    CHECK(a.d <= cfg.gripper.max_open);
    CHECK(a.rot_z >= -kPi);
    CHECK(a.rot_z < kPi);
  }

  // Determinism and seed separation.
  const std::vector<GraspAction> again = geometric_sample(state, target, cfg);
  REQUIRE(again.size() == actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    CHECK(again[i].x == actions[i].x);
    CHECK(again[i].rot_z == actions[i].rot_z);
    CHECK(again[i].d == actions[i].d);
  }
}

TEST_CASE("geometric_sample signals convergence with an empty list") {
  Rng rng(7);
  const PointCloud state = testing::random_cloud(128, rng, 0.03);
  SamplerConfig cfg;
  cfg.seed = 12;
  CHECK(geometric_sample(state, state, cfg).empty());
}

TEST_CASE("random_sample fills the 5-D action box uniformly") {
  SamplerConfig cfg;
  cfg.n_samples = 2500;
  cfg.seed = 21;
  const std::vector<GraspAction> actions = random_sample(cfg);
  REQUIRE(actions.size() == 2500);
  for (const GraspAction& a : actions) {
    CHECK(cfg.bounds.contains(a.position()));
    CHECK(a.rot_z >= -kPi);
    CHECK(a.rot_z < kPi);
    CHECK(a.d >= cfg.gripper.min_close);
    CHECK(a.d < cfg.gripper.max_open);
  }

  // The draws actually spread: distinct positions, both rot_z signs.
  bool negative_rot = false, positive_rot = false;
  for (const GraspAction& a : actions) {
    (a.rot_z < 0.0 ? negative_rot : positive_rot) = true;
  }
  CHECK(negative_rot);
  CHECK(positive_rot);

  const std::vector<GraspAction> again = random_sample(cfg);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    CHECK(again[i].x == actions[i].x);
    CHECK(again[i].d == actions[i].d);
  }
  SamplerConfig other = cfg;
  other.seed = 22;
  CHECK(random_sample(other)[0].x != actions[0].x);

  SamplerConfig empty = cfg;
  empty.n_samples = 0;
  CHECK(random_sample(empty).empty());
}

TEST_CASE("evaluate_candidates matches a sequential oracle") {
  Rng rng(8);
  const PointCloud state = testing::random_cloud(64, rng, 0.03);
  const PointCloud target = shifted(state, Vec3(0.01, 0.0, 0.0));
  const GripperModel gripper;
  const GraspConstraints constraints = resolved_constraints(GraspConstraints{}, state);
  const DynamicsFn dynamics = make_grasp_dynamics(gripper, constraints);

  std::vector<GraspAction> actions(3);
  actions[0] = {0.01, 0.0, 0.0, 0.3, 0.02};
  actions[1] = {-0.01, 0.01, 0.0, -1.2, 0.03};
  actions[2] = {0.0, -0.01, 0.0, 2.0, 0.015};

  // Oracle: roll each action in order, keep the strict argmin.
  std::size_t best = 0;
  double best_cd = std::numeric_limits<double>::infinity();
  std::vector<double> cds(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const PointCloud predicted = dynamics(state, actions[i]);
    cds[i] = chamfer_distance(predicted, target);
    if (cds[i] < best_cd) {
      best_cd = cds[i];
      best = i;
    }
  }

  const CandidateChoice choice = evaluate_candidates(state, target, actions, dynamics);
  CHECK(choice.index == best);
  CHECK(choice.predicted_cd == best_cd);
  CHECK(chamfer_distance(choice.predicted, target) == choice.predicted_cd);

  // Single candidate: returned verbatim.
  const CandidateChoice solo = evaluate_candidates(
      state, target, {actions[1]}, dynamics);
  CHECK(solo.index == 0);
  CHECK(solo.predicted_cd == cds[1]);

  // Duplicate candidates tie: lowest index wins.
  const CandidateChoice tie = evaluate_candidates(
      state, target, {actions[1], actions[1], actions[1]}, dynamics);
  CHECK(tie.index == 0);

  // Threaded evaluation reduces to the same indexed argmin.
  const CandidateChoice threaded =
      evaluate_candidates(state, target, actions, dynamics, 2);
  CHECK(threaded.index == choice.index);
  CHECK(threaded.predicted_cd == choice.predicted_cd);
  CHECK((threaded.predicted.points.array() == choice.predicted.points.array()).all());

  CHECK_THROWS_AS(evaluate_candidates(state, target, {}, dynamics), InvalidInputError);
}

TEST_CASE("evaluate_candidates with the no-op never beats the current cd") {
  Rng rng(9);
  const PointCloud state = testing::random_cloud(64, rng, 0.03);
  const PointCloud target = shifted(state, Vec3(0.005, 0.005, 0.0));
  const GripperModel gripper;
  const GraspConstraints constraints = resolved_constraints(GraspConstraints{}, state);
  const DynamicsFn dynamics = make_grasp_dynamics(gripper, constraints);

  GraspAction noop;
  noop.d = gripper.max_open;
  std::vector<GraspAction> actions = {GraspAction{0.0, 0.0, 0.0, 0.4, 0.02}, noop};
  const CandidateChoice choice = evaluate_candidates(state, target, actions, dynamics);
  CHECK(choice.predicted_cd <= chamfer_distance(state, target));
}

TEST_CASE("plan_step counts candidates per sampler") {
  Rng rng(10);
  const PointCloud state = testing::random_cloud(48, rng, 0.03);
  const PointCloud target = shifted(state, Vec3(0.012, 0.0, 0.0));
  const GripperModel gripper;
  const GraspConstraints constraints = resolved_constraints(GraspConstraints{}, state);
  const DynamicsFn dynamics = make_grasp_dynamics(gripper, constraints);

  PlannerConfig geo;
  geo.seed = 100;
  const PlanStep geo_step = plan_step(state, target, geo, dynamics);
  CHECK(geo_step.candidates_evaluated == 36);  // 35 sampled + no-op
  CHECK_FALSE(geo_step.converged);
  CHECK(geo_step.predicted_cd ==
        chamfer_distance(geo_step.predicted, target));
  CHECK(geo_step.predicted_cd <= chamfer_distance(state, target));

  PlannerConfig rnd;
  rnd.sampler = SamplerKind::random;
  rnd.sampler_config.n_samples = 2500;
  rnd.seed = 100;
  rnd.threads = 2;
  const PlanStep rnd_step = plan_step(state, target, rnd, dynamics);
  CHECK(rnd_step.candidates_evaluated == 2501);

  // State at the target: geometric sampling reports convergence.
  const PlanStep done = plan_step(state, state, geo, dynamics);
  CHECK(done.converged);
  CHECK(done.candidates_evaluated == 0);
  CHECK(done.predicted_cd == 0.0);
}

TEST_CASE("run_sculpt_loop with a perfect model never backslides") {
  Rng rng(11);
  const PointCloud initial = testing::random_cloud(64, rng, 0.03);
  const PointCloud target = shifted(initial, Vec3(0.02, -0.01, 0.0));
  const GripperModel gripper;
  const GraspConstraints constraints = resolved_constraints(GraspConstraints{}, initial);
  const DynamicsFn dynamics = make_grasp_dynamics(gripper, constraints);

  PlannerConfig cfg;
  cfg.max_grasps = 6;
  cfg.seed = 31;
  const std::vector<PlanStep> log = run_sculpt_loop(initial, target, cfg, dynamics,
                                                    dynamics);
  REQUIRE(!log.empty());
  CHECK(log.size() <= static_cast<std::size_t>(cfg.max_grasps));

  double prev = chamfer_distance(initial, target);
  for (const PlanStep& step : log) {
    if (step.converged) break;
    // Perfect model: the environment realizes exactly the prediction.
    CHECK((step.realized.points.array() == step.predicted.points.array()).all());
    CHECK(step.realized_cd == step.predicted_cd);
    CHECK(step.realized_cd <= prev);  // no-op candidate forbids backsliding
    prev = step.realized_cd;
  }

  // Identical runs produce byte-identical logs.
  const std::vector<PlanStep> again = run_sculpt_loop(initial, target, cfg, dynamics,
                                                      dynamics);
  CHECK(steps_jsonl(again) == steps_jsonl(log));
}

TEST_CASE("run_sculpt_loop stops immediately when already at the target") {
  Rng rng(12);
  const PointCloud cloud = testing::random_cloud(64, rng, 0.03);
  const GripperModel gripper;
  const GraspConstraints constraints = resolved_constraints(GraspConstraints{}, cloud);
  const DynamicsFn dynamics = make_grasp_dynamics(gripper, constraints);

  PlannerConfig cfg;
  cfg.seed = 41;
  const std::vector<PlanStep> log = run_sculpt_loop(cloud, cloud, cfg, dynamics, dynamics);
  REQUIRE(log.size() == 1);
  CHECK(log[0].converged);
  CHECK(log[0].realized_cd == 0.0);
}

TEST_CASE("run_sculpt_loop returns the partial log when the environment fails") {
  Rng rng(13);
  const PointCloud initial = testing::random_cloud(64, rng, 0.03);
  const PointCloud target = shifted(initial, Vec3(0.02, 0.0, 0.0));
  const GripperModel gripper;
  const GraspConstraints constraints = resolved_constraints(GraspConstraints{}, initial);
  const DynamicsFn dynamics = make_grasp_dynamics(gripper, constraints);

  int calls = 0;
  const DynamicsFn flaky = [&](const PointCloud& cloud, const GraspAction& action) {
    if (++calls == 3) throw std::runtime_error("gripper jam");
    return dynamics(cloud, action);
  };

  PlannerConfig cfg;
  cfg.max_grasps = 10;
  cfg.cd_stop_threshold = 1e-12;  // effectively unreachable
  cfg.seed = 51;
  const std::vector<PlanStep> log =
      run_sculpt_loop(initial, target, cfg, dynamics, flaky);
  CHECK(log.size() == 2);
  CHECK(calls == 3);
}

TEST_CASE("steps_jsonl carries exactly the logged scalars") {
  PlanStep step;
  step.step = 4;
  step.action = {0.01, -0.02, 0.003, 0.5, 0.02};
  step.predicted_cd = 0.125;
  step.realized_cd = 0.25;
  step.candidates_evaluated = 36;
  step.converged = false;
  step.wall_time = 123.0;  // must not appear in the log
  PointCloud cloud;
  cloud.points.resize(1, 3);
  cloud.points.setZero();
  step.predicted = cloud;  // clouds must not appear either

  const std::string text = steps_jsonl({step});
  CHECK(text.back() == '\n');
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j["step"] == 4);
  CHECK(j["action"]["x"] == 0.01);
  CHECK(j["action"]["rot_z"] == 0.5);
  CHECK(j["action"]["d"] == 0.02);
  CHECK(j["predicted_cd"] == 0.125);
  CHECK(j["realized_cd"] == 0.25);
  CHECK(j["candidates_evaluated"] == 36);
  CHECK(j["converged"] == false);
  CHECK(!j.contains("wall_time"));
  CHECK(!j.contains("predicted"));
  CHECK(!j.contains("realized"));
}
