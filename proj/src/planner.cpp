#include <clay/kdtree.hpp>
#include <clay/metrics.hpp>
#include <clay/planner.hpp>
#include <clay/rng.hpp>

#include <json.hpp>

#include <chrono>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

namespace clay {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

GraspAction noop_action(const PointCloud& state, const GripperModel& gripper) {
  const Vec3 c = state.centroid();
  GraspAction a;
  a.x = c.x();
  a.y = c.y();
  a.z = c.z();
  a.rot_z = 0.0;
  a.d = gripper.max_open;  // empty sweep: dynamics is the identity
  return a;
}

double resolve_stop_threshold(const PlannerConfig& cfg, double initial_cd) {
  return cfg.cd_stop_threshold > 0.0 ? cfg.cd_stop_threshold : 0.02 * initial_cd;
}

}  // namespace

DynamicsFn make_grasp_dynamics(const GripperModel& gripper, const GraspConstraints& constraints) {
  return [gripper, constraints](const PointCloud& cloud, const GraspAction& action) {
    return apply_grasp(cloud, action, gripper, constraints);
  };
}

CandidateChoice evaluate_candidates(const PointCloud& state, const PointCloud& target,
                                    const std::vector<GraspAction>& actions,
                                    const DynamicsFn& dynamics, int threads) {
  if (actions.empty()) throw InvalidInputError("evaluate_candidates: no actions");
  if (threads < 1) throw InvalidInputError("evaluate_candidates: threads must be >= 1");

  const KdTree target_tree(target.points);
  const std::size_t n = actions.size();
  std::vector<PointCloud> predictions(n);
  std::vector<double> scores(n);

  auto evaluate_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      predictions[i] = dynamics(state, actions[i]);
      const KdTree prediction_tree(predictions[i].points);
      scores[i] =
          chamfer_distance(predictions[i].points, target.points, prediction_tree, target_tree);
    }
  };

  const auto want = static_cast<std::size_t>(threads);
  if (want <= 1 || n <= 1) {
    evaluate_range(0, n);
  } else {
    const std::size_t workers = std::min(want, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(evaluate_range, begin, end);
    }
    for (std::thread& t : pool) t.join();
  }

  // Index-ordered argmin: the reduction result is the same no matter how the
  // evaluations above were scheduled.
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (scores[i] < scores[best]) best = i;
  }
  return {actions[best], std::move(predictions[best]), scores[best], best};
}

PlanStep plan_step(const PointCloud& state, const PointCloud& target, const PlannerConfig& cfg,
                   const DynamicsFn& dynamics, Index step_index) {
  if (!cfg.valid()) throw InvalidInputError("plan_step: invalid planner config");
  const auto start = std::chrono::steady_clock::now();

  SamplerConfig sampler_cfg = cfg.sampler_config;
  sampler_cfg.seed = stage_seed(cfg.seed, "sampler", static_cast<std::uint64_t>(step_index));

  PlanStep step;
  step.step = step_index;

  std::vector<GraspAction> candidates;
  if (cfg.sampler == SamplerKind::geometric) {
    candidates = geometric_sample(state, target, sampler_cfg);
    if (candidates.empty()) {  // convergence signal: state ~ target
      step.action = noop_action(state, cfg.sampler_config.gripper);
      step.predicted = state;
      step.predicted_cd = chamfer_distance(state, target);
      step.candidates_evaluated = 0;
      step.converged = true;
      step.wall_time = seconds_since(start);
      return step;
    }
  } else {
    candidates = random_sample(sampler_cfg);
  }
  if (cfg.include_noop) candidates.push_back(noop_action(state, cfg.sampler_config.gripper));

  CandidateChoice choice =
      evaluate_candidates(state, target, candidates, dynamics, cfg.threads);
  step.action = choice.action;
  step.predicted = std::move(choice.predicted);
  step.predicted_cd = choice.predicted_cd;
  step.candidates_evaluated = static_cast<Index>(candidates.size());
  step.wall_time = seconds_since(start);
  return step;
}

std::vector<PlanStep> run_sculpt_loop(const PointCloud& initial, const PointCloud& target,
                                      const PlannerConfig& cfg, const DynamicsFn& dynamics,
                                      const DynamicsFn& environment) {
  if (!cfg.valid()) throw InvalidInputError("run_sculpt_loop: invalid planner config");

  const double initial_cd = chamfer_distance(initial, target);
  const double stop = resolve_stop_threshold(cfg, initial_cd);

  std::vector<PlanStep> log;
  PointCloud state = initial;
  for (Index k = 0; k < cfg.max_grasps; ++k) {
    PlanStep step = plan_step(state, target, cfg, dynamics, k);
    if (step.converged) {
      step.realized = state;
      step.realized_cd = chamfer_distance(state, target);
      log.push_back(std::move(step));
      break;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
      step.realized = environment(state, step.action);
    } catch (const std::exception&) {
      return log;  // environment failure: abort with the partial log
    }
    step.realized_cd = chamfer_distance(step.realized, target);
    step.wall_time += seconds_since(start);

    state = step.realized;
    const bool done = step.realized_cd < stop;
    log.push_back(std::move(step));
    if (done) break;
  }
  return log;
}

void write_steps_jsonl(std::ostream& out, const std::vector<PlanStep>& steps) {
  for (const PlanStep& step : steps) {
    nlohmann::ordered_json j;
    j["step"] = step.step;
    j["action"] = {{"x", step.action.x},
                   {"y", step.action.y},
                   {"z", step.action.z},
                   {"rot_z", step.action.rot_z},
                   {"d", step.action.d}};
    j["predicted_cd"] = step.predicted_cd;
    j["realized_cd"] = step.realized_cd;
    j["candidates_evaluated"] = step.candidates_evaluated;
    j["converged"] = step.converged;
    out << j.dump() << '\n';
  }
}

std::string steps_jsonl(const std::vector<PlanStep>& steps) {
  std::ostringstream out;
  write_steps_jsonl(out, steps);
  return out.str();
}

}  // namespace clay
