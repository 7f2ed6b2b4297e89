#pragma once

#include <clay/grasp.hpp>
#include <clay/sampler.hpp>
#include <clay/types.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace clay {

/// Rolls one action on a state cloud. Used both as the planner's predictive
/// model and as the environment stepper, so horizons deeper than one step
/// stay possible by chaining.
using DynamicsFn = std::function<PointCloud(const PointCloud&, const GraspAction&)>;

/// apply_grasp with fixed gripper and constraints.
DynamicsFn make_grasp_dynamics(const GripperModel& gripper, const GraspConstraints& constraints);

enum class SamplerKind { geometric, random };

struct PlannerConfig {
  SamplerKind sampler = SamplerKind::geometric;
  SamplerConfig sampler_config;
  Index max_grasps = 10;
  double cd_stop_threshold = 0.0;  // <= 0 resolves to 2% of the initial cd
  bool include_noop = true;
  std::uint64_t seed = 0;
  int threads = 1;  // candidate evaluation fan-out; argmin is index-ordered

  bool valid() const { return max_grasps >= 1 && threads >= 1; }
};

struct PlanStep {
  Index step = 0;
  GraspAction action;
  PointCloud predicted;
  PointCloud realized;
  double predicted_cd = 0.0;
  double realized_cd = 0.0;
  Index candidates_evaluated = 0;
  double wall_time = 0.0;  // seconds; excluded from serialized step logs
  bool converged = false;  // sampler found nothing left to push
};

struct CandidateChoice {
  GraspAction action;
  PointCloud predicted;
  double predicted_cd = 0.0;
  std::size_t index = 0;  // position in the evaluated list
};

/// Rolls dynamics on every action, scores the Chamfer distance of each
/// prediction to the target, and returns the argmin with ties broken by
/// lowest action index. Evaluation may fan out over threads; the reduction
/// is an index-ordered argmin either way.
CandidateChoice evaluate_candidates(const PointCloud& state, const PointCloud& target,
                                    const std::vector<GraspAction>& actions,
                                    const DynamicsFn& dynamics, int threads = 1);

/// Samples candidates per cfg (plus the no-op when include_noop), evaluates
/// them, and returns the winning step. The realized fields stay empty for
/// the caller to fill after execution. The geometric sampler's convergence
/// signal yields a terminal step flagged converged with zero candidates.
/// step_index seeds the per-step sampler stream.
PlanStep plan_step(const PointCloud& state, const PointCloud& target, const PlannerConfig& cfg,
                   const DynamicsFn& dynamics, Index step_index = 0);

/// Greedy closed loop: plan_step, execute on the environment, update state;
/// stops on convergence, on realized cd below the stop threshold, or after
/// max_grasps environment calls. An environment failure returns the partial
/// log. Step logs carry both predicted and realized clouds.
std::vector<PlanStep> run_sculpt_loop(const PointCloud& initial, const PointCloud& target,
                                      const PlannerConfig& cfg, const DynamicsFn& dynamics,
                                      const DynamicsFn& environment);

/// One JSON object per step: step, action, predicted_cd, realized_cd,
/// candidates_evaluated, converged. Clouds and wall_time are omitted, so
/// logs of identical runs are byte-identical.
void write_steps_jsonl(std::ostream& out, const std::vector<PlanStep>& steps);
std::string steps_jsonl(const std::vector<PlanStep>& steps);

}  // namespace clay
