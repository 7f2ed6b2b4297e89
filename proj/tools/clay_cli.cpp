// clay: command-line front end for the sculpting toolkit. Subcommands:
//   calibrate    recover camera extrinsics from scans of a reference object
//   preprocess   raw scan PLY (+ labels) -> clean fixed-size shell PLY
//   step         apply one grasp action from a JSONL file to a cloud
//   sculpt       closed-loop greedy MPC against the built-in simulator
//   eval         chamfer metrics for a cloud pair, or run-directory reports
//   gen-targets  write the procedural target library as PLY files
//   scan         emit synthetic multi-view scans for the registration demo
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#include <clay/config.hpp>
#include <clay/grasp.hpp>
#include <clay/io.hpp>
#include <clay/metrics.hpp>
#include <clay/planner.hpp>
#include <clay/preprocess.hpp>
#include <clay/registration.hpp>
#include <clay/rng.hpp>
#include <clay/sampler.hpp>
#include <clay/sim.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace clay;

namespace {

constexpr const char* kBuiltinPrefix = "builtin:";

std::string fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string());
}

/// "builtin:<shape>" resolves through the procedural generators; anything
/// else is a PLY path.
PointCloud load_cloud_arg(const std::string& arg, Index n, std::uint64_t seed) {
  if (arg.rfind(kBuiltinPrefix, 0) == 0) {
    const std::string name = arg.substr(std::string(kBuiltinPrefix).size());
    if (name == "cylinder") return make_initial_clay(n, seed);
    return make_target(name, n, seed).cloud;
  }
  return read_ply(arg);
}

GripperModel gripper_from_config(const KeyValueConfig& cfg) {
  GripperModel g;
  g.finger_width = cfg.get_double("finger_width", g.finger_width);
  g.finger_height = cfg.get_double("finger_height", g.finger_height);
  g.finger_thickness = cfg.get_double("finger_thickness", g.finger_thickness);
  g.max_open = cfg.get_double("max_open", g.max_open);
  g.min_close = cfg.get_double("min_close", g.min_close);
  if (!g.valid()) throw InvalidInputError("config: invalid gripper dimensions");
  return g;
}

GraspConstraints constraints_from_config(const KeyValueConfig& cfg) {
  GraspConstraints c;
  c.max_stretch = cfg.get_double("max_stretch", c.max_stretch);
  c.k_neighbors = cfg.get_index("k_neighbors", c.k_neighbors);
  c.max_sweeps = static_cast<int>(cfg.get_index("max_sweeps", c.max_sweeps));
  return c;
}

void echo_gripper(std::map<std::string, std::string>& resolved, const GripperModel& g,
                  const GraspConstraints& c) {
  resolved["finger_width"] = fmt(g.finger_width);
  resolved["finger_height"] = fmt(g.finger_height);
  resolved["finger_thickness"] = fmt(g.finger_thickness);
  resolved["max_open"] = fmt(g.max_open);
  resolved["min_close"] = fmt(g.min_close);
  resolved["max_stretch"] = fmt(c.max_stretch);
  resolved["k_neighbors"] = std::to_string(c.k_neighbors);
  resolved["max_sweeps"] = std::to_string(c.max_sweeps);
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string reference;
  std::vector<std::string> scans;
  std::vector<std::string> labels;
  std::string init;
  std::string config;
  std::string out = "extrinsics.txt";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_calibrate(const CalibrateArgs& args) {
  KeyValueConfig cfg;
  if (!args.config.empty()) cfg = KeyValueConfig::from_file(args.config);
  cfg.require_known({"seed", "ransac_iterations", "inlier_threshold", "icp_max_iters",
                     "icp_tol", "max_correspondence_dist"});

  RansacParams rp;
  rp.iterations = static_cast<int>(cfg.get_index("ransac_iterations", rp.iterations));
  rp.inlier_threshold = cfg.get_double("inlier_threshold", rp.inlier_threshold);
  rp.seed = args.seed_set ? args.seed : cfg.get_uint64("seed", 0);
  IcpParams ip;
  ip.max_iters = static_cast<int>(cfg.get_index("icp_max_iters", ip.max_iters));
  ip.convergence_tol = cfg.get_double("icp_tol", ip.convergence_tol);
  ip.max_correspondence_dist =
      cfg.get_double("max_correspondence_dist", ip.max_correspondence_dist);

  if (!args.labels.empty() && args.labels.size() != args.scans.size())
    throw InvalidInputError("calibrate: --labels count must match --scans count");

  const PointCloud reference = read_ply(args.reference);
  std::vector<PointCloud> scans;
  scans.reserve(args.scans.size());
  for (std::size_t k = 0; k < args.scans.size(); ++k) {
    PointCloud scan = read_ply(args.scans[k]);
    if (!args.labels.empty()) {
      RawScan raw;
      raw.cloud = std::move(scan);
      raw.labels = read_labels_file(args.labels[k]);
      if (raw.labels.size() != static_cast<std::size_t>(raw.cloud.size()))
        throw InvalidInputError("calibrate: label count does not match " + args.scans[k]);
      scan = isolate_clay(raw);
      scan.frame = raw.cloud.frame;
    }
    scans.push_back(std::move(scan));
  }

  std::optional<std::vector<RigidTransform>> inits;
  if (!args.init.empty()) {
    const auto named = read_extrinsics(args.init);
    std::vector<RigidTransform> ordered;
    for (const PointCloud& scan : scans) {
      const auto it = std::find_if(named.begin(), named.end(),
                                   [&](const auto& np) { return np.first == scan.frame; });
      if (it == named.end())
        throw InvalidInputError("calibrate: no initial pose for frame '" + scan.frame + "'");
      ordered.push_back(it->second);
    }
    inits = std::move(ordered);
  }

  const std::vector<RegistrationResult> results =
      calibrate_views(scans, reference, inits ? &*inits : nullptr, rp, ip);

  std::vector<std::pair<std::string, RigidTransform>> poses;
  for (std::size_t k = 0; k < results.size(); ++k) {
    poses.emplace_back(scans[k].frame, results[k].transform);
    std::cout << scans[k].frame << ": rms " << fmt(results[k].rms_error) << " m over "
              << results[k].inlier_count << " matches\n";
  }
  write_extrinsics(args.out, poses);

  std::map<std::string, std::string> resolved;
  resolved["ransac_iterations"] = std::to_string(rp.iterations);
  resolved["inlier_threshold"] = fmt(rp.inlier_threshold);
  resolved["icp_max_iters"] = std::to_string(ip.max_iters);
  resolved["icp_tol"] = fmt(ip.convergence_tol);
  resolved["max_correspondence_dist"] = fmt(ip.max_correspondence_dist);
  resolved["seed"] = std::to_string(rp.seed);
  write_resolved_config(args.out + ".resolved_config", resolved);
  return 0;
}

// --------------------------------------------------------------- preprocess

struct PreprocessArgs {
  std::string in;
  std::string labels;
  std::string config;
  std::string out = "shell.ply";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_preprocess(const PreprocessArgs& args) {
  KeyValueConfig cfg;
  if (!args.config.empty()) cfg = KeyValueConfig::from_file(args.config);
  cfg.require_known(
      {"bounds", "n", "base_band", "grid_step", "k_neighbors", "std_ratio", "seed"});

  PreprocessConfig pc;
  pc.bounds = cfg.get_bounds("bounds", pc.bounds);
  pc.n = cfg.get_index("n", pc.n);
  pc.base_band = cfg.get_double("base_band", pc.base_band);
  pc.grid_step = cfg.get_double("grid_step", pc.grid_step);
  pc.k_neighbors = cfg.get_index("k_neighbors", pc.k_neighbors);
  pc.std_ratio = cfg.get_double("std_ratio", pc.std_ratio);
  pc.seed = args.seed_set ? args.seed : cfg.get_uint64("seed", 0);

  RawScan scan;
  scan.cloud = read_ply(args.in);
  if (!args.labels.empty()) {
    scan.labels = read_labels_file(args.labels);
    if (scan.labels.size() != static_cast<std::size_t>(scan.cloud.size()))
      throw InvalidInputError("preprocess: label count does not match point count");
  } else {
    scan.labels.assign(static_cast<std::size_t>(scan.cloud.size()), Label::clay);
  }

  const ClayShell shell = preprocess_pipeline(scan, pc);
  write_ply(args.out, shell.cloud);
  std::cout << "shell: " << shell.cloud.size() << " points, base_z " << fmt(shell.base_z)
            << "\n";

  std::map<std::string, std::string> resolved;
  resolved["bounds"] = format_bounds(pc.bounds);
  resolved["n"] = std::to_string(pc.n);
  resolved["base_band"] = fmt(pc.base_band);
  resolved["grid_step"] = fmt(pc.grid_step);
  resolved["k_neighbors"] = std::to_string(pc.k_neighbors);
  resolved["std_ratio"] = fmt(pc.std_ratio);
  resolved["seed"] = std::to_string(pc.seed);
  write_resolved_config(args.out + ".resolved_config", resolved);
  return 0;
}

// --------------------------------------------------------------------- step

struct StepArgs {
  std::string in;
  std::string actions;
  std::size_t index = 0;
  std::string config;
  std::string out = "stepped.ply";
};

int run_step(const StepArgs& args) {
  KeyValueConfig cfg;
  if (!args.config.empty()) cfg = KeyValueConfig::from_file(args.config);
  cfg.require_known({"finger_width", "finger_height", "finger_thickness", "max_open",
                     "min_close", "max_stretch", "k_neighbors", "max_sweeps"});

  const GripperModel gripper = gripper_from_config(cfg);
  const GraspConstraints constraints = constraints_from_config(cfg);

  const PointCloud cloud = read_ply(args.in);
  const std::vector<GraspAction> actions = read_actions_jsonl_file(args.actions);
  if (args.index >= actions.size())
    throw InvalidInputError("step: action index " + std::to_string(args.index) +
                            " out of range (file has " + std::to_string(actions.size()) +
                            " actions)");

  const PointCloud result = apply_grasp(cloud, actions[args.index], gripper, constraints);
  write_ply(args.out, result);

  std::map<std::string, std::string> resolved;
  echo_gripper(resolved, gripper, constraints);
  resolved["index"] = std::to_string(args.index);
  write_resolved_config(args.out + ".resolved_config", resolved);
  return 0;
}

// ------------------------------------------------------------------- sculpt

struct SculptArgs {
  std::string target;
  std::string init = "builtin:cylinder";
  std::string sampler;
  Index samples = -1;
  Index max_grasps = -1;
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool no_snapshots = false;
};

int run_sculpt(const SculptArgs& args) {
  KeyValueConfig cfg;
  if (!args.config.empty()) cfg = KeyValueConfig::from_file(args.config);
  cfg.require_known({"sampler", "samples", "n_clusters", "max_grasps", "cd_stop_threshold",
                     "include_noop", "bounds", "threads", "n", "seed", "noise_sigma",
                     "reshell", "finger_width", "finger_height", "finger_thickness",
                     "max_open", "min_close", "max_stretch", "k_neighbors", "max_sweeps",
                     "snapshots"});

  const std::uint64_t seed = args.seed_set ? args.seed : cfg.get_uint64("seed", 0);
  const Index n = cfg.get_index("n", 2048);
  const GripperModel gripper = gripper_from_config(cfg);
  GraspConstraints constraints = constraints_from_config(cfg);

  const std::string sampler_name =
      !args.sampler.empty() ? args.sampler : cfg.get_string("sampler", "geometric");
  if (sampler_name != "geometric" && sampler_name != "random")
    throw InvalidInputError("sculpt: sampler must be 'geometric' or 'random'");

  PlannerConfig pc;
  pc.sampler = sampler_name == "geometric" ? SamplerKind::geometric : SamplerKind::random;
  pc.sampler_config.n_clusters = cfg.get_index("n_clusters", pc.sampler_config.n_clusters);
  pc.sampler_config.n_samples = args.samples >= 0
                                    ? args.samples
                                    : cfg.get_index("samples", pc.sampler_config.n_samples);
  pc.sampler_config.bounds = cfg.get_bounds("bounds", pc.sampler_config.bounds);
  pc.sampler_config.gripper = gripper;
  pc.max_grasps = args.max_grasps >= 0 ? args.max_grasps : cfg.get_index("max_grasps", 10);
  pc.cd_stop_threshold = cfg.get_double("cd_stop_threshold", 0.0);
  pc.include_noop = cfg.get_bool("include_noop", true);
  pc.threads = static_cast<int>(cfg.get_index("threads", 1));
  pc.seed = stage_seed(seed, "planner");

  EnvConfig env;
  env.noise_sigma = cfg.get_double("noise_sigma", 0.0);
  env.reshell = cfg.get_bool("reshell", false);
  env.gripper = gripper;

  const bool snapshots = args.no_snapshots ? false : cfg.get_bool("snapshots", true);

  const auto start = std::chrono::steady_clock::now();
  const PointCloud initial = load_cloud_arg(args.init, n, stage_seed(seed, "init"));
  const PointCloud target = load_cloud_arg(args.target, n, stage_seed(seed, "target"));

  // Resolve the stretch bound once against the starting clay so every
  // planner rollout and environment step shares the same constraint.
  constraints = resolved_constraints(constraints, initial);
  env.constraints = constraints;
  const DynamicsFn dynamics = make_grasp_dynamics(gripper, constraints);

  Index env_calls = 0;
  const DynamicsFn environment = [&env, &seed, &env_calls](const PointCloud& state,
                                                           const GraspAction& action) {
    EnvConfig step_env = env;
    step_env.seed = stage_seed(seed, "env", static_cast<std::uint64_t>(env_calls++));
    return env_step(state, action, step_env);
  };

  const std::vector<PlanStep> log = run_sculpt_loop(initial, target, pc, dynamics, environment);
  const double wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                         start)
                               .count();

  ensure_dir(args.out);
  const fs::path out_dir(args.out);

  {
    std::ofstream steps(out_dir / "steps.jsonl");
    if (!steps) throw std::runtime_error("cannot write steps.jsonl");
    write_steps_jsonl(steps, log);
  }

  if (snapshots) {
    write_ply(out_dir / "initial.ply", initial);
    write_ply(out_dir / "target.ply", target);
    char name[32];
    for (const PlanStep& step : log) {
      if (step.converged) continue;
      std::snprintf(name, sizeof(name), "step_%02d.ply", static_cast<int>(step.step));
      write_ply(out_dir / name, step.realized);
    }
  }

  const double initial_cd = chamfer_distance(initial, target);
  const PointCloud& final_cloud = log.empty() ? initial : log.back().realized;
  write_ply(out_dir / "final.ply", final_cloud);
  const double final_cd = chamfer_distance(final_cloud, target);

  Index grasps = 0;
  for (const PlanStep& step : log) grasps += step.converged ? 0 : 1;

  ordered_json metrics;
  metrics["target"] = args.target;
  metrics["init"] = args.init;
  metrics["sampler"] = sampler_name;
  metrics["seed"] = seed;
  metrics["grasps"] = grasps;
  metrics["initial_cd"] = initial_cd;
  metrics["final_cd"] = final_cd;
  metrics["final_cd_mean"] = chamfer_mean(final_cloud, target);
  metrics["converged"] = !log.empty() && log.back().converged;
  metrics["wall_time_seconds"] = wall_time;
  {
    std::ofstream mf(out_dir / "metrics.json");
    if (!mf) throw std::runtime_error("cannot write metrics.json");
    mf << metrics.dump(2) << '\n';
  }

  std::map<std::string, std::string> resolved;
  echo_gripper(resolved, gripper, constraints);
  resolved["sampler"] = sampler_name;
  resolved["samples"] = std::to_string(pc.sampler_config.n_samples);
  resolved["n_clusters"] = std::to_string(pc.sampler_config.n_clusters);
  resolved["max_grasps"] = std::to_string(pc.max_grasps);
  resolved["cd_stop_threshold"] = fmt(pc.cd_stop_threshold);
  resolved["include_noop"] = pc.include_noop ? "true" : "false";
  resolved["bounds"] = format_bounds(pc.sampler_config.bounds);
  resolved["threads"] = std::to_string(pc.threads);
  resolved["n"] = std::to_string(n);
  resolved["seed"] = std::to_string(seed);
  resolved["noise_sigma"] = fmt(env.noise_sigma);
  resolved["reshell"] = env.reshell ? "true" : "false";
  resolved["snapshots"] = snapshots ? "true" : "false";
  resolved["target"] = args.target;
  resolved["init"] = args.init;
  write_resolved_config(out_dir / "resolved_config", resolved);

  std::cout << "steps " << log.size() << ", grasps " << grasps << ", cd " << fmt(initial_cd)
            << " -> " << fmt(final_cd) << ", wall " << fmt(wall_time) << " s\n";
  return 0;
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
  std::string a;
  std::string b;
  std::vector<std::string> runs;
  std::string out;
};

struct RunRecord {
  std::string dir;
  std::string sampler;
  std::string target;
  std::uint64_t seed = 0;
  Index grasps = 0;
  double initial_cd = 0.0;
  double final_cd = 0.0;
  double wall_time = 0.0;
  std::vector<double> cd_series;
};

RunRecord load_run(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream mf(base / "metrics.json");
  if (!mf) throw std::runtime_error("eval: missing metrics.json in " + dir);
  ordered_json metrics;
  try {
    mf >> metrics;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("eval: malformed metrics.json in " + dir + ": " + e.what());
  }

  RunRecord rec;
  rec.dir = dir;
  try {
    rec.sampler = metrics.at("sampler").get<std::string>();
    rec.target = metrics.at("target").get<std::string>();
    rec.seed = metrics.at("seed").get<std::uint64_t>();
    rec.grasps = metrics.at("grasps").get<Index>();
    rec.initial_cd = metrics.at("initial_cd").get<double>();
    rec.final_cd = metrics.at("final_cd").get<double>();
    rec.wall_time = metrics.at("wall_time_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("eval: malformed metrics.json in " + dir + ": " + e.what());
  }

  std::ifstream sf(base / "steps.jsonl");
  if (!sf) throw std::runtime_error("eval: missing steps.jsonl in " + dir);
  std::string line;
  while (std::getline(sf, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      rec.cd_series.push_back(j.at("realized_cd").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("eval: malformed steps.jsonl in " + dir + ": " + e.what());
    }
  }
  return rec;
}

int run_eval(const EvalArgs& args) {
  if (!args.a.empty() || !args.b.empty()) {
    if (args.a.empty() || args.b.empty())
      throw InvalidInputError("eval: --a and --b must be given together");
    const PointCloud a = read_ply(args.a);
    const PointCloud b = read_ply(args.b);
    std::cout << "chamfer_distance: " << fmt(chamfer_distance(a, b)) << '\n'
              << "chamfer_mean: " << fmt(chamfer_mean(a, b)) << '\n';
    return 0;
  }
  if (args.runs.empty())
    throw InvalidInputError("eval: provide --a/--b or at least one --runs directory");

  std::vector<RunRecord> records;
  records.reserve(args.runs.size());
  for (const std::string& dir : args.runs) records.push_back(load_run(dir));

  // Per-run rows.
  std::printf("%-24s %-9s %-16s %6s %7s %12s %12s %9s\n", "run", "sampler", "target", "seed",
              "grasps", "initial_cd", "final_cd", "wall_s");
  for (const RunRecord& rec : records) {
    std::printf("%-24s %-9s %-16s %6llu %7lld %12.6g %12.6g %9.3g\n", rec.dir.c_str(),
                rec.sampler.c_str(), rec.target.c_str(),
                static_cast<unsigned long long>(rec.seed),
                static_cast<long long>(rec.grasps), rec.initial_cd, rec.final_cd,
                rec.wall_time);
  }

  // Aggregate mean +/- std per (sampler, target) group.
  std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> groups;
  for (const RunRecord& rec : records) groups[{rec.sampler, rec.target}].push_back(&rec);

  const auto mean_std = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::make_pair(mean, std::sqrt(var / static_cast<double>(xs.size())));
  };

  std::printf("\n%-9s %-16s %5s %18s %26s\n", "sampler", "target", "runs", "grasps",
              "final_cd");
  for (const auto& [key, members] : groups) {
    std::vector<double> grasps, cds;
    for (const RunRecord* rec : members) {
      grasps.push_back(static_cast<double>(rec->grasps));
      cds.push_back(rec->final_cd);
    }
    const auto [gm, gs] = mean_std(grasps);
    const auto [cm, cs] = mean_std(cds);
    std::printf("%-9s %-16s %5zu %10.2f +/- %5.2f %16.6g +/- %.6g\n", key.first.c_str(),
                key.second.c_str(), members.size(), gm, gs, cm, cs);
  }

  if (!args.out.empty()) {
    std::ofstream csv(args.out);
    if (!csv) throw std::runtime_error("eval: cannot write " + args.out);
    csv << "run,sampler,target,seed,grasps,initial_cd,final_cd,wall_time_seconds,cd_series\n";
    for (const RunRecord& rec : records) {
      csv << rec.dir << ',' << rec.sampler << ',' << rec.target << ',' << rec.seed << ','
          << rec.grasps << ',' << fmt(rec.initial_cd) << ',' << fmt(rec.final_cd) << ','
          << fmt(rec.wall_time) << ',';
      for (std::size_t i = 0; i < rec.cd_series.size(); ++i) {
        csv << (i ? ";" : "") << fmt(rec.cd_series[i]);
      }
      csv << '\n';
    }
  }
  return 0;
}

// -------------------------------------------------------------- gen-targets

struct GenTargetsArgs {
  std::string out = "targets";
  Index n = 2048;
  std::uint64_t seed = 0;
};

int run_gen_targets(const GenTargetsArgs& args) {
  ensure_dir(args.out);
  const fs::path out_dir(args.out);
  for (const std::string& name : target_names()) {
    const TargetShape shape = make_target(name, args.n, stage_seed(args.seed, name));
    write_ply(out_dir / (name + ".ply"), shape.cloud);
    std::cout << name << ": " << shape.cloud.size() << " points\n";
  }

  std::map<std::string, std::string> resolved;
  resolved["n"] = std::to_string(args.n);
  resolved["seed"] = std::to_string(args.seed);
  write_resolved_config(out_dir / "resolved_config", resolved);
  return 0;
}

// --------------------------------------------------------------------- scan

struct ScanArgs {
  std::string out = "scans";
  std::string object = "builtin:plate";
  Index n = 2048;
  int cameras = 4;
  double noise = 0.001;
  double radius = 0.25;
  double height = 0.06;
  Index n_stage = 256;
  Index n_table = 256;
  std::uint64_t seed = 0;
};

int run_scan(const ScanArgs& args) {
  PointCloud object;
  if (args.object == "builtin:plate") {
    object = make_registration_object(args.n, stage_seed(args.seed, "object"));
  } else {
    object = load_cloud_arg(args.object, args.n, stage_seed(args.seed, "object"));
  }

  const std::vector<RigidTransform> cameras =
      ring_cameras(args.cameras, args.radius, args.height, object.centroid());
  const std::vector<RawScan> scans =
      synth_scan(object, cameras, args.noise, stage_seed(args.seed, "scan"), args.n_stage,
                 args.n_table);

  ensure_dir(args.out);
  const fs::path out_dir(args.out);
  write_ply(out_dir / "object.ply", object);

  std::vector<std::pair<std::string, RigidTransform>> gt;
  std::vector<std::pair<std::string, RigidTransform>> init;
  for (std::size_t k = 0; k < scans.size(); ++k) {
    const std::string stem = "scan" + std::to_string(k);
    write_ply(out_dir / (stem + ".ply"), scans[k].cloud);
    write_labels_file((out_dir / (stem + "_labels.csv")).string(), scans[k].labels);
    gt.emplace_back(scans[k].cloud.frame, cameras[k]);
    // Hand-measured-style approximate poses for seeding calibrate --init.
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    init.emplace_back(scans[k].cloud.frame,
                      perturb_pose(cameras[k], 10.0 * kDeg, 0.03,
                                   stage_seed(args.seed, "perturb", k)));
  }
  write_extrinsics(out_dir / "gt_extrinsics.txt", gt);
  write_extrinsics(out_dir / "init_extrinsics.txt", init);
  std::cout << scans.size() << " scans written to " << args.out << '\n';

  std::map<std::string, std::string> resolved;
  resolved["object"] = args.object;
  resolved["n"] = std::to_string(args.n);
  resolved["cameras"] = std::to_string(args.cameras);
  resolved["noise"] = fmt(args.noise);
  resolved["radius"] = fmt(args.radius);
  resolved["height"] = fmt(args.height);
  resolved["n_stage"] = std::to_string(args.n_stage);
  resolved["n_table"] = std::to_string(args.n_table);
  resolved["seed"] = std::to_string(args.seed);
  write_resolved_config(out_dir / "resolved_config", resolved);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clay: grasp-based point-cloud sculpting toolkit"};
  app.require_subcommand(1);

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Recover camera extrinsics from scans");
  calibrate->add_option("--reference", cal.reference, "reference object PLY (world frame)")
      ->required();
  calibrate->add_option("--scans", cal.scans, "per-camera scan PLY files")
      ->required()
      ->expected(-1);
  calibrate->add_option("--labels", cal.labels, "per-scan label CSVs; keeps clay points")
      ->expected(-1);
  calibrate->add_option("--init", cal.init, "approximate extrinsics file (pre-aligns scans)");
  calibrate->add_option("--config", cal.config, "key=value config file");
  calibrate->add_option("--out", cal.out, "output extrinsics file");
  calibrate->add_option("--seed", cal.seed, "run seed")->each([&cal](const std::string&) {
    cal.seed_set = true;
  });

  PreprocessArgs pre;
  auto* preprocess = app.add_subcommand("preprocess", "Raw scan to clean clay shell");
  preprocess->add_option("--in", pre.in, "input scan PLY")->required();
  preprocess->add_option("--labels", pre.labels, "per-point label CSV (default: all clay)");
  preprocess->add_option("--config", pre.config, "key=value config file");
  preprocess->add_option("--out", pre.out, "output shell PLY");
  preprocess->add_option("--seed", pre.seed, "run seed")->each([&pre](const std::string&) {
    pre.seed_set = true;
  });

  StepArgs step;
  auto* step_cmd = app.add_subcommand("step", "Apply one grasp action to a cloud");
  step_cmd->add_option("--in", step.in, "input cloud PLY")->required();
  step_cmd->add_option("--actions", step.actions, "JSONL action file")->required();
  step_cmd->add_option("--index", step.index, "action line to apply (0-based)");
  step_cmd->add_option("--config", step.config, "key=value config file");
  step_cmd->add_option("--out", step.out, "output cloud PLY");

  SculptArgs sc;
  auto* sculpt = app.add_subcommand("sculpt", "Closed-loop MPC sculpting in the simulator");
  sculpt->add_option("--target", sc.target, "target PLY or builtin:<shape>")->required();
  sculpt->add_option("--init", sc.init, "initial clay PLY or builtin:cylinder");
  sculpt->add_option("--sampler", sc.sampler, "geometric | random");
  sculpt->add_option("--samples", sc.samples, "candidate actions per step");
  sculpt->add_option("--max-grasps", sc.max_grasps, "grasp budget");
  sculpt->add_option("--config", sc.config, "key=value config file");
  sculpt->add_option("--out", sc.out, "output directory");
  sculpt->add_option("--seed", sc.seed, "run seed")->each([&sc](const std::string&) {
    sc.seed_set = true;
  });
  sculpt->add_flag("--no-snapshots", sc.no_snapshots, "skip per-step PLY snapshots");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Chamfer metrics and run reports");
  eval->add_option("--a", ev.a, "first cloud PLY");
  eval->add_option("--b", ev.b, "second cloud PLY");
  eval->add_option("--runs", ev.runs, "sculpt run directories")->expected(-1);
  eval->add_option("--out", ev.out, "summary CSV path");

  GenTargetsArgs gt;
  auto* gen = app.add_subcommand("gen-targets", "Write the procedural target library");
  gen->add_option("--out", gt.out, "output directory");
  gen->add_option("--n", gt.n, "points per target");
  gen->add_option("--seed", gt.seed, "run seed");

  ScanArgs scan;
  auto* scan_cmd = app.add_subcommand("scan", "Emit synthetic multi-view scans");
  scan_cmd->add_option("--out", scan.out, "output directory");
  scan_cmd->add_option("--object", scan.object, "builtin:plate, builtin:<shape>, or PLY");
  scan_cmd->add_option("--n", scan.n, "object point count");
  scan_cmd->add_option("--cameras", scan.cameras, "camera count");
  scan_cmd->add_option("--noise", scan.noise, "sensor noise sigma (m)");
  scan_cmd->add_option("--radius", scan.radius, "camera ring radius (m)");
  scan_cmd->add_option("--height", scan.height, "camera ring height (m)");
  scan_cmd->add_option("--stage-points", scan.n_stage, "stage points per scan");
  scan_cmd->add_option("--table-points", scan.n_table, "table points per scan");
  scan_cmd->add_option("--seed", scan.seed, "run seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (*calibrate) return run_calibrate(cal);
    if (*preprocess) return run_preprocess(pre);
    if (*step_cmd) return run_step(step);
    if (*sculpt) return run_sculpt(sc);
    if (*eval) return run_eval(ev);
    if (*gen) return run_gen_targets(gt);
    if (*scan_cmd) return run_scan(scan);
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
