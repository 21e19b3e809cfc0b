#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "laserpath/error.hpp"
#include "laserpath/io.hpp"
#include "laserpath/pipeline.hpp"

namespace fs = std::filesystem;
using namespace laserpath;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitStage = 3;
constexpr int kExitNoPath = 4;

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string start;
  std::string goal;
  bool no_embodiment = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_file, "key=value configuration file");
  cmd->add_option("--set", o.overrides, "override a configuration key (key=value)");
  cmd->add_option("--seed", o.seed, "seed for the synthetic scene and the consensus sampler");
  cmd->add_option("--out-dir", o.out_dir, "directory for output files");
  cmd->add_option("--start", o.start, "start cell as R,C");
  cmd->add_option("--goal", o.goal, "goal cell as R,C");
  cmd->add_flag("--no-embodiment", o.no_embodiment, "plan without inflation penalties");
}

PipelineConfig make_config(const CommonOptions& o) {
  PipelineConfig c = o.config_file.empty() ? PipelineConfig{} : load_config(o.config_file);
  apply_overrides(c, o.overrides);
  if (o.seed) {
    c.scene.seed = *o.seed;
    c.coarse.seed = *o.seed;
  }
  if (!o.start.empty()) c.start = parse_cell(o.start);
  if (!o.goal.empty()) c.goal = parse_cell(o.goal);
  if (o.no_embodiment) c.no_embodiment = true;
  c.validate();
  return c;
}

fs::path out_path(const CommonOptions& o, const std::string& name) {
  fs::create_directories(o.out_dir);
  return fs::path(o.out_dir) / name;
}

std::vector<PointCloud> load_scans(const std::vector<std::string>& files) {
  std::vector<PointCloud> scans;
  for (const auto& f : files) scans.push_back(load_cloud(f));
  return scans;
}

struct Inputs {
  std::vector<PointCloud> scans;
  PipelineOptions options;
};

// Scans from files, or a synthetic scene from the configuration when none are given.
Inputs gather_inputs(const PipelineConfig& config, const std::vector<std::string>& files) {
  Inputs in;
  if (!files.empty()) {
    in.scans = load_scans(files);
    return in;
  }
  Scene scene = generate_scene(random_scene_spec(config.scene));
  in.scans = std::move(scene.scans);
  in.options.ground_truth = std::move(scene.ground_truth);
  return in;
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

void write_plan_outputs(const CommonOptions& o, const CostField& field, const GridPath& path,
                        const std::string& report) {
  save_costfield_pgm(field, out_path(o, "costmap.pgm"));
  save_path_csv(path, out_path(o, "path.csv"));
  save_overlay_ppm(field, path, out_path(o, "overlay.ppm"));
  write_text(out_path(o, "report.txt"), report);
}

int cmd_synth(const CommonOptions& o) {
  const PipelineConfig config = make_config(o);
  const Scene scene = generate_scene(random_scene_spec(config.scene));
  for (std::size_t k = 0; k < scene.scans.size(); ++k) {
    save_cloud(scene.scans[k], out_path(o, "scan_" + std::to_string(k) + ".xyz"));
  }
  save_transforms(scene.ground_truth, out_path(o, "ground_truth.txt"));
  std::cout << "wrote " << scene.scans.size() << " scans to " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_register(const CommonOptions& o, const std::string& source_file,
                 const std::string& target_file) {
  const PipelineConfig config = make_config(o);
  const PointCloud source = load_cloud(source_file);
  const PointCloud target = load_cloud(target_file);
  const Registration reg =
      register_prepared(config, prepare_scan(config, source), prepare_scan(config, target));
  save_transforms({reg.transform}, out_path(o, "transform.txt"));
  save_cloud(apply_transform(source, reg.transform), out_path(o, "registered.xyz"));
  std::ostringstream report;
  report << "inlier_fraction=" << reg.coarse.inlier_fraction << "\n"
         << "correspondences=" << reg.coarse.correspondences << "\n"
         << "icp_iterations=" << reg.icp.iterations << "\n"
         << "icp_converged=" << (reg.icp.converged ? "true" : "false") << "\n"
         << "icp_rms=" << reg.icp.rms_residual << "\n"
         << "coarse_seconds=" << reg.coarse_seconds << "\n"
         << "icp_seconds=" << reg.icp_seconds << "\n";
  write_text(out_path(o, "report.txt"), report.str());
  std::cout << report.str();
  return kExitOk;
}

int cmd_map(const CommonOptions& o, const std::vector<std::string>& files,
            const std::string& transforms_file) {
  const PipelineConfig config = make_config(o);
  const std::vector<PointCloud> scans = load_scans(files);
  std::vector<RigidTransform> transforms;
  if (!transforms_file.empty()) {
    transforms = load_transforms(transforms_file);
  } else {
    transforms.assign(scans.size(), RigidTransform::identity());
    if (scans.size() > 1) {
      const PreparedScan target = prepare_scan(config, scans.front());
      for (std::size_t k = 1; k < scans.size(); ++k) {
        transforms[k] = register_prepared(config, prepare_scan(config, scans[k]), target).transform;
      }
    }
  }
  const MapProducts map = build_map(config, scans, transforms);
  const CostField field = build_costfield(config, map.occupancy);
  save_occupancy_pgm(map.occupancy, out_path(o, "occupancy.pgm"));
  save_grid_frame(map.occupancy.frame(), map.occupancy.width(), map.occupancy.height(),
                  out_path(o, "grid.txt"));
  save_costfield_pgm(field, out_path(o, "costmap.pgm"));
  save_transforms(transforms, out_path(o, "transforms.txt"));
  std::cout << "grid " << map.occupancy.width() << "x" << map.occupancy.height() << ", "
            << map.occupancy.occupied_count() << " occupied cells\n";
  return kExitOk;
}

int cmd_plan(const CommonOptions& o, const std::string& occupancy_file,
             const std::string& grid_file) {
  const PipelineConfig config = make_config(o);
  const OccupancyGrid grid = load_occupancy(occupancy_file, grid_file);
  const CostField field = build_costfield(config, grid);
  const auto [start, goal] = resolve_endpoints(config, grid.frame(), {});
  auto [path, state] = plan(field, start, goal);
  RunReport report;
  report.grid_width = field.width();
  report.grid_height = field.height();
  report.path_cost = path.total_cost;
  report.path_cells = path.vertices.size();
  write_plan_outputs(o, field, path, report.to_text());
  std::cout << "path with " << path.vertices.size() << " cells, cost " << path.total_cost << "\n";
  return kExitOk;
}

int cmd_pipeline(const CommonOptions& o, const std::vector<std::string>& files) {
  const PipelineConfig config = make_config(o);
  const Inputs in = gather_inputs(config, files);
  const PipelineResult r = run_pipeline(config, in.scans, in.options);
  write_plan_outputs(o, r.field, r.path, r.report.to_text());
  save_occupancy_pgm(r.map.occupancy, out_path(o, "occupancy.pgm"));
  save_grid_frame(r.map.occupancy.frame(), r.map.occupancy.width(), r.map.occupancy.height(),
                  out_path(o, "grid.txt"));
  save_transforms(r.transforms, out_path(o, "transforms.txt"));
  std::cout << r.report.to_text();
  return kExitOk;
}

std::vector<ScheduledScan> load_schedule(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read schedule " + file);
  const fs::path base = fs::path(file).parent_path();
  std::vector<ScheduledScan> schedule;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = line.substr(0, line.find('#'));
    std::istringstream fields(line);
    std::size_t trigger = 0;
    std::string scan;
    if (!(fields >> trigger)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw Error(ErrorCode::kParseError, "schedule line " + std::to_string(line_no) +
                                              ": expected 'trigger_index scan_file'");
    }
    if (!(fields >> scan)) {
      throw Error(ErrorCode::kParseError,
                  "schedule line " + std::to_string(line_no) + ": missing scan file");
    }
    const fs::path p = fs::path(scan).is_absolute() ? fs::path(scan) : base / scan;
    schedule.push_back({trigger, load_cloud(p), std::nullopt});
  }
  return schedule;
}

int cmd_simulate(const CommonOptions& o, const std::vector<std::string>& files,
                 const std::string& schedule_file) {
  const PipelineConfig config = make_config(o);
  const Inputs in = gather_inputs(config, files);
  const std::vector<ScheduledScan> schedule =
      schedule_file.empty() ? std::vector<ScheduledScan>{} : load_schedule(schedule_file);
  const auto steps = simulate_replanning(config, in.scans, schedule, in.options);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    save_path_csv(s.path, out_path(o, "path_" + std::to_string(i) + ".csv"));
    std::string text = s.report.to_text();
    text += "robot=" + std::to_string(s.robot.row) + "," + std::to_string(s.robot.col) + "\n";
    text += "changed_cells=" + std::to_string(s.changed_cells) + "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", s.fresh_cost);
    text += std::string("fresh_cost=") + buf + "\n";
    write_text(out_path(o, "report_" + std::to_string(i) + ".txt"), text);
    std::cout << "step " << i << ": " << s.path.vertices.size() << " cells, cost "
              << s.path.total_cost << ", fresh " << s.fresh_cost << ", changed "
              << s.changed_cells << "\n";
  }
  return kExitOk;
}

int cmd_bench(const CommonOptions& o, const std::vector<std::string>& files, std::size_t reps) {
  const PipelineConfig config = make_config(o);
  const Inputs in = gather_inputs(config, files);
  const BenchmarkTable table = benchmark(config, in.scans, reps, in.options);
  write_text(out_path(o, "bench.txt"), table.to_text());
  std::cout << table.to_text();
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kNoPath:
      return kExitNoPath;
    case ErrorCode::kConfigError:
    case ErrorCode::kParseError:
    case ErrorCode::kEmptyFile:
    case ErrorCode::kIoError:
      return dynamic_cast<const StageError*>(&e) ? kExitStage : kExitInput;
    default:
      return kExitStage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Registration, mapping and embodiment-aware planning on point clouds"};
  app.require_subcommand(1);

  CommonOptions common;
  std::vector<std::string> scans;
  std::string source;
  std::string target;
  std::string transforms_file;
  std::string occupancy_file;
  std::string grid_file;
  std::string schedule_file;
  std::size_t reps = 5;

  auto* synth = app.add_subcommand("synth", "write a seeded synthetic scene");
  add_common(synth, common);

  auto* reg = app.add_subcommand("register", "register SOURCE onto TARGET");
  add_common(reg, common);
  reg->add_option("source", source, "source cloud")->required();
  reg->add_option("target", target, "target cloud")->required();

  auto* map = app.add_subcommand("map", "merge scans into an occupancy grid and cost map");
  add_common(map, common);
  map->add_option("scans", scans, "clouds; the first one defines the map frame")->required();
  map->add_option("--transforms", transforms_file, "scan-to-first transforms (skips registration)");

  auto* pl = app.add_subcommand("plan", "plan on a saved occupancy grid");
  add_common(pl, common);
  pl->add_option("--occupancy", occupancy_file, "occupancy PGM")->required();
  pl->add_option("--grid", grid_file, "grid frame file written by 'map'")->required();

  auto* pipe = app.add_subcommand("pipeline", "register, map, inflate and plan");
  add_common(pipe, common);
  pipe->add_option("scans", scans, "clouds (a synthetic scene is generated when omitted)");

  auto* sim = app.add_subcommand("simulate", "replanning along a schedule of new scans");
  add_common(sim, common);
  sim->add_option("scans", scans, "initial clouds (synthetic when omitted)");
  sim->add_option("--schedule", schedule_file, "lines of 'trigger_index scan_file'");

  auto* bench = app.add_subcommand("bench", "stage timing table over repeated runs");
  add_common(bench, common);
  bench->add_option("scans", scans, "clouds (synthetic when omitted)");
  bench->add_option("--reps", reps, "repetitions")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (synth->parsed()) return cmd_synth(common);
    if (reg->parsed()) return cmd_register(common, source, target);
    if (map->parsed()) return cmd_map(common, scans, transforms_file);
    if (pl->parsed()) return cmd_plan(common, occupancy_file, grid_file);
    if (pipe->parsed()) return cmd_pipeline(common, scans);
    if (sim->parsed()) return cmd_simulate(common, scans, schedule_file);
    if (bench->parsed()) return cmd_bench(common, scans, reps);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return kExitOk;
}
