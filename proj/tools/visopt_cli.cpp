// Command-line front end: scenario generation, visibility matrices, both
// optimizers, evaluation reports, baselines, and cloud export.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "visopt/diffvis.hpp"
#include "visopt/errors.hpp"
#include "visopt/eval.hpp"
#include "visopt/framegen.hpp"
#include "visopt/gdopt.hpp"
#include "visopt/io.hpp"
#include "visopt/ipopt.hpp"
#include "visopt/raster.hpp"
#include "visopt/scene.hpp"

namespace fs = std::filesystem;
using namespace visopt;

namespace {

struct Global {
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 0;  // 0: one per hardware thread
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? int(hw) : 1;
}

std::string out_path(const Global& g, const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? name : (fs::path(g.out_dir) / p).string();
}

io::AppConfig app_config(const Global& g) {
  return g.config.empty() ? io::AppConfig{} : io::load_app_config(g.config);
}

// ---------------------------------------------------------------- generate

struct GenerateOpts {
  std::string spec;
  std::string out = "scenario.json";
};

void run_generate(const Global& g, const GenerateOpts& o) {
  const io::GeneratorSpec spec = io::load_generator_spec(o.spec);
  Scenario sc;
  sc.environment = spec.environment;
  sc.rails = spec.rails;
  if (spec.has_focus) sc.focus_point = spec.focus_point;
  sc.frames = generate_frames(spec.generator, g.seed);
  std::size_t objects = 0;
  for (const Frame& f : sc.frames) objects += f.objects.size();
  const std::string path = out_path(g, o.out);
  io::save_scenario(sc, path);
  std::cout << "wrote " << path << " (" << sc.frames.size() << " frames, "
            << objects << " objects)\n";
}

// ------------------------------------------------------------ build matrix

struct MatrixOpts {
  std::string scenario;
  int positions = 10;
  int yaws = 10;
  int pitches = 3;
  std::string out = "matrix.vis";
};

void run_matrix(const Global& g, const MatrixOpts& o) {
  const io::AppConfig cfg = app_config(g);
  const Scenario sc = io::load_scenario(o.scenario);
  const CandidateGrid grid =
      build_candidates(sc.rails, o.positions, o.yaws, o.pitches);
  const std::string path = out_path(g, o.out);
  const VisibilityMatrix vm = io::build_vismatrix_checkpointed(
      grid, sc, cfg.intr, path, resolve_threads(g.threads));
  std::cout << "wrote " << path << " (" << vm.rows << " candidates x "
            << vm.cols << " objects)\n";
}

// ------------------------------------------------------- gradient ascent

struct GdOpts {
  std::string scenario;
  int sensors = 1;
  int epochs = 20;
  int runs = 10;
  int points = 400;
  double lr = 0.1;
  double gamma = 1.0;
  double kappa = 0.5;
  std::string out = "gd_report.json";
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* kappa_opt = nullptr;
};

void run_gd(const Global& g, const GdOpts& o) {
  const io::AppConfig cfg = app_config(g);
  const Scenario sc = io::load_scenario(o.scenario);
  GdHyper hyper;
  hyper.epochs = o.epochs;
  hyper.runs = o.runs;
  hyper.points_per_object = o.points;
  hyper.lr = o.lr;
  hyper.diff = cfg.diff;
  hyper.intr = cfg.intr;
  hyper.threads = resolve_threads(g.threads);
  if (o.gamma_opt->count()) hyper.diff.gamma = o.gamma;
  if (o.kappa_opt->count()) hyper.diff.kappa = o.kappa;

  const RunResult best =
      optimize_multirun(sc, o.sensors, o.runs, o.epochs, hyper, g.seed);
  const std::string path = out_path(g, o.out);
  io::save_gd_report(best, sc, path);
  std::cout << "wrote " << path << " (min visibility "
            << best.best_min_visibility << ", run seed " << best.seed
            << ")\n";
}

// --------------------------------------------------------- discrete solve

struct IpOpts {
  std::string scenario;
  std::string matrix;
  int sensors = 1;
  std::string solver = "exhaustive";
  double stop_seconds = 60.0;
  std::int64_t stop_iters = 100000;
  std::uint64_t budget = 10000000;
  std::string out = "ip_report.json";
};

void run_ip(const Global& g, const IpOpts& o) {
  const Scenario sc = io::load_scenario(o.scenario);
  const VisibilityMatrix vm = io::load_vismatrix(o.matrix);
  if (vm.scenario_hash != io::scenario_hash(sc))
    throw PreconditionError(o.matrix + ": matrix was built for a different scenario");
  const CandidateGrid grid =
      build_candidates(sc.rails, vm.positions, vm.yaws, vm.pitches);
  if (grid.candidates.size() != vm.rows)
    throw PreconditionError(o.matrix + ": candidate count mismatch");

  const StopRule stop{o.stop_seconds, o.stop_iters};
  IPSolution sol;
  if (o.solver == "exhaustive")
    sol = solve_exhaustive(vm, o.sensors, o.budget);
  else if (o.solver == "naive")
    sol = solve_naive(vm, o.sensors, stop, g.seed);
  else
    sol = solve_mcmc(vm, o.sensors, stop, g.seed);

  // Iteration counts are only reproducible without the wall-clock rule.
  const bool report_iters = o.solver == "exhaustive" || o.stop_seconds <= 0;
  const std::string path = out_path(g, o.out);
  io::save_ip_report(sol, grid, vm.scenario_hash, report_iters, path);
  std::cout << "wrote " << path << " (z " << sol.z << ", " << sol.solver
            << ")\n";
}

// -------------------------------------------------------------- evaluate

struct EvalOpts {
  std::string scenario;
  std::string poses;
  std::string report = "report.csv";
  std::string ecdf = "ecdf.csv";
};

void run_evaluate(const Global& g, const EvalOpts& o) {
  const io::AppConfig cfg = app_config(g);
  const Scenario sc = io::load_scenario(o.scenario);
  const auto poses = io::resolve_poses(io::load_poses(o.poses), sc);
  const EvalReport report =
      evaluate(poses, sc, cfg.intr, resolve_threads(g.threads));
  const std::string report_path = out_path(g, o.report);
  const std::string ecdf_path = out_path(g, o.ecdf);
  io::save_report_csv(report, report_path);
  io::save_ecdf_csv(report, ecdf_path);
  std::cout << "wrote " << report_path << " and " << ecdf_path
            << " (min " << report.min_visibility << ", mean "
            << report.mean_visibility << ")\n";
}

// -------------------------------------------------------------- baseline

struct CompareOpts {
  std::string scenario;
  int sensors = 2;
  int positions = 5;
  int yaws = 3;
  int pitches = 2;
  double spacing = 1.0;
  double lift = 0.1;
  int epochs = 20;
  int runs = 10;
  int points = 400;
  std::string out = "compare.csv";
};

void run_compare(const Global& g, const CompareOpts& o) {
  const io::AppConfig cfg = app_config(g);
  const Scenario sc = io::load_scenario(o.scenario);
  CompareConfig cc;
  cc.grid_positions = o.positions;
  cc.grid_yaws = o.yaws;
  cc.grid_pitches = o.pitches;
  cc.ground_spacing = o.spacing;
  cc.ground_lift = o.lift;
  cc.kappa = cfg.diff.kappa;
  cc.gd.epochs = o.epochs;
  cc.gd.runs = o.runs;
  cc.gd.points_per_object = o.points;
  cc.gd.diff = cfg.diff;
  cc.gd.intr = cfg.intr;
  cc.gd.threads = resolve_threads(g.threads);
  cc.seed = g.seed;
  cc.threads = cc.gd.threads;

  const std::vector<CompareRow> rows = compare_baseline(sc, o.sensors, cc);
  const std::string path = out_path(g, o.out);
  io::save_compare_csv(rows, path);
  std::cout << "wrote " << path << "\n";
  for (const CompareRow& r : rows)
    std::cout << "  " << r.method << ": coverage " << r.coverage_pct
              << "%, min visibility " << r.min_visibility << "\n";
}

// ----------------------------------------------------------- cloud export

struct CloudOpts {
  std::string scenario;
  std::string poses;
  std::vector<int> frames;
  std::string out = "cloud.ply";
  std::string scores;
  int points = 400;
};

void run_cloud(const Global& g, const CloudOpts& o) {
  const io::AppConfig cfg = app_config(g);
  const Scenario sc = io::load_scenario(o.scenario);
  const io::PoseFile pf = io::load_poses(o.poses);
  const auto poses = io::resolve_poses(pf, sc);

  std::vector<int> frames = o.frames;
  if (frames.empty())
    for (std::size_t l = 0; l < sc.frames.size(); ++l) frames.push_back(int(l));
  PointCloud cloud;
  for (int idx : frames) {
    if (idx < 0 || std::size_t(idx) >= sc.frames.size())
      throw PreconditionError("frame index out of range: " + std::to_string(idx));
    const auto meshes = scene_meshes(sc.frames[idx], sc.environment);
    for (std::size_t s = 0; s < poses.size(); ++s) {
      const CameraMatrices cams = camera_matrices(poses[s], cfg.intr);
      const auto [db, fb] = rasterize(meshes, cams, cfg.intr);
      const PointCloud part = reproject(db, fb, cams, std::int32_t(s));
      cloud.insert(cloud.end(), part.begin(), part.end());
    }
  }
  const std::string path = out_path(g, o.out);
  io::save_ply(cloud, path);
  std::cout << "wrote " << path << " (" << cloud.size() << " points)\n";

  if (!o.scores.empty()) {
    if (pf.rail_poses.empty())
      throw PreconditionError("score export needs rail poses");
    const auto [obj, bundle] =
        objective(sc.frames, pf.rail_poses, sc, o.points, cfg.diff, g.seed,
                  cfg.intr, resolve_threads(g.threads));
    const std::string scores_path = out_path(g, o.scores);
    io::save_scores_csv(bundle, scores_path);
    std::cout << "wrote " << scores_path << " (objective " << obj << ")\n";
  }
}

// ---------------------------------------------------------------- ablation

struct AblateOpts {
  std::string scenario;
  int sensors = 2;
  int pairs = 5;
  int epochs = 20;
  int runs = 3;
  int points = 400;
  std::string out = "ablation.csv";
};

void run_ablate(const Global& g, const AblateOpts& o) {
  const io::AppConfig cfg = app_config(g);
  const Scenario sc = io::load_scenario(o.scenario);
  GdHyper aware;
  aware.epochs = o.epochs;
  aware.runs = o.runs;
  aware.points_per_object = o.points;
  aware.diff = cfg.diff;
  aware.intr = cfg.intr;
  aware.threads = resolve_threads(g.threads);
  GdHyper blind = aware;
  blind.diff.kappa = std::numeric_limits<double>::infinity();

  std::ostringstream csv;
  csv << "seed,with_occlusion_min_vis,without_occlusion_min_vis\n";
  int aware_wins = 0;
  for (int k = 0; k < o.pairs; ++k) {
    const std::uint64_t seed = g.seed + std::uint64_t(k);
    const RunResult with_occ =
        optimize_multirun(sc, o.sensors, o.runs, o.epochs, aware, seed);
    const RunResult without_occ =
        optimize_multirun(sc, o.sensors, o.runs, o.epochs, blind, seed);
    csv << seed << "," << with_occ.best_min_visibility << ","
        << without_occ.best_min_visibility << "\n";
    if (with_occ.best_min_visibility >= without_occ.best_min_visibility)
      ++aware_wins;
    std::cout << "seed " << seed << ": with occlusion "
              << with_occ.best_min_visibility << ", without "
              << without_occ.best_min_visibility << "\n";
  }
  const std::string path = out_path(g, o.out);
  io::write_file_atomic(path, csv.str());
  std::cout << "wrote " << path << " (occlusion-aware >= occlusion-blind in "
            << aware_wins << "/" << o.pairs << " pairs)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensor-pose visibility optimization over synthetic scenes"};
  app.require_subcommand(1);

  Global g;
  app.add_option("--config", g.config, "JSON with camera/scoring overrides");
  app.add_option("--seed", g.seed, "master RNG seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "directory for output files")
      ->capture_default_str();

  GenerateOpts gen;
  CLI::App* sub_gen =
      app.add_subcommand("generate-frames", "sample a synthetic scenario");
  sub_gen->add_option("--spec", gen.spec, "generator spec JSON")->required();
  sub_gen->add_option("--out", gen.out, "scenario output name")
      ->capture_default_str();

  MatrixOpts mx;
  CLI::App* sub_mx = app.add_subcommand(
      "build-vismatrix", "render the candidate grid into a visibility matrix");
  sub_mx->add_option("--scenario", mx.scenario, "scenario JSON")->required();
  sub_mx->add_option("--positions", mx.positions, "positions per rail")
      ->capture_default_str();
  sub_mx->add_option("--yaws", mx.yaws, "yaw steps")->capture_default_str();
  sub_mx->add_option("--pitches", mx.pitches, "pitch steps")
      ->capture_default_str();
  sub_mx->add_option("--out", mx.out, "matrix output name")
      ->capture_default_str();

  GdOpts gd;
  CLI::App* sub_gd =
      app.add_subcommand("optimize-gd", "gradient-ascent pose optimization");
  sub_gd->add_option("--scenario", gd.scenario, "scenario JSON")->required();
  sub_gd->add_option("--sensors", gd.sensors, "sensor count")
      ->capture_default_str();
  sub_gd->add_option("--epochs", gd.epochs, "ascent epochs per run")
      ->capture_default_str();
  sub_gd->add_option("--runs", gd.runs, "independent restarts")
      ->capture_default_str();
  sub_gd->add_option("--points", gd.points, "surface samples per object")
      ->capture_default_str();
  sub_gd->add_option("--lr", gd.lr, "Adam learning rate")
      ->capture_default_str();
  gd.gamma_opt = sub_gd->add_option("--gamma", gd.gamma,
                                    "score window transition rate");
  gd.kappa_opt = sub_gd->add_option("--kappa", gd.kappa,
                                    "occlusion disparity threshold, meters");
  sub_gd->add_option("--out", gd.out, "report output name")
      ->capture_default_str();

  IpOpts ip;
  CLI::App* sub_ip = app.add_subcommand(
      "optimize-ip", "max-min solve over a prebuilt visibility matrix");
  sub_ip->add_option("--scenario", ip.scenario, "scenario JSON")->required();
  sub_ip->add_option("--matrix", ip.matrix, "visibility matrix file")
      ->required();
  sub_ip->add_option("--sensors", ip.sensors, "sensor count")
      ->capture_default_str();
  sub_ip->add_option("--solver", ip.solver, "exhaustive, naive, or mcmc")
      ->check(CLI::IsMember({"exhaustive", "naive", "mcmc"}))
      ->capture_default_str();
  sub_ip->add_option("--stop-seconds", ip.stop_seconds,
                     "sampling: give up after this long without improvement "
                     "(<= 0 disables)")
      ->capture_default_str();
  sub_ip->add_option("--stop-iters", ip.stop_iters,
                     "sampling: proposal cap (< 0 disables)")
      ->capture_default_str();
  sub_ip->add_option("--budget", ip.budget, "exhaustive: max subsets")
      ->capture_default_str();
  sub_ip->add_option("--out", ip.out, "report output name")
      ->capture_default_str();

  EvalOpts ev;
  CLI::App* sub_ev =
      app.add_subcommand("evaluate", "per-object visibility report");
  sub_ev->add_option("--scenario", ev.scenario, "scenario JSON")->required();
  sub_ev->add_option("--poses", ev.poses, "pose file JSON")->required();
  sub_ev->add_option("--report", ev.report, "per-object CSV name")
      ->capture_default_str();
  sub_ev->add_option("--ecdf", ev.ecdf, "ECDF CSV name")
      ->capture_default_str();

  CompareOpts cmp;
  CLI::App* sub_cmp = app.add_subcommand(
      "compare-baseline",
      "coverage-greedy vs object-centric discrete solve vs gradient ascent");
  sub_cmp->add_option("--scenario", cmp.scenario, "scenario JSON")->required();
  sub_cmp->add_option("--sensors", cmp.sensors, "sensor count")
      ->capture_default_str();
  sub_cmp->add_option("--positions", cmp.positions, "grid positions per rail")
      ->capture_default_str();
  sub_cmp->add_option("--yaws", cmp.yaws, "grid yaw steps")
      ->capture_default_str();
  sub_cmp->add_option("--pitches", cmp.pitches, "grid pitch steps")
      ->capture_default_str();
  sub_cmp->add_option("--ground-spacing", cmp.spacing, "coverage grid spacing")
      ->capture_default_str();
  sub_cmp->add_option("--ground-lift", cmp.lift, "coverage grid lift")
      ->capture_default_str();
  sub_cmp->add_option("--epochs", cmp.epochs, "ascent epochs per run")
      ->capture_default_str();
  sub_cmp->add_option("--runs", cmp.runs, "ascent restarts")
      ->capture_default_str();
  sub_cmp->add_option("--points", cmp.points, "surface samples per object")
      ->capture_default_str();
  sub_cmp->add_option("--out", cmp.out, "comparison CSV name")
      ->capture_default_str();

  CloudOpts cl;
  CLI::App* sub_cl = app.add_subcommand(
      "export-cloud", "reproject rendered depth into a labeled point cloud");
  sub_cl->add_option("--scenario", cl.scenario, "scenario JSON")->required();
  sub_cl->add_option("--poses", cl.poses, "pose file JSON")->required();
  sub_cl->add_option("--frame", cl.frames,
                     "frame index (repeatable; default all frames)");
  sub_cl->add_option("--out", cl.out, "PLY output name")
      ->capture_default_str();
  sub_cl->add_option("--scores", cl.scores,
                     "also write per-point smooth scores CSV (rail poses only)");
  sub_cl->add_option("--points", cl.points, "surface samples per object")
      ->capture_default_str();

  AblateOpts ab;
  CLI::App* sub_ab = app.add_subcommand(
      "ablate-visibility",
      "optimize with and without occlusion awareness under matched seeds");
  sub_ab->add_option("--scenario", ab.scenario, "scenario JSON")->required();
  sub_ab->add_option("--sensors", ab.sensors, "sensor count")
      ->capture_default_str();
  sub_ab->add_option("--pairs", ab.pairs, "matched seed pairs")
      ->capture_default_str();
  sub_ab->add_option("--epochs", ab.epochs, "ascent epochs per run")
      ->capture_default_str();
  sub_ab->add_option("--runs", ab.runs, "ascent restarts per pair")
      ->capture_default_str();
  sub_ab->add_option("--points", ab.points, "surface samples per object")
      ->capture_default_str();
  sub_ab->add_option("--out", ab.out, "ablation CSV name")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    fs::create_directories(g.out_dir);
    if (sub_gen->parsed()) run_generate(g, gen);
    if (sub_mx->parsed()) run_matrix(g, mx);
    if (sub_gd->parsed()) run_gd(g, gd);
    if (sub_ip->parsed()) run_ip(g, ip);
    if (sub_ev->parsed()) run_evaluate(g, ev);
    if (sub_cmp->parsed()) run_compare(g, cmp);
    if (sub_cl->parsed()) run_cloud(g, cl);
    if (sub_ab->parsed()) run_ablate(g, ab);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
