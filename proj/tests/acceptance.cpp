// Acceptance gate: one self-contained check per release criterion, each
// printing a single PASS/FAIL line. Run with no arguments for all nine,
// or with a criterion number to run one. Exit code 0 iff everything
// passed. Thresholds and budgets are pinned here on purpose.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <utility>
#include <vector>

#include "visopt/camera.hpp"
#include "visopt/diffvis.hpp"
#include "visopt/eval.hpp"
#include "visopt/gdopt.hpp"
#include "visopt/io.hpp"
#include "visopt/ipopt.hpp"
#include "visopt/raster.hpp"
#include "visopt/rng.hpp"
#include "visopt/scene.hpp"

using namespace visopt;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int worker_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 4 : int(std::min(hc, 8u));
}

std::string demo_scenario_path() {
  return std::string(DEMO_DIR) + "/demo_scenario.json";
}

// --- independent ray-casting reference (mirrors the raster unit tests) ---

bool box_crossings(const Vec3& origin, const Vec3& dir, const ObjectBox& box,
                   double& s_in, double& s_out) {
  const Eigen::Matrix3d r = yaw_rotation(box.yaw);
  const Vec3 o = r.transpose() * (origin - box.center);
  const Vec3 d = r.transpose() * dir;
  const Vec3 half = 0.5 * box.size;
  s_in = -kInf;
  s_out = kInf;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-14) {
      if (std::abs(o[a]) > half[a]) return false;
      continue;
    }
    double ta = (-half[a] - o[a]) / d[a];
    double tb = (half[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    s_in = std::max(s_in, ta);
    s_out = std::min(s_out, tb);
  }
  return s_in <= s_out;
}

struct RayPixel {
  double depth = kInf;
  std::int32_t id = kBackgroundId;

  void consider(double s, std::int32_t cand, double d_near, double d_far) {
    if (s < d_near || s > d_far) return;
    if (s < depth || (s == depth && cand < id)) {
      depth = s;
      id = cand;
    }
  }
};

std::pair<std::vector<double>, std::vector<std::int32_t>> raycast_scene(
    const Frame& frame, const Environment& env, const CanonicalPose& pose,
    const Intrinsics& intr) {
  const CameraMatrices cams = camera_matrices(pose, intr);
  const double f = cams.intrinsic(0, 0);
  const double cx = cams.intrinsic(0, 2);
  const double cy = cams.intrinsic(1, 2);
  const Eigen::Matrix3d r_cw = cams.extrinsic.leftCols<3>().transpose();
  std::vector<double> depth(std::size_t(intr.width) * intr.height, kInf);
  std::vector<std::int32_t> frag(depth.size(), kBackgroundId);
  for (int iy = 0; iy < intr.height; ++iy) {
    for (int ix = 0; ix < intr.width; ++ix) {
      const Vec3 dir_cam((ix + 0.5 - cx) / f, (iy + 0.5 - cy) / f, 1.0);
      const Vec3 dir = r_cw * dir_cam;
      RayPixel px;
      double s0, s1;
      for (const ObjectBox& obj : frame.objects)
        if (box_crossings(pose.position, dir, obj, s0, s1)) {
          px.consider(s0, obj.id, intr.d_near, intr.d_far);
          px.consider(s1, obj.id, intr.d_near, intr.d_far);
        }
      for (std::size_t k = 0; k < env.static_boxes.size(); ++k)
        if (box_crossings(pose.position, dir, env.static_boxes[k], s0, s1)) {
          px.consider(s0, env_box_id(k), intr.d_near, intr.d_far);
          px.consider(s1, env_box_id(k), intr.d_near, intr.d_far);
        }
      const GroundRect& g = env.ground;
      if (std::abs(dir.y()) > 1e-14) {
        const double s = (g.y - pose.position.y()) / dir.y();
        const Vec3 p = pose.position + s * dir;
        if (p.x() >= g.min_x && p.x() <= g.max_x && p.z() >= g.min_z &&
            p.z() <= g.max_z)
          px.consider(s, kGroundId, intr.d_near, intr.d_far);
      }
      const std::size_t i = std::size_t(iy) * intr.width + ix;
      depth[i] = px.depth;
      frag[i] = px.id;
    }
  }
  return {std::move(depth), std::move(frag)};
}

// Random street-like scene shared by the render and additivity checks.
struct RandomScene {
  Frame frame;
  Environment env;
};

RandomScene random_scene(Rng& rng) {
  RandomScene s;
  const int nobj = 2 + int(rng.uniform_int(2));
  for (int i = 0; i < nobj; ++i) {
    ObjectBox box;
    box.id = i;
    box.size = Vec3(rng.uniform(0.8, 2.5), rng.uniform(0.8, 2.5),
                    rng.uniform(1.0, 4.0));
    box.center = Vec3(rng.uniform(-6.0, 6.0), 0.5 * box.size.y(),
                      rng.uniform(6.0, 18.0));
    box.yaw = rng.uniform(0.0, 2.0 * M_PI);
    s.frame.objects.push_back(box);
  }
  s.env.ground = GroundRect{-40.0, 40.0, -10.0, 60.0, 0.0};
  for (int k = 0; k < 2; ++k) {
    ObjectBox wall;
    wall.size = Vec3(rng.uniform(0.5, 4.0), rng.uniform(1.0, 3.0),
                     rng.uniform(0.5, 4.0));
    wall.center = Vec3(rng.uniform(-8.0, 8.0), 0.5 * wall.size.y(),
                       rng.uniform(5.0, 20.0));
    wall.yaw = rng.uniform(0.0, 2.0 * M_PI);
    s.env.static_boxes.push_back(wall);
  }
  return s;
}

CanonicalPose random_pose(Rng& rng) {
  CanonicalPose pose;
  pose.position = Vec3(rng.uniform(-6.0, 6.0), rng.uniform(1.5, 4.0),
                       rng.uniform(-4.0, 0.0));
  pose.yaw = rng.uniform(-0.35, 0.35);
  if (pose.yaw < 0.0) pose.yaw += 2.0 * M_PI;
  pose.pitch = rng.uniform(1.2, 1.9);
  return pose;
}

// Random multi-frame scenario with rails, for the gradient check.
Scenario random_scenario(Rng& rng, int n_frames, int n_rails) {
  Scenario sc;
  sc.environment.ground = GroundRect{-30.0, 30.0, -10.0, 40.0, 0.0};
  ObjectBox wall;
  wall.size = Vec3(rng.uniform(1.0, 3.0), rng.uniform(1.0, 3.0),
                   rng.uniform(1.0, 3.0));
  wall.center = Vec3(rng.uniform(-4.0, 4.0), 0.5 * wall.size.y(),
                     rng.uniform(8.0, 14.0));
  wall.yaw = rng.uniform(0.0, 2.0 * M_PI);
  sc.environment.static_boxes.push_back(wall);
  for (int r = 0; r < n_rails; ++r) {
    const Vec3 p1(rng.uniform(-8.0, -2.0), rng.uniform(2.0, 5.0),
                  rng.uniform(-3.0, 0.0));
    sc.rails.push_back(VirtualRail{p1, p1 + Vec3(rng.uniform(4.0, 10.0), 0.0,
                                                 rng.uniform(-1.0, 1.0))});
  }
  for (int l = 0; l < n_frames; ++l) {
    Frame frame;
    frame.id = l;
    const int nobj = 1 + int(rng.uniform_int(2));
    for (int i = 0; i < nobj; ++i) {
      ObjectBox box;
      box.id = i;
      box.size = Vec3(rng.uniform(1.0, 2.5), rng.uniform(1.0, 2.5),
                      rng.uniform(1.5, 4.0));
      box.center = Vec3(rng.uniform(-5.0, 5.0), 0.5 * box.size.y(),
                        rng.uniform(8.0, 16.0));
      box.yaw = rng.uniform(0.0, 2.0 * M_PI);
      frame.objects.push_back(box);
    }
    sc.frames.push_back(frame);
  }
  return sc;
}

// Random instance for the discrete-solver checks: 12 candidates, one
// frame of 6 objects, uniform integer visibilities.
VisibilityMatrix random_matrix(Rng& rng) {
  VisibilityMatrix vm;
  vm.rows = 12;
  vm.cols = 6;
  vm.counts.resize(vm.rows * vm.cols);
  for (auto& c : vm.counts) c = std::uint32_t(rng.uniform_int(401));
  for (std::size_t j = 0; j < vm.cols; ++j)
    vm.columns.emplace_back(0, std::int32_t(j));
  return vm;
}

// --- criteria ---------------------------------------------------------

using Fail = std::optional<std::string>;

// Rasterized depth and per-id pixel counts against the ray-casting
// reference on 20 random scenes at full resolution.
Fail crit_render_oracle() {
  const Intrinsics intr;  // 200 x 200
  const double depth_tol = 1e-3;
  const double mismatch_frac = 0.001;   // of non-background pixels
  const double count_tol_frac = 0.005;  // of W*H, per fragment id
  Rng rng(90001);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomScene s = random_scene(rng);
    const CanonicalPose pose = random_pose(rng);
    const auto [db, fb] = rasterize(scene_meshes(s.frame, s.env),
                                    camera_matrices(pose, intr), intr);
    const auto [ray_depth, ray_frag] = raycast_scene(s.frame, s.env, pose, intr);

    std::size_t non_bg = 0, mismatched = 0;
    std::map<std::int32_t, std::int64_t> raster_counts, ray_counts;
    for (std::size_t i = 0; i < db.depth.size(); ++i) {
      const double zr = double(db.depth[i]);
      const double zo = ray_depth[i];
      const bool bg_r = !(zr < kInf);
      const bool bg_o = !(zo < kInf);
      if (!bg_r || !bg_o) ++non_bg;
      if (bg_r != bg_o || (!bg_r && std::abs(zr - zo) > depth_tol))
        ++mismatched;
      ++raster_counts[fb.frag[i]];
      ++ray_counts[ray_frag[i]];
    }
    if (double(mismatched) > mismatch_frac * double(non_bg))
      return "scene " + std::to_string(trial) + ": " +
             std::to_string(mismatched) + " of " + std::to_string(non_bg) +
             " covered pixels off by more than 1e-3";
    const double count_tol = count_tol_frac * double(db.depth.size());
    std::set<std::int32_t> ids;
    for (const auto& [id, n] : raster_counts) ids.insert(id);
    for (const auto& [id, n] : ray_counts) ids.insert(id);
    for (const std::int32_t id : ids) {
      const auto ra = raster_counts.count(id) ? raster_counts.at(id) : 0;
      const auto rb = ray_counts.count(id) ? ray_counts.at(id) : 0;
      if (std::abs(double(ra - rb)) > count_tol)
        return "scene " + std::to_string(trial) + ": id " +
               std::to_string(id) + " pixel count off by " +
               std::to_string(std::abs(ra - rb));
    }
  }
  return std::nullopt;
}

// Analytic gradient against central finite differences on 50 random
// (scenario, pose) draws, skipping coordinates whose occlusion gate
// flips inside the stencil. A second stencil at h/2 estimates the
// difference quotient's own truncation error: where the objective is a
// sigmoid-tail residue (sensor barely sees anything), the h^2 term can
// exceed the tolerance for the exact derivative, so those coordinates
// drop to a loose sanity bound that still catches real defects.
Fail crit_gradient() {
  Intrinsics intr;
  intr.width = 120;
  intr.height = 120;
  const DiffParams params;
  const double h = 1e-4;
  const int F = 60;
  const double rel_tol = 1e-4;
  const double loose_tol = 1e-2;
  const double fd_floor = 1e-8;
  const int threads = worker_threads();

  Rng rng(90002);
  int compared = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Scenario sc = random_scenario(rng, 2, 2);
    std::vector<RailPose> sensors = {
        RailPose{0, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                 rng.uniform(-0.8, 0.8)},
        RailPose{1, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                 rng.uniform(-0.8, 0.8)}};
    const std::uint64_t seed = 7000 + trial;
    const auto [base_obj, base_bundle] =
        objective(sc.frames, sensors, sc, F, params, seed, intr, threads);
    (void)base_obj;
    const GradientVector grad =
        gradient(sc.frames, sensors, sc, F, params, seed, intr, threads);
    if (grad.d_pose.size() != sensors.size())
      return "gradient size mismatch on draw " + std::to_string(trial);

    for (std::size_t s = 0; s < sensors.size(); ++s) {
      for (int c = 0; c < 3; ++c) {
        auto shift = [&](double delta) {
          std::vector<RailPose> moved = sensors;
          double* coord[3] = {&moved[s].t, &moved[s].alpha, &moved[s].beta};
          *coord[c] += delta;
          return objective(sc.frames, moved, sc, F, params, seed, intr,
                           threads);
        };
        const auto [p1, bp1] = shift(h);
        const auto [m1, bm1] = shift(-h);
        const auto [p2, bp2] = shift(0.5 * h);
        const auto [m2, bm2] = shift(-0.5 * h);
        if (bp1.gate != base_bundle.gate || bm1.gate != base_bundle.gate ||
            bp2.gate != base_bundle.gate || bm2.gate != base_bundle.gate)
          continue;  // stop-gradient gate flipped inside the stencil
        const double fd = (p1 - m1) / (2.0 * h);
        const double fd_half = (p2 - m2) / h;
        const double an = grad.d_pose[s][c];
        if (std::abs(fd) <= fd_floor) {
          if (std::abs(an) > 1e-6)
            return "draw " + std::to_string(trial) +
                   ": analytic gradient large where differences vanish";
          continue;
        }
        const double scale = std::max(std::abs(an), std::abs(fd));
        const double rel = std::abs(an - fd) / scale;
        const bool oracle_ok = std::abs(fd - fd_half) <= 0.25 * rel_tol * scale;
        if (oracle_ok) {
          ++compared;
          if (!(rel < rel_tol))
            return "draw " + std::to_string(trial) + " sensor " +
                   std::to_string(s) + " coord " + std::to_string(c) +
                   ": relative error " + std::to_string(rel);
        } else if (!(rel < loose_tol)) {
          return "draw " + std::to_string(trial) + " sensor " +
                 std::to_string(s) + " coord " + std::to_string(c) +
                 ": relative error " + std::to_string(rel) +
                 " beyond even the truncation-dominated bound";
        }
      }
    }
  }
  if (compared < 100)
    return "only " + std::to_string(compared) +
           " of 300 coordinates had a trustworthy difference quotient";
  return std::nullopt;
}

// Integer visibility must be exactly additive over sensors.
Fail crit_additivity() {
  const Intrinsics intr;
  Rng rng(90003);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomScene s = random_scene(rng);
    const CanonicalPose a = random_pose(rng);
    CanonicalPose b = random_pose(rng);
    b.yaw = rng.uniform(0.0, 2.0 * M_PI);
    for (const ObjectBox& obj : s.frame.objects) {
      const auto both = vis_metric(obj, {a, b}, s.frame, s.env, intr);
      const auto only_a = vis_metric(obj, {a}, s.frame, s.env, intr);
      const auto only_b = vis_metric(obj, {b}, s.frame, s.env, intr);
      if (both != only_a + only_b)
        return "pair " + std::to_string(trial) + " object " +
               std::to_string(obj.id) + ": " + std::to_string(both) +
               " != " + std::to_string(only_a) + " + " +
               std::to_string(only_b);
    }
  }
  return std::nullopt;
}

// Both sampling solvers must reach the exhaustive optimum within the
// iteration budget on at least 48 of 50 random instances, and must never
// report a better score than it.
Fail crit_solvers_reach_optimum() {
  const int n = 3;
  const StopRule stop{0.0, 10000};  // pure iteration budget
  Rng rng(90004);
  int naive_ok = 0, mcmc_ok = 0;
  for (int i = 0; i < 50; ++i) {
    const VisibilityMatrix vm = random_matrix(rng);
    const IPSolution best = solve_exhaustive(vm, n);
    const IPSolution nv = solve_naive(vm, n, stop, 7000 + i);
    const IPSolution mc = solve_mcmc(vm, n, stop, 8000 + i);
    if (nv.z > best.z || mc.z > best.z)
      return "instance " + std::to_string(i) +
             ": sampling solver exceeded the exhaustive optimum";
    if (nv.z == best.z) ++naive_ok;
    if (mc.z == best.z) ++mcmc_ok;
  }
  if (naive_ok < 48 || mcmc_ok < 48)
    return "reached optimum on " + std::to_string(naive_ok) +
           "/50 (naive) and " + std::to_string(mcmc_ok) + "/50 (mcmc)";
  return std::nullopt;
}

// Adding a sensor can never hurt the exhaustive max-min score.
Fail crit_monotone_in_sensors() {
  Rng rng(90004);  // same instances as the solver check
  for (int i = 0; i < 50; ++i) {
    const VisibilityMatrix vm = random_matrix(rng);
    std::int64_t prev = -1;
    for (int n = 1; n <= 4; ++n) {
      const std::int64_t z = solve_exhaustive(vm, n).z;
      if (z < prev)
        return "instance " + std::to_string(i) + ": z dropped from " +
               std::to_string(prev) + " to " + std::to_string(z) +
               " at n=" + std::to_string(n);
      prev = z;
    }
  }
  return std::nullopt;
}

// Occlusion-aware optimization must beat the occlusion-blind ablation on
// the demo scenario for a majority of seed pairs.
Fail crit_ablation() {
  const Scenario sc = io::load_scenario(demo_scenario_path());
  GdHyper aware;
  aware.points_per_object = 300;
  aware.threads = worker_threads();
  GdHyper blind = aware;
  blind.diff.kappa = std::numeric_limits<double>::infinity();

  int aware_wins = 0;
  std::ostringstream detail;
  for (int k = 0; k < 5; ++k) {
    const std::uint64_t seed = 900 + k;
    const auto with_occ = optimize_multirun(sc, 2, 4, 25, aware, seed);
    const auto without_occ = optimize_multirun(sc, 2, 4, 25, blind, seed);
    if (with_occ.best_min_visibility >= without_occ.best_min_visibility)
      ++aware_wins;
    detail << (k ? ", " : "") << with_occ.best_min_visibility << " vs "
           << without_occ.best_min_visibility;
  }
  if (aware_wins < 3)
    return "aware >= blind on only " + std::to_string(aware_wins) +
           "/5 seed pairs (" + detail.str() + ")";
  return std::nullopt;
}

// On the demo scenario the pure ground-coverage baseline must leave some
// object entirely unseen while the object-centric discrete solve, over
// the same candidate grid, keeps every object visible.
Fail crit_coverage_vs_objects() {
  const Scenario sc = io::load_scenario(demo_scenario_path());
  const Intrinsics intr;
  const int threads = worker_threads();
  const CandidateGrid grid = build_candidates(sc.rails, 5, 3, 2);
  if (grid.candidates.size() > 60)
    return "candidate grid grew past 60 rows";

  const GroundGrid ground = make_ground_grid(sc.environment.ground, 1.0, 0.1);
  const auto chosen = solve_coverage_baseline(ground, grid, 2,
                                              sc.environment, intr, 0.5,
                                              threads);
  std::vector<CanonicalPose> poses;
  for (const std::size_t c : chosen) poses.push_back(grid.candidates[c].pose);
  const EvalReport rep = evaluate(poses, sc, intr, threads);

  const VisibilityMatrix vm = build_vismatrix(grid, sc, intr, threads);
  const IPSolution sol = solve_exhaustive(vm, 2);

  if (rep.min_visibility != 0)
    return "coverage baseline still sees every object (min " +
           std::to_string(rep.min_visibility) + ")";
  if (sol.z <= 0)
    return "discrete solve also blind to some object (z = " +
           std::to_string(sol.z) + ")";
  return std::nullopt;
}

// Every CLI subcommand, run twice with the same seed, must produce
// byte-identical output files.
Fail crit_cli_determinism() {
  const std::string cli = VISOPT_CLI;
  const std::string gen_spec = std::string(DEMO_DIR) + "/demo_gen.json";
  const fs::path base = fs::temp_directory_path() / "visopt_acceptance_cli";
  std::error_code ec;
  fs::remove_all(base, ec);

  const std::vector<std::string> outputs = {
      "scenario.json", "m.vis",       "ip_report.json", "gd_report.json",
      "report.csv",    "ecdf.csv",    "compare.csv",    "cloud.ply",
      "scores.csv",    "ablation.csv"};

  for (const char* run : {"a", "b"}) {
    const fs::path dir = base / run;
    fs::create_directories(dir);
    io::PoseFile pf;
    pf.rail_poses = {RailPose{0, 0.2, -0.8, 0.1}, RailPose{1, -0.5, 0.6, -0.2}};
    io::save_poses(pf, (dir / "poses.json").string());

    const std::string scen = (dir / "scenario.json").string();
    const std::string poses = (dir / "poses.json").string();
    const std::string pre =
        cli + " --seed 7 --threads 2 --out-dir " + dir.string() + " ";
    const std::vector<std::string> commands = {
        pre + "generate-frames --spec " + gen_spec + " --out scenario.json",
        pre + "build-vismatrix --scenario " + scen +
            " --positions 3 --yaws 3 --pitches 1 --out m.vis",
        pre + "optimize-ip --scenario " + scen + " --matrix " +
            (dir / "m.vis").string() +
            " --sensors 2 --solver mcmc --stop-seconds 0 --stop-iters 4000"
            " --out ip_report.json",
        pre + "optimize-gd --scenario " + scen +
            " --sensors 2 --epochs 4 --runs 2 --points 120"
            " --out gd_report.json",
        pre + "evaluate --scenario " + scen + " --poses " + poses +
            " --report report.csv --ecdf ecdf.csv",
        pre + "compare-baseline --scenario " + scen +
            " --sensors 2 --positions 3 --yaws 3 --pitches 1"
            " --epochs 3 --runs 2 --points 120 --out compare.csv",
        pre + "export-cloud --scenario " + scen + " --poses " + poses +
            " --frame 0 --frame 1 --points 120 --scores scores.csv"
            " --out cloud.ply",
        pre + "ablate-visibility --scenario " + scen +
            " --sensors 2 --pairs 2 --epochs 3 --runs 2 --points 120"
            " --out ablation.csv"};
    for (const std::string& cmd : commands) {
      const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        return "command failed in run " + std::string(run) + ": " + cmd;
    }
  }

  for (const std::string& name : outputs) {
    std::ifstream fa(base / "a" / name, std::ios::binary);
    std::ifstream fb(base / "b" / name, std::ios::binary);
    if (!fa || !fb) return name + " missing from a rerun";
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str()) return name + " differs between reruns";
  }
  fs::remove_all(base, ec);
  return std::nullopt;
}

// Gradient ascent must beat its own initialization on most seeds.
Fail crit_gd_improves() {
  const Scenario sc = io::load_scenario(demo_scenario_path());
  GdHyper hyper;
  hyper.points_per_object = 300;
  hyper.threads = worker_threads();

  int improved = 0;
  std::ostringstream detail;
  for (int seed = 0; seed < 10; ++seed) {
    const auto at_init = optimize_run(sc, 3, 0, hyper, seed);
    const auto trained = optimize_run(sc, 3, 20, hyper, seed);
    if (trained.best_min_visibility > at_init.best_min_visibility) ++improved;
    detail << (seed ? ", " : "") << at_init.best_min_visibility << "->"
           << trained.best_min_visibility;
  }
  if (improved < 8)
    return "improved on only " + std::to_string(improved) + "/10 runs (" +
           detail.str() + ")";
  return std::nullopt;
}

struct Criterion {
  const char* name;
  Fail (*run)();
  double budget_seconds;  // <= 0: no budget
};

const Criterion kCriteria[] = {
    {"raster depth and coverage vs ray-cast reference", crit_render_oracle,
     120.0},
    {"analytic gradient vs central differences", crit_gradient, 300.0},
    {"pixel visibility additive over sensors", crit_additivity, 60.0},
    {"sampling solvers reach the exhaustive optimum",
     crit_solvers_reach_optimum, 120.0},
    {"exhaustive optimum monotone in sensor count", crit_monotone_in_sensors,
     120.0},
    {"occlusion-aware beats occlusion-blind ablation", crit_ablation, 1200.0},
    {"coverage baseline misses an object the solver keeps",
     crit_coverage_vs_objects, 900.0},
    {"CLI outputs byte-identical across reruns", crit_cli_determinism, 600.0},
    {"gradient ascent improves on its initialization", crit_gd_improves,
     1800.0},
};

bool run_criterion(int index) {
  const Criterion& c = kCriteria[index];
  const auto start = std::chrono::steady_clock::now();
  Fail fail;
  try {
    fail = c.run();
  } catch (const std::exception& e) {
    fail = std::string("exception: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (!fail && c.budget_seconds > 0.0 && elapsed > c.budget_seconds) {
    std::ostringstream os;
    os << "over time budget: " << elapsed << "s > " << c.budget_seconds << "s";
    fail = os.str();
  }
  std::ostringstream line;
  line << "criterion " << (index + 1) << " (" << c.name << "): ";
  if (fail)
    line << "FAIL (" << *fail << ")";
  else
    line << "PASS (" << std::fixed << std::setprecision(1) << elapsed << "s)";
  std::cout << line.str() << std::endl;
  return !fail;
}

}  // namespace

int main(int argc, char** argv) {
  const int total = int(std::size(kCriteria));
  if (argc > 1) {
    const int k = std::atoi(argv[1]);
    if (k < 1 || k > total) {
      std::cerr << "usage: " << argv[0] << " [1.." << total << "]\n";
      return 2;
    }
    return run_criterion(k - 1) ? 0 : 1;
  }
  bool all_ok = true;
  for (int i = 0; i < total; ++i) all_ok = run_criterion(i) && all_ok;
  return all_ok ? 0 : 1;
}
