#include "visopt/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <unordered_map>

#include "visopt/diffvis.hpp"
#include "visopt/errors.hpp"
#include "visopt/hash.hpp"
#include "visopt/parallel.hpp"
#include "visopt/raster.hpp"

namespace visopt {

namespace {

void hash_double(std::string& buf, double v) {
  char tmp[32];
  std::snprintf(tmp, sizeof tmp, "%.17g;", v);
  buf += tmp;
}

std::uint64_t eval_config_hash(const std::vector<CanonicalPose>& poses,
                               const Intrinsics& intr) {
  std::string buf = "eval;";
  hash_double(buf, intr.width);
  hash_double(buf, intr.height);
  hash_double(buf, intr.hfov);
  hash_double(buf, intr.d_near);
  hash_double(buf, intr.d_far);
  for (const CanonicalPose& p : poses) {
    hash_double(buf, p.position.x());
    hash_double(buf, p.position.y());
    hash_double(buf, p.position.z());
    hash_double(buf, p.yaw);
    hash_double(buf, p.pitch);
  }
  return fnv1a64(buf);
}

// Environment-only depth renders, one per pose.
std::vector<DepthBuffer> env_renders(const std::vector<CanonicalPose>& poses,
                                     const Environment& env,
                                     const Intrinsics& intr, int threads) {
  const auto meshes = scene_meshes(Frame{}, env);
  return parallel_map<DepthBuffer>(poses.size(), threads, [&](std::size_t s) {
    return rasterize(meshes, camera_matrices(poses[s], intr), intr).first;
  });
}

bool point_covered(const Vec3& p, const CameraMatrices& cams,
                   const DepthBuffer& db, const Intrinsics& intr,
                   double kappa) {
  const auto ip = project(p, cams);
  if (!ip || !in_frustum(*ip, intr)) return false;
  return !occluded(*ip, db, kappa);
}

}  // namespace

GroundGrid make_ground_grid(const GroundRect& ground, double spacing,
                            double lift) {
  if (spacing <= 0.0) throw PreconditionError("grid spacing must be > 0");
  GroundGrid grid;
  grid.spacing = spacing;
  const double y = ground.y + lift;
  for (double x = ground.min_x + spacing / 2.0; x < ground.max_x;
       x += spacing)
    for (double z = ground.min_z + spacing / 2.0; z < ground.max_z;
         z += spacing)
      grid.points.emplace_back(x, y, z);
  if (grid.points.empty())
    throw PreconditionError("ground extent smaller than one grid cell");
  return grid;
}

EvalReport evaluate(const std::vector<CanonicalPose>& poses,
                    const Scenario& scenario, const Intrinsics& intr,
                    int threads) {
  if (poses.empty()) throw PreconditionError("need at least one pose");
  validate(scenario);

  const auto renders = render_frames(scenario.frames, scenario.environment,
                                     poses, intr, threads);
  EvalReport report;
  report.poses = poses;
  report.config_hash = eval_config_hash(poses, intr);

  for (std::size_t l = 0; l < scenario.frames.size(); ++l) {
    std::unordered_map<std::int32_t, std::int64_t> hist;
    for (const FragmentBuffer& fb : renders[l].frag)
      for (const std::int32_t id : fb.frag)
        if (id >= 0) ++hist[id];
    for (const ObjectBox& obj : scenario.frames[l].objects) {
      const auto it = hist.find(obj.id);
      report.columns.emplace_back(l, obj.id);
      report.counts.push_back(it == hist.end() ? 0 : it->second);
    }
  }

  report.min_visibility = std::numeric_limits<std::int64_t>::max();
  double sum = 0.0;
  for (const std::int64_t c : report.counts) {
    report.min_visibility = std::min(report.min_visibility, c);
    sum += double(c);
  }
  report.mean_visibility = sum / double(report.counts.size());

  std::vector<std::int64_t> sorted = report.counts;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    report.ecdf.emplace_back(sorted[i],
                             double(i + 1) / double(sorted.size()));
  }
  return report;
}

double ground_coverage(const std::vector<CanonicalPose>& poses,
                       const GroundGrid& grid, const Environment& env,
                       const Intrinsics& intr, double kappa, int threads) {
  if (grid.points.empty()) throw PreconditionError("ground grid is empty");
  if (poses.empty()) return 0.0;
  const auto depths = env_renders(poses, env, intr, threads);
  std::vector<CameraMatrices> cams(poses.size());
  for (std::size_t s = 0; s < poses.size(); ++s)
    cams[s] = camera_matrices(poses[s], intr);

  std::size_t covered = 0;
  for (const Vec3& p : grid.points) {
    for (std::size_t s = 0; s < poses.size(); ++s) {
      if (point_covered(p, cams[s], depths[s], intr, kappa)) {
        ++covered;
        break;
      }
    }
  }
  return double(covered) / double(grid.points.size());
}

std::vector<std::size_t> solve_coverage_baseline(const GroundGrid& grid,
                                                 const CandidateGrid& cands,
                                                 int n, const Environment& env,
                                                 const Intrinsics& intr,
                                                 double kappa, int threads) {
  if (n < 1) throw PreconditionError("sensor count must be >= 1");
  if (std::size_t(n) > cands.candidates.size())
    throw PreconditionError("sensor count exceeds candidate count");
  if (grid.points.empty()) throw PreconditionError("ground grid is empty");

  std::vector<CanonicalPose> poses;
  poses.reserve(cands.candidates.size());
  for (const Candidate& c : cands.candidates) poses.push_back(c.pose);
  const auto depths = env_renders(poses, env, intr, threads);

  const std::size_t npts = grid.points.size();
  const auto cover = parallel_map<std::vector<char>>(
      poses.size(), threads, [&](std::size_t i) {
        const auto cams = camera_matrices(poses[i], intr);
        std::vector<char> bits(npts, 0);
        for (std::size_t g = 0; g < npts; ++g)
          bits[g] =
              point_covered(grid.points[g], cams, depths[i], intr, kappa);
        return bits;
      });

  std::vector<char> taken(npts, 0);
  std::vector<std::size_t> chosen;
  std::vector<char> used(poses.size(), 0);
  for (int pick = 0; pick < n; ++pick) {
    std::size_t best_i = 0;
    std::int64_t best_gain = -1;
    for (std::size_t i = 0; i < poses.size(); ++i) {
      if (used[i]) continue;
      std::int64_t gain = 0;
      for (std::size_t g = 0; g < npts; ++g)
        gain += (!taken[g] && cover[i][g]) ? 1 : 0;
      if (gain > best_gain) {
        best_gain = gain;
        best_i = i;
      }
    }
    used[best_i] = 1;
    chosen.push_back(best_i);
    for (std::size_t g = 0; g < npts; ++g)
      if (cover[best_i][g]) taken[g] = 1;
  }
  return chosen;
}

std::vector<CompareRow> compare_baseline(const Scenario& scenario, int n,
                                         const CompareConfig& cfg) {
  validate(scenario);
  const Intrinsics& intr = cfg.gd.intr;
  const GroundGrid grid = make_ground_grid(scenario.environment.ground,
                                           cfg.ground_spacing,
                                           cfg.ground_lift);
  const CandidateGrid cands =
      build_candidates(scenario.rails, cfg.grid_positions, cfg.grid_yaws,
                       cfg.grid_pitches);

  const auto row_for = [&](const std::string& method,
                           const std::vector<CanonicalPose>& poses) {
    CompareRow row;
    row.method = method;
    row.n = n;
    row.coverage_pct = 100.0 * ground_coverage(poses, grid,
                                               scenario.environment, intr,
                                               cfg.kappa, cfg.threads);
    row.min_visibility =
        evaluate(poses, scenario, intr, cfg.threads).min_visibility;
    return row;
  };

  std::vector<CompareRow> rows;

  const auto greedy = solve_coverage_baseline(grid, cands, n,
                                              scenario.environment, intr,
                                              cfg.kappa, cfg.threads);
  std::vector<CanonicalPose> greedy_poses;
  for (const std::size_t i : greedy)
    greedy_poses.push_back(cands.candidates[i].pose);
  rows.push_back(row_for("coverage-greedy", greedy_poses));

  const VisibilityMatrix vm =
      build_vismatrix(cands, scenario, intr, cfg.threads);
  const IPSolution ip = solve_exhaustive(vm, n, cfg.exhaustive_budget);
  std::vector<CanonicalPose> ip_poses;
  for (const std::size_t i : ip.chosen)
    ip_poses.push_back(cands.candidates[i].pose);
  rows.push_back(row_for("object-ip", ip_poses));

  GdHyper gd = cfg.gd;
  gd.threads = cfg.threads;
  const RunResult run =
      optimize_multirun(scenario, n, gd.runs, gd.epochs, gd, cfg.seed);
  std::vector<CanonicalPose> gd_poses;
  for (const RailPose& rp : run.best_poses)
    gd_poses.push_back(rail_to_canonical(scenario.rails[rp.rail_index], rp));
  rows.push_back(row_for("gradient-ascent", gd_poses));

  return rows;
}

}  // namespace visopt
