#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "visopt/camera.hpp"
#include "visopt/gdopt.hpp"
#include "visopt/ipopt.hpp"
#include "visopt/scene.hpp"

namespace visopt {

/// Per-object visibility statistics of one pose set over a scenario.
struct EvalReport {
  std::vector<std::pair<std::size_t, std::int32_t>> columns;  // (frame, id)
  std::vector<std::int64_t> counts;  // aligned with columns
  std::int64_t min_visibility = 0;
  double mean_visibility = 0.0;
  std::vector<std::pair<std::int64_t, double>> ecdf;  // (value, cum fraction)
  std::vector<CanonicalPose> poses;
  std::uint64_t config_hash = 0;
};

/// Regular grid of ground points used by the coverage baseline. Points
/// sit `lift` meters above the ground plane so the coverage test does
/// not self-intersect the ground mesh.
struct GroundGrid {
  std::vector<Vec3> points;
  double spacing = 1.0;
};

GroundGrid make_ground_grid(const GroundRect& ground, double spacing = 1.0,
                            double lift = 0.1);

/// Renders every frame with the pose set and assembles per-object
/// counts, min/mean, and the ECDF of the counts.
EvalReport evaluate(const std::vector<CanonicalPose>& poses,
                    const Scenario& scenario, const Intrinsics& intr = {},
                    int threads = 1);

/// Fraction of grid points that some sensor sees in-frustum and
/// un-occluded against its environment-only depth render.
double ground_coverage(const std::vector<CanonicalPose>& poses,
                       const GroundGrid& grid, const Environment& env,
                       const Intrinsics& intr = {}, double kappa = 0.5,
                       int threads = 1);

/// Greedy max-coverage over binary ground-point visibility: repeatedly
/// picks the candidate covering the most yet-uncovered points (lowest
/// index on ties). Returns n chosen candidate indices.
std::vector<std::size_t> solve_coverage_baseline(const GroundGrid& grid,
                                                 const CandidateGrid& cands,
                                                 int n, const Environment& env,
                                                 const Intrinsics& intr = {},
                                                 double kappa = 0.5,
                                                 int threads = 1);

struct CompareRow {
  std::string method;
  int n = 0;
  double coverage_pct = 0.0;
  std::int64_t min_visibility = 0;
};

/// Settings of the three-way comparison (coverage baseline vs discrete
/// object-centric solve vs gradient ascent).
struct CompareConfig {
  int grid_positions = 5;
  int grid_yaws = 3;
  int grid_pitches = 2;
  double ground_spacing = 1.0;
  double ground_lift = 0.1;
  double kappa = 0.5;
  std::uint64_t exhaustive_budget = 10000000;
  GdHyper gd;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Runs all three methods with n sensors on the scenario and reports
/// ground coverage plus min object visibility for each.
std::vector<CompareRow> compare_baseline(const Scenario& scenario, int n,
                                         const CompareConfig& cfg);

}  // namespace visopt
