#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "visopt/diffvis.hpp"
#include "visopt/eval.hpp"
#include "visopt/framegen.hpp"
#include "visopt/gdopt.hpp"
#include "visopt/ipopt.hpp"
#include "visopt/raster.hpp"
#include "visopt/scene.hpp"

namespace visopt::io {

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe a half-written file.
void write_file_atomic(const std::string& path, const std::string& content);

/// Whole-file read; ParseError when the file cannot be opened.
std::string read_file(const std::string& path);

// --- scenario files ---------------------------------------------------

Scenario load_scenario(const std::string& path);
/// Canonical JSON serialization (sorted keys, stable number formatting);
/// also the byte stream the scenario hash is computed over.
std::string scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& path);
std::uint64_t scenario_hash(const Scenario& scenario);

// --- pose files --------------------------------------------------------

/// A pose file may carry rail-parameterized poses, free canonical poses,
/// or both.
struct PoseFile {
  std::vector<RailPose> rail_poses;
  std::vector<CanonicalPose> canonical_poses;
};

PoseFile load_poses(const std::string& path);
void save_poses(const PoseFile& poses, const std::string& path);
/// Rail poses mapped through their rails, followed by the free poses.
std::vector<CanonicalPose> resolve_poses(const PoseFile& poses,
                                         const Scenario& scenario);

// --- frame-generator config ---------------------------------------------

/// Generator input: environment + rails + lane/density settings, from
/// which `generate-frames` emits a full scenario.
struct GeneratorSpec {
  Environment environment;
  std::vector<VirtualRail> rails;
  FrameGenConfig generator;
  bool has_focus = false;
  Vec3 focus_point = Vec3::Zero();
};

GeneratorSpec load_generator_spec(const std::string& path);

// --- point clouds and render buffers ------------------------------------

void save_ply(const PointCloud& cloud, const std::string& path);

void save_depth(const DepthBuffer& db, const std::string& path);
DepthBuffer load_depth(const std::string& path);
void save_fragments(const FragmentBuffer& fb, const std::string& path);
FragmentBuffer load_fragments(const std::string& path);

// --- visibility matrix ---------------------------------------------------

void save_vismatrix(const VisibilityMatrix& vm, const std::string& path);
VisibilityMatrix load_vismatrix(const std::string& path);

/// Builds the matrix writing a <path>.partial checkpoint after every
/// candidate row; an interrupted build resumes from the checkpoint when
/// the header (grid shape, scenario hash, intrinsics) still matches.
/// The finished file replaces the checkpoint atomically.
VisibilityMatrix build_vismatrix_checkpointed(const CandidateGrid& grid,
                                              const Scenario& scenario,
                                              const Intrinsics& intr,
                                              const std::string& path,
                                              int threads = 1);

// --- CSV / report outputs -------------------------------------------------

void save_ecdf_csv(const EvalReport& report, const std::string& path);
void save_report_csv(const EvalReport& report, const std::string& path);
void save_compare_csv(const std::vector<CompareRow>& rows,
                      const std::string& path);
/// Per-point (x,y,z,score) table for visibility heat maps.
void save_scores_csv(const ScoreBundle& bundle, const std::string& path);

void save_gd_report(const RunResult& result, const Scenario& scenario,
                    const std::string& path);
/// include_iterations: proposal counts are only reproducible under a
/// pure iteration-budget stop rule, so time-limited runs omit them.
void save_ip_report(const IPSolution& sol, const CandidateGrid& grid,
                    std::uint64_t sc_hash, bool include_iterations,
                    const std::string& path);

// --- global CLI config ------------------------------------------------

/// Optional overrides shared by every subcommand: camera intrinsics and
/// score-shape parameters.
struct AppConfig {
  Intrinsics intr;
  DiffParams diff;
};

AppConfig load_app_config(const std::string& path);

}  // namespace visopt::io
