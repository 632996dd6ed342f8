#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "visopt/camera.hpp"
#include "visopt/scene.hpp"

namespace visopt {

/// One discrete sensor pose with the grid coordinates it came from.
struct Candidate {
  CanonicalPose pose;
  std::size_t rail_index = 0;
  double fraction = 0.0;  // position along the rail, (0,1]
  int yaw_index = 0;      // 1-based grid indices
  int pitch_index = 0;
};

struct CandidateGrid {
  std::vector<Candidate> candidates;
  int positions = 0;
  int yaws = 0;
  int pitches = 0;
  std::size_t rail_count = 0;
};

/// Integer visibility of every (candidate, object-in-frame) pair.
/// Rows follow the candidate grid; columns enumerate (frame, object)
/// pairs in scenario order.
struct VisibilityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> counts;  // row-major
  std::vector<std::pair<std::size_t, std::int32_t>> columns;  // (frame, id)
  // Provenance carried into the on-disk format.
  int width = 0;
  int height = 0;
  int positions = 0;
  int yaws = 0;
  int pitches = 0;
  std::size_t rail_count = 0;
  std::uint64_t scenario_hash = 0;

  std::uint32_t at(std::size_t i, std::size_t j) const {
    return counts[i * cols + j];
  }
};

/// A selection of candidate rows and its min-over-objects visibility.
struct IPSolution {
  std::vector<std::size_t> chosen;  // sorted candidate indices
  std::int64_t z = 0;
  double elapsed = 0.0;  // seconds; informational, never serialized
  std::int64_t iterations = 0;
  std::string solver;
};

/// Sampling-solver stop rule: give up when no improvement for
/// max_seconds, or when max_iterations proposals were made — whichever
/// comes first. max_seconds <= 0 disables the timer; max_iterations < 0
/// disables the cap (tests use iteration-only mode for determinism).
struct StopRule {
  double max_seconds = 60.0;
  std::int64_t max_iterations = 100000;
};

/// Grid of candidate poses per rail: position fractions k/positions,
/// yaws 2*pi*k/yaws, pitches k*18 degrees, k starting at 1.
CandidateGrid build_candidates(const std::vector<VirtualRail>& rails,
                               int positions = 10, int yaws = 10,
                               int pitches = 3);

/// Renders every frame once per candidate and counts per-object pixels.
VisibilityMatrix build_vismatrix(const CandidateGrid& grid,
                                 const Scenario& scenario,
                                 const Intrinsics& intr, int threads = 1);

/// Fills rows [row_begin, row_end) of an already-shaped matrix; used by
/// the checkpoint/resume path. Rows outside the range are untouched.
void fill_vismatrix_rows(VisibilityMatrix& vm, const CandidateGrid& grid,
                         const Scenario& scenario, const Intrinsics& intr,
                         std::size_t row_begin, std::size_t row_end,
                         int threads);

/// min over columns of the summed chosen rows; 0 for an empty choice.
std::int64_t ip_objective(const VisibilityMatrix& vm,
                          const std::vector<std::size_t>& chosen);

/// Exact max-min by full enumeration; lexicographically smallest
/// optimum. Throws BudgetError when C(rows, n) exceeds the budget.
IPSolution solve_exhaustive(const VisibilityMatrix& vm, int n,
                            std::uint64_t budget = 10000000);

/// Uniform re-sampling of n-subsets, keeping the best score. Equal
/// scores refresh the improvement timer.
IPSolution solve_naive(const VisibilityMatrix& vm, int n,
                       const StopRule& stop, std::uint64_t rng_seed);

/// Metropolis-Hastings over single-element swaps, acceptance
/// min(1, z_proposed / (z_current + 1e-9)), with best-ever tracking.
IPSolution solve_mcmc(const VisibilityMatrix& vm, int n, const StopRule& stop,
                      std::uint64_t rng_seed);

}  // namespace visopt
