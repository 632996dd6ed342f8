#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "visopt/diffvis.hpp"
#include "visopt/scene.hpp"

namespace visopt {

/// Standard Adam accumulator over a flat parameter vector.
struct AdamState {
  double lr = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int step = 0;
  Eigen::VectorXd m;  // sized on first use
  Eigen::VectorXd v;
};

/// Gradient-ascent hyperparameters (paper-scale defaults).
struct GdHyper {
  int epochs = 20;
  int runs = 10;
  int points_per_object = 400;
  double lr = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  DiffParams diff;
  Intrinsics intr;
  int threads = 1;
  bool use_focus_init = true;  // aim at scenario.focus_point when present
};

/// Outcome of one optimization run (or of the best run of a sweep).
struct RunResult {
  std::vector<RailPose> best_poses;
  std::int64_t best_min_visibility = 0;
  std::vector<double> trace;  // objective per epoch, length == epochs
  std::vector<std::size_t> rail_assignment;
  std::uint64_t seed = 0;
};

/// Smallest per-object integer visibility across every frame and object,
/// read off already-rendered fragment buffers.
std::int64_t min_visibility(const std::vector<Frame>& frames,
                            const std::vector<FrameRender>& renders);

/// Random initial poses: rail assignment uniform, t ~ U(-2,2); angles
/// aim the optical axis at focus_point when given (random U(-2,2) when
/// absent or when the focus coincides with the sensor position).
std::vector<RailPose> init_poses(const std::vector<VirtualRail>& rails, int n,
                                 std::uint64_t rng_seed,
                                 const std::optional<Vec3>& focus_point);

/// One bias-corrected ascent step; mutates the accumulator state.
Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& params,
                          const Eigen::VectorXd& grads);

/// One full epoch-loop run: initialize, per epoch evaluate the smooth
/// objective and take an Adam step, re-render, and track the poses with
/// the best integer min-visibility seen (initial poses included).
RunResult optimize_run(const Scenario& scenario, int n, int epochs,
                       const GdHyper& hyper, std::uint64_t rng_seed);

/// Best of `runs` independent runs seeded master_seed + k. Ties on the
/// metric break by higher final objective, then lower seed.
RunResult optimize_multirun(const Scenario& scenario, int n, int runs,
                            int epochs, const GdHyper& hyper,
                            std::uint64_t master_seed);

}  // namespace visopt
