#pragma once

#include <cstdint>
#include <vector>

#include "visopt/camera.hpp"
#include "visopt/raster.hpp"
#include "visopt/scene.hpp"

namespace visopt {

/// Shape parameters of the differentiable visibility score.
struct DiffParams {
  double gamma = 1.0;  // window transition rate
  double kappa = 0.5;  // occlusion disparity threshold, meters
};

// Occlusion-gate states recorded per (point, sensor). The gate carries no
// gradient; flips between evaluations mark points where finite differences
// are not comparable to the analytic gradient.
enum class GateState : std::uint8_t { Open = 0, Occluded = 1, Degenerate = 2 };

/// Everything the score evaluation produced, kept for diagnostics and
/// for downstream consumers (heat-map dumps, gradient checks).
struct ScoreBundle {
  std::vector<std::size_t> frame_offsets;       // size L+1, into points
  std::vector<Vec3> points;                     // sampled surface points
  std::vector<std::vector<double>> per_sensor;  // [sensor][point] score
  std::vector<std::vector<GateState>> gate;     // [sensor][point]
  std::vector<double> combined;                 // per-point multi-sensor score
  double objective = 0.0;
};

/// d objective / d (t, alpha, beta) for each sensor.
struct GradientVector {
  std::vector<Eigen::Vector3d> d_pose;
};

/// Smooth box window: sigmoid(gamma*(z - z0)) - sigmoid(gamma*(z - z1)).
double window(double z, double gamma, double z0, double z1);
double window_deriv(double z, double gamma, double z0, double z1);

/// Product of the three windows over u in [0,W], v in [0,H],
/// d in [d_near, d_far].
double vis_score(const ImagePoint& ip, const Intrinsics& intr,
                 const DiffParams& params);

/// Depth-disparity occlusion test against the rendered buffer. Background
/// at the looked-up pixel means nothing rendered nearer, so not occluded.
bool occluded(const ImagePoint& ip, const DepthBuffer& db, double kappa);

/// vis_score gated by the occlusion test; exactly 0 when occluded.
double vis_score_occ(const Vec3& p, const CanonicalPose& sensor,
                     const DepthBuffer& db, const Intrinsics& intr,
                     const DiffParams& params);

/// Multi-sensor combination 1 - prod(1 - score_s).
double vis_score_all(const std::vector<double>& scores);

/// Depth/fragment buffers of every (frame, sensor) pair, rendered once.
struct FrameRender {
  std::vector<DepthBuffer> depth;
  std::vector<FragmentBuffer> frag;
};

std::vector<FrameRender> render_frames(const std::vector<Frame>& frames,
                                       const Environment& env,
                                       const std::vector<CanonicalPose>& poses,
                                       const Intrinsics& intr, int threads = 1);

/// Surface points drawn for one evaluation pass: F per object per frame,
/// deterministic in the seed.
struct SampledPoints {
  std::vector<std::size_t> frame_offsets;  // size L+1
  std::vector<Vec3> points;
};

SampledPoints sample_frame_points(const std::vector<Frame>& frames, int F,
                                  std::uint64_t rng_seed);

/// Scores (and optionally the analytic gradient) for fixed renders and
/// fixed sample points. The depth buffers, the occlusion gates, and the
/// sampled points are constants of the evaluation: gradients flow only
/// through the window functions and the pose chain.
struct Evaluation {
  double objective = 0.0;
  ScoreBundle bundle;
  GradientVector grad;  // empty unless requested
};

Evaluation evaluate_scores(const Scenario& scenario,
                           const std::vector<RailPose>& sensors,
                           const SampledPoints& pts,
                           const std::vector<FrameRender>& renders,
                           const Intrinsics& intr, const DiffParams& params,
                           bool with_grad, int threads = 1);

/// Renders, samples, scores: the scalar objective in [0,1] — the mean
/// over frames of the per-frame mean of per-point multi-sensor scores.
std::pair<double, ScoreBundle> objective(const std::vector<Frame>& frames,
                                         const std::vector<RailPose>& sensors,
                                         const Scenario& scenario, int F,
                                         const DiffParams& params,
                                         std::uint64_t rng_seed,
                                         const Intrinsics& intr = {},
                                         int threads = 1);

/// Analytic d objective / d (t, alpha, beta) per sensor under the same
/// stop-gradient treatment (matches central finite differences wherever
/// no occlusion gate flips).
GradientVector gradient(const std::vector<Frame>& frames,
                        const std::vector<RailPose>& sensors,
                        const Scenario& scenario, int F,
                        const DiffParams& params, std::uint64_t rng_seed,
                        const Intrinsics& intr = {}, int threads = 1);

}  // namespace visopt
