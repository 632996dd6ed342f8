#include "visopt/gdopt.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "visopt/errors.hpp"
#include "visopt/rng.hpp"

namespace visopt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Seed-derivation tags: keep the init stream and the per-epoch sampling
// streams disjoint.
constexpr std::uint64_t kInitTag = 1;
constexpr std::uint64_t kEpochTag = 2;

Eigen::VectorXd flatten(const std::vector<RailPose>& poses) {
  Eigen::VectorXd x(3 * poses.size());
  for (std::size_t s = 0; s < poses.size(); ++s) {
    x[3 * s + 0] = poses[s].t;
    x[3 * s + 1] = poses[s].alpha;
    x[3 * s + 2] = poses[s].beta;
  }
  return x;
}

void unflatten(const Eigen::VectorXd& x, std::vector<RailPose>& poses) {
  for (std::size_t s = 0; s < poses.size(); ++s) {
    poses[s].t = x[3 * s + 0];
    poses[s].alpha = x[3 * s + 1];
    poses[s].beta = x[3 * s + 2];
  }
}

std::vector<CanonicalPose> to_canonical(const Scenario& sc,
                                        const std::vector<RailPose>& poses) {
  std::vector<CanonicalPose> out;
  out.reserve(poses.size());
  for (const RailPose& rp : poses)
    out.push_back(rail_to_canonical(sc.rails[rp.rail_index], rp));
  return out;
}

}  // namespace

std::int64_t min_visibility(const std::vector<Frame>& frames,
                            const std::vector<FrameRender>& renders) {
  std::int64_t worst = std::numeric_limits<std::int64_t>::max();
  for (std::size_t l = 0; l < frames.size(); ++l) {
    std::unordered_map<std::int32_t, std::int64_t> counts;
    for (const FragmentBuffer& fb : renders[l].frag)
      for (const std::int32_t id : fb.frag)
        if (id >= 0) ++counts[id];
    for (const ObjectBox& obj : frames[l].objects) {
      const auto it = counts.find(obj.id);
      const std::int64_t c = it == counts.end() ? 0 : it->second;
      worst = std::min(worst, c);
    }
  }
  return worst == std::numeric_limits<std::int64_t>::max() ? 0 : worst;
}

std::vector<RailPose> init_poses(const std::vector<VirtualRail>& rails, int n,
                                 std::uint64_t rng_seed,
                                 const std::optional<Vec3>& focus_point) {
  if (n < 1) throw PreconditionError("need at least one sensor");
  if (rails.empty()) throw PreconditionError("need at least one rail");
  Rng rng(rng_seed);
  std::vector<RailPose> poses;
  poses.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RailPose rp;
    rp.rail_index = rng.uniform_int(rails.size());
    rp.t = rng.uniform(-2.0, 2.0);
    bool aimed = false;
    if (focus_point) {
      const VirtualRail& rail = rails[rp.rail_index];
      const Vec3 pos = rail.p1 + sigmoid(rp.t) * (rail.p2 - rail.p1);
      const Vec3 dir = *focus_point - pos;
      const double len = dir.norm();
      if (len > 1e-9) {
        const Vec3 d = dir / len;
        // forward = (sin yaw sin pitch, -cos pitch, cos yaw sin pitch)
        const double pitch = std::acos(std::clamp(-d.y(), -1.0, 1.0));
        double yaw = std::atan2(d.x(), d.z());
        if (yaw < 0.0) yaw += 2.0 * kPi;
        const auto squash = [](double frac) {
          return logit(std::clamp(frac, 1e-9, 1.0 - 1e-9));
        };
        rp.alpha = squash(yaw / (2.0 * kPi));
        rp.beta = squash(pitch / kPi);
        aimed = true;
      }
    }
    if (!aimed) {
      rp.alpha = rng.uniform(-2.0, 2.0);
      rp.beta = rng.uniform(-2.0, 2.0);
    }
    poses.push_back(rp);
  }
  return poses;
}

Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& params,
                          const Eigen::VectorXd& grads) {
  if (params.size() != grads.size())
    throw PreconditionError("parameter/gradient size mismatch");
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
    state.step = 0;
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v +
            (1.0 - state.beta2) * grads.cwiseProduct(grads).eval();
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  const Eigen::VectorXd m_hat = state.m / bc1;
  const Eigen::VectorXd v_hat = state.v / bc2;
  // Ascent: move along the gradient.
  return params + state.lr *
                      (m_hat.array() / (v_hat.array().sqrt() + state.eps))
                          .matrix();
}

RunResult optimize_run(const Scenario& scenario, int n, int epochs,
                       const GdHyper& hyper, std::uint64_t rng_seed) {
  validate(scenario);
  if (epochs < 0) throw PreconditionError("epochs must be >= 0");

  const std::optional<Vec3> focus =
      hyper.use_focus_init ? scenario.focus_point : std::nullopt;
  std::vector<RailPose> poses =
      init_poses(scenario.rails, n, derive_seed(rng_seed, kInitTag), focus);

  RunResult result;
  result.seed = rng_seed;
  result.rail_assignment.reserve(poses.size());
  for (const RailPose& rp : poses)
    result.rail_assignment.push_back(rp.rail_index);

  auto renders = render_frames(scenario.frames, scenario.environment,
                               to_canonical(scenario, poses), hyper.intr,
                               hyper.threads);
  result.best_poses = poses;
  result.best_min_visibility = min_visibility(scenario.frames, renders);

  AdamState adam;
  adam.lr = hyper.lr;
  adam.beta1 = hyper.beta1;
  adam.beta2 = hyper.beta2;
  adam.eps = hyper.eps_adam;

  for (int e = 0; e < epochs; ++e) {
    const auto pts =
        sample_frame_points(scenario.frames, hyper.points_per_object,
                            derive_seed(rng_seed, kEpochTag, e));
    const Evaluation ev =
        evaluate_scores(scenario, poses, pts, renders, hyper.intr, hyper.diff,
                        /*with_grad=*/true, hyper.threads);
    result.trace.push_back(ev.objective);

    Eigen::VectorXd grads(3 * poses.size());
    for (std::size_t s = 0; s < poses.size(); ++s)
      grads.segment<3>(3 * s) = ev.grad.d_pose[s];
    unflatten(adam_step(adam, flatten(poses), grads), poses);

    renders = render_frames(scenario.frames, scenario.environment,
                            to_canonical(scenario, poses), hyper.intr,
                            hyper.threads);
    const std::int64_t metric = min_visibility(scenario.frames, renders);
    if (metric > result.best_min_visibility) {
      result.best_min_visibility = metric;
      result.best_poses = poses;
    }
  }
  return result;
}

RunResult optimize_multirun(const Scenario& scenario, int n, int runs,
                            int epochs, const GdHyper& hyper,
                            std::uint64_t master_seed) {
  if (runs < 1) throw PreconditionError("runs must be >= 1");
  RunResult best;
  bool have = false;
  for (int k = 0; k < runs; ++k) {
    RunResult r = optimize_run(scenario, n, epochs, hyper, master_seed + k);
    const double r_final = r.trace.empty() ? 0.0 : r.trace.back();
    const double b_final = best.trace.empty() ? 0.0 : best.trace.back();
    const bool better =
        !have || r.best_min_visibility > best.best_min_visibility ||
        (r.best_min_visibility == best.best_min_visibility &&
         (r_final > b_final ||
          (r_final == b_final && r.seed < best.seed)));
    if (better) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

}  // namespace visopt
