#include "visopt/diffvis.hpp"

#include <cmath>

#include "visopt/errors.hpp"
#include "visopt/parallel.hpp"
#include "visopt/rng.hpp"

namespace visopt {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// d/dx sigmoid(x), computed via the overflow-safe exp(-|x|) form.
double sigmoid_deriv(double x) {
  const double e = std::exp(-std::abs(x));
  const double denom = 1.0 + e;
  return e / (denom * denom);
}

Eigen::Matrix3d rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

Eigen::Matrix3d rot_y_deriv(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << -s, 0, c, 0, 0, 0, -c, 0, -s;
  return m;
}

Eigen::Matrix3d rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}

Eigen::Matrix3d rot_x_deriv(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << 0, 0, 0, 0, -s, -c, 0, c, -s;
  return m;
}

// Pose-dependent quantities of one sensor, shared across all points.
struct SensorFrame {
  Vec3 position;             // camera centre C
  Eigen::Matrix3d r_wc;      // world -> camera rotation
  Eigen::Matrix3d dr_dyaw;   // d r_wc / d yaw
  Eigen::Matrix3d dr_dpitch; // d r_wc / d pitch
  Vec3 dc_dt;                // d C / d t
  double dyaw_dalpha = 0.0;
  double dpitch_dbeta = 0.0;
};

SensorFrame make_sensor_frame(const VirtualRail& rail, const RailPose& rp) {
  SensorFrame sf;
  const double st = sigmoid(rp.t);
  const double yaw = kTwoPi * sigmoid(rp.alpha);
  const double pitch = kPi * sigmoid(rp.beta);
  sf.position = rail.p1 + st * (rail.p2 - rail.p1);
  // r_wc = R_X(pitch - pi/2) * R_Y(-yaw); see camera_rotation.
  const double a = pitch - kPi / 2.0;
  sf.r_wc = rot_x(a) * rot_y(-yaw);
  sf.dr_dyaw = rot_x(a) * (-rot_y_deriv(-yaw));
  sf.dr_dpitch = rot_x_deriv(a) * rot_y(-yaw);
  sf.dc_dt = sigmoid_deriv(rp.t) * (rail.p2 - rail.p1);
  sf.dyaw_dalpha = kTwoPi * sigmoid_deriv(rp.alpha);
  sf.dpitch_dbeta = kPi * sigmoid_deriv(rp.beta);
  return sf;
}

}  // namespace

double window(double z, double gamma, double z0, double z1) {
  return sigmoid(gamma * (z - z0)) - sigmoid(gamma * (z - z1));
}

double window_deriv(double z, double gamma, double z0, double z1) {
  return gamma * (sigmoid_deriv(gamma * (z - z0)) -
                  sigmoid_deriv(gamma * (z - z1)));
}

double vis_score(const ImagePoint& ip, const Intrinsics& intr,
                 const DiffParams& params) {
  return window(ip.u, params.gamma, 0.0, double(intr.width)) *
         window(ip.v, params.gamma, 0.0, double(intr.height)) *
         window(ip.d, params.gamma, intr.d_near, intr.d_far);
}

bool occluded(const ImagePoint& ip, const DepthBuffer& db, double kappa) {
  const double zl = depth_lookup(db, ip.u, ip.v);
  if (!(zl < DepthBuffer::kBackground)) return false;
  return std::abs(ip.d - zl) > kappa;
}

double vis_score_occ(const Vec3& p, const CanonicalPose& sensor,
                     const DepthBuffer& db, const Intrinsics& intr,
                     const DiffParams& params) {
  const auto ip = project(p, camera_matrices(sensor, intr));
  if (!ip) return 0.0;
  if (occluded(*ip, db, params.kappa)) return 0.0;
  return vis_score(*ip, intr, params);
}

double vis_score_all(const std::vector<double>& scores) {
  double miss = 1.0;
  for (const double s : scores) miss *= 1.0 - s;
  return 1.0 - miss;
}

std::vector<FrameRender> render_frames(const std::vector<Frame>& frames,
                                       const Environment& env,
                                       const std::vector<CanonicalPose>& poses,
                                       const Intrinsics& intr, int threads) {
  const std::size_t nf = frames.size();
  const std::size_t ns = poses.size();
  const auto meshes = parallel_map<std::vector<Mesh>>(
      nf, threads,
      [&](std::size_t l) { return scene_meshes(frames[l], env); });
  std::vector<CameraMatrices> cams(ns);
  for (std::size_t s = 0; s < ns; ++s) cams[s] = camera_matrices(poses[s], intr);

  auto rendered = parallel_map<std::pair<DepthBuffer, FragmentBuffer>>(
      nf * ns, threads, [&](std::size_t i) {
        return rasterize(meshes[i / ns], cams[i % ns], intr);
      });

  std::vector<FrameRender> out(nf);
  for (std::size_t l = 0; l < nf; ++l) {
    out[l].depth.reserve(ns);
    out[l].frag.reserve(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      out[l].depth.push_back(std::move(rendered[l * ns + s].first));
      out[l].frag.push_back(std::move(rendered[l * ns + s].second));
    }
  }
  return out;
}

SampledPoints sample_frame_points(const std::vector<Frame>& frames, int F,
                                  std::uint64_t rng_seed) {
  if (F < 1) throw PreconditionError("point count per object must be >= 1");
  SampledPoints sp;
  sp.frame_offsets.reserve(frames.size() + 1);
  sp.frame_offsets.push_back(0);
  for (std::size_t l = 0; l < frames.size(); ++l) {
    for (std::size_t j = 0; j < frames[l].objects.size(); ++j) {
      const auto pts = sample_surface_points(frames[l].objects[j], F,
                                             derive_seed(rng_seed, l, j));
      sp.points.insert(sp.points.end(), pts.begin(), pts.end());
    }
    sp.frame_offsets.push_back(sp.points.size());
  }
  return sp;
}

Evaluation evaluate_scores(const Scenario& scenario,
                           const std::vector<RailPose>& sensors,
                           const SampledPoints& pts,
                           const std::vector<FrameRender>& renders,
                           const Intrinsics& intr, const DiffParams& params,
                           bool with_grad, int threads) {
  const std::size_t ns = sensors.size();
  const std::size_t nf = renders.size();
  if (ns == 0) throw PreconditionError("need at least one sensor");
  if (nf == 0) throw PreconditionError("need at least one frame");
  if (pts.frame_offsets.size() != nf + 1)
    throw PreconditionError("sample points do not match the frame count");
  for (const RailPose& rp : sensors) {
    if (rp.rail_index >= scenario.rails.size())
      throw PreconditionError("sensor references a missing rail");
  }

  std::vector<SensorFrame> sf(ns);
  for (std::size_t s = 0; s < ns; ++s)
    sf[s] = make_sensor_frame(scenario.rails[sensors[s].rail_index],
                              sensors[s]);
  const double f = focal_pixels(intr);
  const double cx = intr.width / 2.0, cy = intr.height / 2.0;

  Evaluation ev;
  ev.bundle.frame_offsets = pts.frame_offsets;
  ev.bundle.points = pts.points;
  ev.bundle.per_sensor.assign(ns, std::vector<double>(pts.points.size(), 0.0));
  ev.bundle.gate.assign(
      ns, std::vector<GateState>(pts.points.size(), GateState::Open));
  ev.bundle.combined.assign(pts.points.size(), 0.0);

  struct FramePartial {
    double mean = 0.0;
    std::vector<Eigen::Vector3d> grad;  // per sensor, pre-scaled by 1/N_l
  };

  auto partials = parallel_map<FramePartial>(nf, threads, [&](std::size_t l) {
    FramePartial fp;
    if (with_grad) fp.grad.assign(ns, Eigen::Vector3d::Zero());
    const std::size_t lo = pts.frame_offsets[l], hi = pts.frame_offsets[l + 1];
    if (lo == hi) return fp;

    std::vector<double> psi(ns);
    // Per-sensor derivative of the point's score w.r.t. (t, alpha, beta).
    std::vector<Eigen::Vector3d> dpsi(with_grad ? ns : 0);
    std::vector<double> miss_prefix(ns + 1);

    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec3& p = pts.points[i];
      for (std::size_t s = 0; s < ns; ++s) {
        psi[s] = 0.0;
        if (with_grad) dpsi[s].setZero();
        const Vec3 q = p - sf[s].position;
        const Vec3 pc = sf[s].r_wc * q;
        if (std::abs(pc.z()) < 1e-12) {
          ev.bundle.gate[s][i] = GateState::Degenerate;
          continue;
        }
        const double inv_z = 1.0 / pc.z();
        const ImagePoint ip{f * pc.x() * inv_z + cx, f * pc.y() * inv_z + cy,
                            pc.z()};
        if (occluded(ip, renders[l].depth[s], params.kappa)) {
          ev.bundle.gate[s][i] = GateState::Occluded;
          continue;
        }
        const double wu = window(ip.u, params.gamma, 0.0, double(intr.width));
        const double wv = window(ip.v, params.gamma, 0.0, double(intr.height));
        const double wd = window(ip.d, params.gamma, intr.d_near, intr.d_far);
        psi[s] = wu * wv * wd;
        ev.bundle.per_sensor[s][i] = psi[s];
        if (!with_grad) continue;

        const double du = window_deriv(ip.u, params.gamma, 0.0,
                                       double(intr.width)) * wv * wd;
        const double dv = window_deriv(ip.v, params.gamma, 0.0,
                                       double(intr.height)) * wu * wd;
        const double dd = window_deriv(ip.d, params.gamma, intr.d_near,
                                       intr.d_far) * wu * wv;
        // Score gradient w.r.t. the camera-frame point.
        const Vec3 g_pc(du * f * inv_z, dv * f * inv_z,
                        -(du * pc.x() + dv * pc.y()) * f * inv_z * inv_z + dd);
        dpsi[s].x() = g_pc.dot(sf[s].r_wc * (-sf[s].dc_dt));
        dpsi[s].y() = g_pc.dot(sf[s].dr_dyaw * q) * sf[s].dyaw_dalpha;
        dpsi[s].z() = g_pc.dot(sf[s].dr_dpitch * q) * sf[s].dpitch_dbeta;
      }

      miss_prefix[0] = 1.0;
      for (std::size_t s = 0; s < ns; ++s)
        miss_prefix[s + 1] = miss_prefix[s] * (1.0 - psi[s]);
      const double combined = 1.0 - miss_prefix[ns];
      ev.bundle.combined[i] = combined;
      sum += combined;

      if (with_grad) {
        // Leave-one-out products via a suffix sweep over the prefixes.
        double miss_suffix = 1.0;
        for (std::size_t s = ns; s-- > 0;) {
          const double w = miss_prefix[s] * miss_suffix;
          fp.grad[s] += w * dpsi[s];
          miss_suffix *= 1.0 - psi[s];
        }
      }
    }

    const double inv_n = 1.0 / double(hi - lo);
    fp.mean = sum * inv_n;
    if (with_grad)
      for (auto& g : fp.grad) g *= inv_n;
    return fp;
  });

  double total = 0.0;
  if (with_grad) ev.grad.d_pose.assign(ns, Eigen::Vector3d::Zero());
  for (const FramePartial& fp : partials) {
    total += fp.mean;
    if (with_grad)
      for (std::size_t s = 0; s < ns; ++s) ev.grad.d_pose[s] += fp.grad[s];
  }
  ev.objective = total / double(nf);
  if (with_grad)
    for (auto& g : ev.grad.d_pose) g /= double(nf);
  ev.bundle.objective = ev.objective;
  return ev;
}

namespace {

Evaluation evaluate_full(const std::vector<Frame>& frames,
                         const std::vector<RailPose>& sensors,
                         const Scenario& scenario, int F,
                         const DiffParams& params, std::uint64_t rng_seed,
                         const Intrinsics& intr, int threads, bool with_grad) {
  if (sensors.empty()) throw PreconditionError("need at least one sensor");
  if (frames.empty()) throw PreconditionError("need at least one frame");
  std::vector<CanonicalPose> poses;
  poses.reserve(sensors.size());
  for (const RailPose& rp : sensors) {
    if (rp.rail_index >= scenario.rails.size())
      throw PreconditionError("sensor references a missing rail");
    poses.push_back(rail_to_canonical(scenario.rails[rp.rail_index], rp));
  }
  const auto renders =
      render_frames(frames, scenario.environment, poses, intr, threads);
  const auto pts = sample_frame_points(frames, F, rng_seed);
  return evaluate_scores(scenario, sensors, pts, renders, intr, params,
                         with_grad, threads);
}

}  // namespace

std::pair<double, ScoreBundle> objective(const std::vector<Frame>& frames,
                                         const std::vector<RailPose>& sensors,
                                         const Scenario& scenario, int F,
                                         const DiffParams& params,
                                         std::uint64_t rng_seed,
                                         const Intrinsics& intr, int threads) {
  Evaluation ev = evaluate_full(frames, sensors, scenario, F, params, rng_seed,
                                intr, threads, false);
  return {ev.objective, std::move(ev.bundle)};
}

GradientVector gradient(const std::vector<Frame>& frames,
                        const std::vector<RailPose>& sensors,
                        const Scenario& scenario, int F,
                        const DiffParams& params, std::uint64_t rng_seed,
                        const Intrinsics& intr, int threads) {
  return evaluate_full(frames, sensors, scenario, F, params, rng_seed, intr,
                       threads, true)
      .grad;
}

}  // namespace visopt
