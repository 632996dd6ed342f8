#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "visopt/diffvis.hpp"
#include "visopt/rng.hpp"

using namespace visopt;

namespace {

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Straight-line evaluation of the smooth box window, as an oracle for the
// numerically hardened implementation.
double window_ref(double z, double gamma, double z0, double z1) {
  return sig(gamma * (z - z0)) - sig(gamma * (z - z1));
}

Scenario wall_scenario() {
  // A large thin wall dead ahead of the rail: every surface sample projects
  // deep inside the image at a comfortable depth.
  Scenario sc;
  sc.environment.ground = GroundRect{0.0, 0.0, 0.0, 0.0, -50.0};
  sc.rails.push_back(VirtualRail{Vec3(-1.0, 9.1, 0.0), Vec3(1.0, 9.1, 0.0)});
  Frame frame;
  frame.id = 0;
  frame.objects.push_back(
      ObjectBox{0, Vec3(0.0, 9.1, 10.0), Vec3(18.0, 18.0, 0.2), 0.0});
  sc.frames.push_back(frame);
  return sc;
}

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

}  // namespace

TEST_SUITE("diffvis") {

TEST_CASE("window matches its closed form") {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const double z = rng.uniform(-50.0, 250.0);
    const double gamma = rng.uniform(0.05, 4.0);
    const double z0 = rng.uniform(-10.0, 20.0);
    const double z1 = z0 + rng.uniform(1.0, 200.0);
    CHECK(window(z, gamma, z0, z1) ==
          doctest::Approx(window_ref(z, gamma, z0, z1)).epsilon(1e-12));
  }
  CHECK(window(100.0, 1.0, 0.0, 200.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(window(-60.0, 1.0, 0.0, 200.0) < 1e-15);
  CHECK(window(260.0, 1.0, 0.0, 200.0) < 1e-15);
  CHECK(window(0.0, 1.0, 0.0, 200.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("window derivative matches central differences") {
  Rng rng(32);
  for (int i = 0; i < 200; ++i) {
    const double z = rng.uniform(-20.0, 220.0);
    const double gamma = rng.uniform(0.1, 3.0);
    const double z0 = 0.0, z1 = rng.uniform(50.0, 200.0);
    const double h = 1e-6;
    const double fd =
        (window(z + h, gamma, z0, z1) - window(z - h, gamma, z0, z1)) /
        (2.0 * h);
    const double an = window_deriv(z, gamma, z0, z1);
    CHECK(an == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("pixel score is the product of the three windows") {
  const Intrinsics intr;
  Rng rng(33);
  for (int i = 0; i < 200; ++i) {
    const ImagePoint ip{rng.uniform(-40.0, 240.0), rng.uniform(-40.0, 240.0),
                        rng.uniform(-5.0, 120.0)};
    DiffParams params;
    params.gamma = rng.uniform(0.1, 3.0);
    const double expect =
        window_ref(ip.u, params.gamma, 0.0, intr.width) *
        window_ref(ip.v, params.gamma, 0.0, intr.height) *
        window_ref(ip.d, params.gamma, intr.d_near, intr.d_far);
    CHECK(vis_score(ip, intr, params) ==
          doctest::Approx(expect).epsilon(1e-10));
  }
  CHECK(vis_score(ImagePoint{100.0, 100.0, 50.0}, intr, DiffParams{}) >
        0.999);
  CHECK(vis_score(ImagePoint{-60.0, 100.0, 50.0}, intr, DiffParams{}) <
        1e-15);
}

TEST_CASE("occlusion gate compares depths with a disparity threshold") {
  DepthBuffer db;
  db.width = 4;
  db.height = 3;
  db.depth.assign(12, 10.0f);
  db.depth[5] = DepthBuffer::kBackground;  // pixel (1, 1)

  CHECK_FALSE(occluded(ImagePoint{2.5, 0.5, 10.3}, db, 0.5));
  CHECK(occluded(ImagePoint{2.5, 0.5, 10.6}, db, 0.5));
  CHECK(occluded(ImagePoint{2.5, 0.5, 9.2}, db, 0.5));
  // Exactly at the threshold stays open (strict inequality).
  CHECK_FALSE(occluded(ImagePoint{2.5, 0.5, 10.5}, db, 0.5));
  // Background pixel: nothing rendered nearer, never occluded.
  CHECK_FALSE(occluded(ImagePoint{1.5, 1.5, 70.0}, db, 0.5));
  // Out-of-image lookups clamp to the border pixel.
  CHECK(occluded(ImagePoint{-3.0, 0.5, 20.0}, db, 0.5));
  CHECK_FALSE(occluded(ImagePoint{9.0, 2.9, 10.1}, db, 0.5));
}

TEST_CASE("gated score: open, occluded, and behind-camera cases") {
  const Intrinsics intr;
  const DiffParams params;
  const CanonicalPose sensor{Vec3::Zero(), 0.0, M_PI / 2.0};
  DepthBuffer db;
  db.width = intr.width;
  db.height = intr.height;
  db.depth.assign(std::size_t(intr.width) * intr.height, 10.0f);

  const Vec3 p(0.0, 0.0, 10.0);  // projects to the image centre at depth 10
  const double open_score = vis_score_occ(p, sensor, db, intr, params);
  CHECK(open_score ==
        doctest::Approx(vis_score(ImagePoint{100.0, 100.0, 10.0}, intr, params))
            .epsilon(1e-12));
  CHECK(open_score > 0.99);

  db.depth.assign(db.depth.size(), 5.0f);  // something nearer in every pixel
  CHECK(vis_score_occ(p, sensor, db, intr, params) == 0.0);

  db.depth.assign(db.depth.size(), DepthBuffer::kBackground);
  CHECK(vis_score_occ(p, sensor, db, intr, params) == open_score);

  // Behind the camera the depth window decays smoothly (no hard cutoff)...
  const double behind =
      vis_score_occ(Vec3(0.0, 0.0, -5.0), sensor, db, intr, params);
  CHECK(behind ==
        doctest::Approx(vis_score(ImagePoint{100.0, 100.0, -5.0}, intr, params))
            .epsilon(1e-12));
  CHECK(behind < 0.01);
  // ...but a point in the camera plane cannot be projected at all.
  CHECK(vis_score_occ(Vec3(1.0, 0.3, 0.0), sensor, db, intr, params) == 0.0);
}

TEST_CASE("multi-sensor combination") {
  CHECK(vis_score_all({}) == 0.0);
  CHECK(vis_score_all({0.3}) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(vis_score_all({0.5, 0.5}) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(vis_score_all({1.0, 0.2}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(vis_score_all({0.25, 0.25, 0.25}) ==
        doctest::Approx(1.0 - 0.75 * 0.75 * 0.75).epsilon(1e-15));
  // Never decreases when a sensor is added.
  Rng rng(34);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> scores;
    for (int s = 0; s < 3; ++s) scores.push_back(rng.uniform());
    const double before = vis_score_all(scores);
    scores.push_back(rng.uniform());
    CHECK(vis_score_all(scores) >= before - 1e-15);
  }
}

TEST_CASE("sampled points sit on their objects and follow the seed") {
  Rng rng(35);
  const Scenario sc = random_scenario(rng, 3, 1);
  const int F = 50;
  const SampledPoints a = sample_frame_points(sc.frames, F, 99);
  const SampledPoints b = sample_frame_points(sc.frames, F, 99);
  const SampledPoints c = sample_frame_points(sc.frames, F, 100);

  REQUIRE(a.frame_offsets.size() == sc.frames.size() + 1);
  CHECK(a.frame_offsets.front() == 0);
  CHECK(a.frame_offsets.back() == a.points.size());
  for (std::size_t l = 0; l < sc.frames.size(); ++l) {
    const std::size_t lo = a.frame_offsets[l], hi = a.frame_offsets[l + 1];
    REQUIRE(hi - lo == F * sc.frames[l].objects.size());
    for (std::size_t i = lo; i < hi; ++i) {
      const auto& obj = sc.frames[l].objects[(i - lo) / F];
      CHECK(std::abs(distance_to_box_surface(a.points[i], obj)) < 1e-9);
    }
  }
  bool identical = a.points.size() == b.points.size();
  for (std::size_t i = 0; identical && i < a.points.size(); ++i)
    identical = a.points[i] == b.points[i];
  CHECK(identical);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    any_diff = any_diff || a.points[i] != c.points[i];
  CHECK(any_diff);
}

TEST_CASE("objective saturates on an unobstructed wall") {
  const Scenario sc = wall_scenario();
  const std::vector<RailPose> sensors = {RailPose{0, 0.0, -40.0, 0.0}};
  const auto [obj, bundle] =
      objective(sc.frames, sensors, sc, 200, DiffParams{}, 7);
  CHECK(obj > 0.98);
  CHECK(obj <= 1.0);
  REQUIRE(bundle.combined.size() == 200);
  REQUIRE(bundle.per_sensor.size() == 1);
  REQUIRE(bundle.frame_offsets == std::vector<std::size_t>{0, 200});
  // Objective is the mean over frames of per-frame mean scores.
  double mean = 0.0;
  for (const double s : bundle.combined) mean += s;
  mean /= double(bundle.combined.size());
  CHECK(obj == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("objective vanishes facing away and is exactly zero when blocked") {
  Scenario sc = wall_scenario();
  const std::vector<RailPose> away = {RailPose{0, 0.0, 0.0, 0.0}};  // yaw pi
  const auto [obj_away, b_away] =
      objective(sc.frames, away, sc, 200, DiffParams{}, 7);
  CHECK(obj_away < 1e-3);

  // A slab between the rail and the wall hides every sample.
  sc.environment.static_boxes.push_back(
      ObjectBox{0, Vec3(0.0, 9.1, 5.0), Vec3(30.0, 30.0, 0.2), 0.0});
  const std::vector<RailPose> ahead = {RailPose{0, 0.0, -40.0, 0.0}};
  const auto [obj_blocked, b_blocked] =
      objective(sc.frames, ahead, sc, 200, DiffParams{}, 7);
  CHECK(obj_blocked == 0.0);
  REQUIRE(b_blocked.gate.size() == 1);
  for (const GateState g : b_blocked.gate[0]) CHECK(g == GateState::Occluded);
}

TEST_CASE("an added sensor never lowers the objective") {
  Rng rng(36);
  for (int trial = 0; trial < 10; ++trial) {
    const Scenario sc = random_scenario(rng, 1, 2);
    const RailPose s1{0, rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                      rng.uniform(-1.0, 1.0)};
    const RailPose s2{1, rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                      rng.uniform(-1.0, 1.0)};
    const std::uint64_t seed = 1000 + trial;
    const auto [one, b1] =
        objective(sc.frames, {s1}, sc, 80, DiffParams{}, seed);
    const auto [two, b2] =
        objective(sc.frames, {s1, s2}, sc, 80, DiffParams{}, seed);
    CHECK(two >= one - 1e-12);
  }
}

TEST_CASE("evaluation is deterministic and thread-count invariant") {
  Rng rng(37);
  const Scenario sc = random_scenario(rng, 2, 2);
  const std::vector<RailPose> sensors = {RailPose{0, 0.3, 0.4, -0.2},
                                         RailPose{1, -0.5, -1.0, 0.1}};
  const auto [o1, b1] = objective(sc.frames, sensors, sc, 100, DiffParams{},
                                  42, Intrinsics{}, 1);
  const auto [o4, b4] = objective(sc.frames, sensors, sc, 100, DiffParams{},
                                  42, Intrinsics{}, 4);
  CHECK(o1 == o4);
  CHECK(b1.combined == b4.combined);
  CHECK(b1.per_sensor == b4.per_sensor);

  const GradientVector g1 = gradient(sc.frames, sensors, sc, 100, DiffParams{},
                                     42, Intrinsics{}, 1);
  const GradientVector g4 = gradient(sc.frames, sensors, sc, 100, DiffParams{},
                                     42, Intrinsics{}, 4);
  REQUIRE(g1.d_pose.size() == 2);
  for (int s = 0; s < 2; ++s)
    CHECK(g1.d_pose[s] == g4.d_pose[s]);
}

TEST_CASE("analytic gradient matches central differences between gate flips") {
  Intrinsics intr;
  intr.width = 120;
  intr.height = 120;
  const DiffParams params;
  const double h = 1e-4;
  const int F = 60;

  Rng rng(38);
  int compared = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const Scenario sc = random_scenario(rng, 2, 2);
    std::vector<RailPose> sensors = {
        RailPose{0, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                 rng.uniform(-0.8, 0.8)},
        RailPose{1, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                 rng.uniform(-0.8, 0.8)}};
    const std::uint64_t seed = 500 + trial;
    const auto [base_obj, base_bundle] =
        objective(sc.frames, sensors, sc, F, params, seed, intr);
    const GradientVector grad =
        gradient(sc.frames, sensors, sc, F, params, seed, intr);
    REQUIRE(grad.d_pose.size() == sensors.size());

    for (std::size_t s = 0; s < sensors.size(); ++s) {
      for (int c = 0; c < 3; ++c) {
        auto shift = [&](double delta) {
          std::vector<RailPose> moved = sensors;
          double* coord[3] = {&moved[s].t, &moved[s].alpha, &moved[s].beta};
          *coord[c] += delta;
          return objective(sc.frames, moved, sc, F, params, seed, intr);
        };
        const auto [plus, bp] = shift(h);
        const auto [minus, bm] = shift(-h);
        if (bp.gate != base_bundle.gate || bm.gate != base_bundle.gate)
          continue;  // the stop-gradient gate flipped inside the stencil
        const double fd = (plus - minus) / (2.0 * h);
        const double an = grad.d_pose[s][c];
        ++compared;
        if (std::abs(fd) > 1e-8 || std::abs(an) > 1e-8) {
          CHECK(std::abs(an - fd) / std::max(std::abs(an), std::abs(fd)) <
                1e-4);
        }
      }
    }
  }
  CHECK(compared >= 15);  // most coordinates must actually be testable
}

TEST_CASE("renders line up with direct rasterization") {
  Rng rng(39);
  const Scenario sc = random_scenario(rng, 2, 1);
  const std::vector<CanonicalPose> poses = {
      rail_to_canonical(sc.rails[0], RailPose{0, 0.0, 0.3, 0.0}),
      rail_to_canonical(sc.rails[0], RailPose{0, 1.0, -0.3, 0.1})};
  const Intrinsics intr;
  const auto renders = render_frames(sc.frames, sc.environment, poses, intr, 3);
  REQUIRE(renders.size() == sc.frames.size());
  for (std::size_t l = 0; l < renders.size(); ++l) {
    REQUIRE(renders[l].depth.size() == poses.size());
    REQUIRE(renders[l].frag.size() == poses.size());
    const auto meshes = scene_meshes(sc.frames[l], sc.environment);
    for (std::size_t s = 0; s < poses.size(); ++s) {
      const auto [db, fb] =
          rasterize(meshes, camera_matrices(poses[s], intr), intr);
      CHECK(renders[l].depth[s].depth == db.depth);
      CHECK(renders[l].frag[s].frag == fb.frag);
    }
  }
}

}  // TEST_SUITE
