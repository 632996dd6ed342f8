#include "visopt/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "visopt/errors.hpp"
#include "visopt/rng.hpp"

namespace visopt {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

Eigen::Matrix3d yaw_rotation(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Eigen::Matrix3d r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

CanonicalPose rail_to_canonical(const VirtualRail& rail, const RailPose& pose) {
  // The squash saturates to exactly 0 or 1 in double precision, but yaw and
  // pitch must stay strictly inside their intervals; clamp to the nearest
  // representable interior values.
  const auto open = [](double x, double hi) {
    return std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(hi, 0.0));
  };
  CanonicalPose out;
  out.position = rail.p1 + sigmoid(pose.t) * (rail.p2 - rail.p1);
  out.yaw = open(2.0 * M_PI * sigmoid(pose.alpha), 2.0 * M_PI);
  out.pitch = open(M_PI * sigmoid(pose.beta), M_PI);
  return out;
}

namespace {

std::array<Vec3, 8> box_corners(const ObjectBox& box) {
  const Eigen::Matrix3d r = yaw_rotation(box.yaw);
  const Vec3 h = 0.5 * box.size;
  std::array<Vec3, 8> c;
  for (int i = 0; i < 8; ++i) {
    const Vec3 local((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                     (i & 4) ? h.z() : -h.z());
    c[i] = box.center + r * local;
  }
  return c;
}

// Face quads in outward counter-clockwise order, indexing box_corners.
constexpr int kFaceQuads[6][4] = {
    {1, 3, 7, 5},  // +X
    {0, 4, 6, 2},  // -X
    {2, 6, 7, 3},  // +Y
    {0, 1, 5, 4},  // -Y
    {4, 5, 7, 6},  // +Z
    {0, 2, 3, 1},  // -Z
};

}  // namespace

std::vector<Triangle> box_to_mesh(const ObjectBox& box) {
  const auto c = box_corners(box);
  std::vector<Triangle> tris;
  tris.reserve(12);
  for (const auto& q : kFaceQuads) {
    tris.push_back({c[q[0]], c[q[1]], c[q[2]]});
    tris.push_back({c[q[0]], c[q[2]], c[q[3]]});
  }
  return tris;
}

std::vector<Vec3> sample_surface_points(const ObjectBox& box, int count,
                                        std::uint64_t rng_seed) {
  if (count < 1) throw PreconditionError("sample count must be >= 1");
  const double w = box.size.x(), h = box.size.y(), l = box.size.z();
  // Face order: +X, -X, +Y, -Y, +Z, -Z.
  const std::array<double, 6> areas = {h * l, h * l, w * l, w * l, w * h, w * h};
  std::array<double, 6> cum{};
  double total = 0.0;
  for (int i = 0; i < 6; ++i) {
    total += areas[i];
    cum[i] = total;
  }
  const Eigen::Matrix3d r = yaw_rotation(box.yaw);
  const Vec3 half = 0.5 * box.size;

  Rng rng(rng_seed);
  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double pick = rng.uniform() * total;
    int face = 0;
    while (face < 5 && pick >= cum[face]) ++face;
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform() - 0.5;
    Vec3 local;
    switch (face) {
      case 0: local = Vec3(half.x(), u * h, v * l); break;
      case 1: local = Vec3(-half.x(), u * h, v * l); break;
      case 2: local = Vec3(u * w, half.y(), v * l); break;
      case 3: local = Vec3(u * w, -half.y(), v * l); break;
      case 4: local = Vec3(u * w, v * h, half.z()); break;
      default: local = Vec3(u * w, v * h, -half.z()); break;
    }
    points.push_back(box.center + r * local);
  }
  return points;
}

double distance_to_box_surface(const Vec3& p, const ObjectBox& box) {
  const Eigen::Matrix3d r = yaw_rotation(box.yaw);
  const Vec3 local = r.transpose() * (p - box.center);
  const Vec3 half = 0.5 * box.size;
  const Vec3 q = local.cwiseAbs() - half;
  if ((q.array() <= 0.0).all()) {
    return q.maxCoeff();  // inside: negative distance to the nearest face
  }
  const Vec3 outside = q.cwiseMax(0.0);
  return outside.norm();
}

void validate(const Scenario& scenario) {
  if (scenario.rails.empty())
    throw PreconditionError("scenario needs at least one rail");
  if (scenario.frames.empty())
    throw PreconditionError("scenario needs at least one frame");
  for (const auto& rail : scenario.rails) {
    if ((rail.p2 - rail.p1).norm() == 0.0)
      throw PreconditionError("rail endpoints must differ");
  }
  const auto check_box = [](const ObjectBox& b, const char* what) {
    if (!(b.size.array() > 0.0).all())
      throw PreconditionError(std::string(what) + " must have positive extents");
  };
  for (const auto& b : scenario.environment.static_boxes)
    check_box(b, "environment box");
  const auto& g = scenario.environment.ground;
  if (g.max_x <= g.min_x || g.max_z <= g.min_z)
    throw PreconditionError("ground extent must be positive");
  for (const auto& frame : scenario.frames) {
    if (frame.objects.empty())
      throw PreconditionError("frame must contain at least one object");
    std::set<std::int32_t> ids;
    for (const auto& obj : frame.objects) {
      check_box(obj, "object box");
      if (obj.id < 0)
        throw PreconditionError("object ids must be non-negative");
      if (!ids.insert(obj.id).second)
        throw PreconditionError("object ids must be unique within a frame");
    }
  }
}

}  // namespace visopt
