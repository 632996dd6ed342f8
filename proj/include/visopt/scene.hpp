#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <optional>
#include <vector>

namespace visopt {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// World frame convention, used everywhere in this project:
//   right-handed, +Y up, ground plane at constant Y.
// All lengths are meters, all angles radians.

/// Cuboid target object. size = (w, h, l) are the extents along the local
/// X, Y (vertical) and Z axes; yaw rotates the box about world +Y.
struct ObjectBox {
  std::int32_t id = 0;
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();
  double yaw = 0.0;
};

/// One static configuration of target objects.
struct Frame {
  std::int32_t id = 0;
  std::vector<ObjectBox> objects;
};

/// Ground rectangle at a fixed height.
struct GroundRect {
  double min_x = -1.0;
  double max_x = 1.0;
  double min_z = -1.0;
  double max_z = 1.0;
  double y = 0.0;
};

/// Static occluders plus the ground plane. Box ids are ignored here; the
/// renderer assigns its own identifiers to environment surfaces.
struct Environment {
  std::vector<ObjectBox> static_boxes;
  GroundRect ground;
};

/// Line segment constraining a sensor's position.
struct VirtualRail {
  Vec3 p1 = Vec3::Zero();
  Vec3 p2 = Vec3::UnitX();
};

/// Unbounded sensor pose parameters on a rail. Any real (t, alpha, beta)
/// maps to a valid pose through rail_to_canonical.
struct RailPose {
  std::int32_t rail_index = 0;
  double t = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// Absolute sensor pose. yaw in [0, 2pi] about world +Y; pitch in [0, pi]
/// measured from straight down (0) through horizontal (pi/2) to straight
/// up (pi), applied after yaw. Roll is fixed to zero.
struct CanonicalPose {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  double pitch = 1.5707963267948966;
};

struct Scenario {
  Environment environment;
  std::vector<VirtualRail> rails;
  std::vector<Frame> frames;
  std::optional<Vec3> focus_point;  // e.g. a junction centre, used to aim
                                    // sensors at initialization
};

struct Triangle {
  Vec3 a, b, c;
};

/// Logistic function, 1 / (1 + exp(-z)). Saturates cleanly for large |z|.
double sigmoid(double z);

/// Inverse of sigmoid on (0, 1).
double logit(double p);

/// Rotation about world +Y.
Eigen::Matrix3d yaw_rotation(double yaw);

/// Maps unbounded rail parameters onto the rail segment and bounded
/// viewing angles: position = p1 + sigmoid(t) * (p2 - p1),
/// yaw = 2*pi*sigmoid(alpha), pitch = pi*sigmoid(beta).
CanonicalPose rail_to_canonical(const VirtualRail& rail, const RailPose& pose);

/// Triangulates the box into 12 triangles (2 per face) with consistent
/// outward winding. Vertices are the yawed-and-translated corners.
std::vector<Triangle> box_to_mesh(const ObjectBox& box);

/// Samples `count` points on the box surface, with faces selected
/// proportionally to their areas and points uniform within each face.
/// Deterministic given the seed.
std::vector<Vec3> sample_surface_points(const ObjectBox& box, int count,
                                        std::uint64_t rng_seed);

/// Unsigned distance from a point to the box surface (exact, for tests
/// and diagnostics).
double distance_to_box_surface(const Vec3& p, const ObjectBox& box);

/// Checks scenario invariants (positive extents, unique non-negative
/// object ids per frame, non-degenerate rails, at least one rail and one
/// frame). Throws PreconditionError on violation.
void validate(const Scenario& scenario);

}  // namespace visopt
