#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "visopt/camera.hpp"
#include "visopt/scene.hpp"

namespace visopt {

// Fragment-buffer identifiers. Target objects use their own non-negative
// ids; environment geometry maps to negative ids so object pixel counts
// are a straight equality test.
inline constexpr std::int32_t kBackgroundId = -1;
inline constexpr std::int32_t kGroundId = -2;
inline constexpr std::int32_t env_box_id(std::size_t k) {
  return -3 - static_cast<std::int32_t>(k);
}

/// Per-pixel camera-axis depth in meters, row-major; +inf marks background.
struct DepthBuffer {
  int width = 0;
  int height = 0;
  std::vector<float> depth;

  static constexpr float kBackground = std::numeric_limits<float>::infinity();

  float at(int ix, int iy) const { return depth[std::size_t(iy) * width + ix]; }
  bool is_background(int ix, int iy) const {
    return !(at(ix, iy) < kBackground);
  }
};

/// Per-pixel source id, row-major; kBackgroundId where DepthBuffer is
/// background.
struct FragmentBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> frag;

  std::int32_t at(int ix, int iy) const {
    return frag[std::size_t(iy) * width + ix];
  }
};

struct CloudPoint {
  Vec3 point = Vec3::Zero();
  std::int32_t object_id = kBackgroundId;
  std::int32_t sensor_id = 0;
};

using PointCloud = std::vector<CloudPoint>;

/// One identified mesh: (fragment id, triangles).
using Mesh = std::pair<std::int32_t, std::vector<Triangle>>;

/// Triangle meshes for everything the sensors see in one frame: target
/// objects under their own ids, environment boxes and the ground under
/// negative ids.
std::vector<Mesh> scene_meshes(const Frame& frame, const Environment& env);

/// Renders the meshes into depth + fragment buffers. Pixel-center
/// sampling, top-left fill rule, perspective-correct depth, near-plane
/// clipping, far-plane fragment discard; equal-depth ties go to the
/// lowest mesh id.
std::pair<DepthBuffer, FragmentBuffer> rasterize(
    const std::vector<Mesh>& meshes, const CameraMatrices& cams,
    const Intrinsics& intr);

/// Lifts every non-background pixel back to a world-space point at its
/// pixel center, tagged with the fragment's object id and the sensor id.
PointCloud reproject(const DepthBuffer& db, const FragmentBuffer& fb,
                     const CameraMatrices& cams, std::int32_t sensor_id);

/// Integer visibility of one object across a sensor set: total pixels
/// whose fragment id matches the object, summed over per-sensor renders
/// of the full frame (environment included). Additive over sensors.
std::int64_t vis_metric(const ObjectBox& object,
                        const std::vector<CanonicalPose>& sensors,
                        const Frame& frame, const Environment& env,
                        const Intrinsics& intr);

/// Nearest-pixel depth lookup: floor to the pixel grid, clamped to the
/// image bounds. Background propagates as +inf.
double depth_lookup(const DepthBuffer& db, double u, double v);

}  // namespace visopt
