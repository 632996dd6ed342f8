#pragma once

#include <cstdint>
#include <vector>

#include "visopt/scene.hpp"

namespace visopt {

/// Axis-aligned lane rectangle on the ground plane. Objects placed on the
/// lane get the lane's heading plus a small yaw jitter.
struct LaneSpec {
  double min_x = 0.0;
  double max_x = 0.0;
  double min_z = 0.0;
  double max_z = 0.0;
  double heading = 0.0;  // radians, rotation about +Y
};

/// Synthetic traffic-frame generator settings.
struct FrameGenConfig {
  std::vector<LaneSpec> lanes;
  int frame_count = 1;
  int min_objects = 1;
  int max_objects = 1;
  double min_width = 1.6, max_width = 2.2;    // local X extent
  double min_height = 1.4, max_height = 3.2;  // local Y extent
  double min_length = 3.5, max_length = 9.0;  // local Z extent
  double yaw_jitter = 0.12;                   // radians, uniform +-
  double ground_y = 0.0;
  int max_retries = 200;  // placement attempts per object before giving up
};

/// True when the ground-plane footprints of the two boxes intersect
/// (separating-axis test on the oriented rectangles; vertical extent is
/// ignored).
bool footprints_overlap(const ObjectBox& a, const ObjectBox& b);

/// Generates frames of random non-overlapping boxes on the configured
/// lanes. Deterministic given the seed. Throws PreconditionError when the
/// config is malformed or the requested density cannot be placed within
/// the retry budget.
std::vector<Frame> generate_frames(const FrameGenConfig& config,
                                   std::uint64_t rng_seed);

}  // namespace visopt
