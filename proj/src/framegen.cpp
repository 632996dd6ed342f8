#include "visopt/framegen.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "visopt/errors.hpp"
#include "visopt/rng.hpp"

namespace visopt {

namespace {

std::array<Eigen::Vector2d, 4> footprint_corners(const ObjectBox& b) {
  const double hw = b.size.x() / 2.0, hl = b.size.z() / 2.0;
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  // The yaw rotation maps local (x,z) to world (c*x + s*z, -s*x + c*z).
  std::array<Eigen::Vector2d, 4> out;
  const double lx[4] = {-hw, hw, hw, -hw};
  const double lz[4] = {-hl, -hl, hl, hl};
  for (int i = 0; i < 4; ++i) {
    out[i] = Eigen::Vector2d(b.center.x() + c * lx[i] + s * lz[i],
                             b.center.z() - s * lx[i] + c * lz[i]);
  }
  return out;
}

bool separated_on_axes(const std::array<Eigen::Vector2d, 4>& a,
                       const std::array<Eigen::Vector2d, 4>& b) {
  // Test the two edge normals of rectangle `a` as candidate separating axes.
  for (int e = 0; e < 2; ++e) {
    const Eigen::Vector2d edge = a[e + 1] - a[e];
    const Eigen::Vector2d axis(-edge.y(), edge.x());
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = amax;
    for (int i = 0; i < 4; ++i) {
      const double pa = axis.dot(a[i]);
      const double pb = axis.dot(b[i]);
      amin = std::min(amin, pa);
      amax = std::max(amax, pa);
      bmin = std::min(bmin, pb);
      bmax = std::max(bmax, pb);
    }
    if (amax < bmin || bmax < amin) return true;
  }
  return false;
}

}  // namespace

bool footprints_overlap(const ObjectBox& a, const ObjectBox& b) {
  const auto ca = footprint_corners(a);
  const auto cb = footprint_corners(b);
  return !separated_on_axes(ca, cb) && !separated_on_axes(cb, ca);
}

std::vector<Frame> generate_frames(const FrameGenConfig& config,
                                   std::uint64_t rng_seed) {
  if (config.lanes.empty())
    throw PreconditionError("frame generation needs at least one lane");
  if (config.frame_count < 1)
    throw PreconditionError("frame_count must be >= 1");
  if (config.min_objects < 1 || config.max_objects < config.min_objects)
    throw PreconditionError("object count range is invalid");
  if (config.min_width <= 0.0 || config.max_width < config.min_width ||
      config.min_height <= 0.0 || config.max_height < config.min_height ||
      config.min_length <= 0.0 || config.max_length < config.min_length)
    throw PreconditionError("size ranges must be positive and ordered");
  for (const LaneSpec& lane : config.lanes) {
    if (lane.max_x <= lane.min_x || lane.max_z <= lane.min_z)
      throw PreconditionError("lane rectangle is degenerate");
  }

  Rng rng(rng_seed);
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(config.frame_count));
  const std::uint64_t span =
      static_cast<std::uint64_t>(config.max_objects - config.min_objects) + 1;

  for (int fi = 0; fi < config.frame_count; ++fi) {
    Frame frame;
    frame.id = fi;
    const int want =
        config.min_objects + static_cast<int>(rng.uniform_int(span));
    for (int oi = 0; oi < want; ++oi) {
      bool placed = false;
      for (int attempt = 0; attempt < config.max_retries; ++attempt) {
        const LaneSpec& lane =
            config.lanes[rng.uniform_int(config.lanes.size())];
        ObjectBox box;
        box.id = oi;
        box.size = Vec3(rng.uniform(config.min_width, config.max_width),
                        rng.uniform(config.min_height, config.max_height),
                        rng.uniform(config.min_length, config.max_length));
        box.center = Vec3(rng.uniform(lane.min_x, lane.max_x),
                          config.ground_y + box.size.y() / 2.0,
                          rng.uniform(lane.min_z, lane.max_z));
        box.yaw = lane.heading +
                  rng.uniform(-config.yaw_jitter, config.yaw_jitter);
        bool clear = true;
        for (const ObjectBox& other : frame.objects) {
          if (footprints_overlap(box, other)) {
            clear = false;
            break;
          }
        }
        if (clear) {
          frame.objects.push_back(box);
          placed = true;
          break;
        }
      }
      if (!placed)
        throw PreconditionError(
            "object density too high: placement failed after retry budget");
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace visopt
