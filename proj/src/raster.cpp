#include "visopt/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace visopt {

namespace {

struct ScreenVertex {
  double u, v;     // pixel coordinates
  double inv_z;    // 1/depth — linear in screen space
};

// Sutherland-Hodgman clip of one camera-space triangle against z = z_near.
// Returns 0, 3 or 4 vertices.
int clip_near(const std::array<Vec3, 3>& in, double z_near,
              std::array<Vec3, 4>& out) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Vec3& a = in[i];
    const Vec3& b = in[(i + 1) % 3];
    const bool a_in = a.z() >= z_near;
    const bool b_in = b.z() >= z_near;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const double t = (z_near - a.z()) / (b.z() - a.z());
      out[n++] = a + t * (b - a);
    }
  }
  return n;
}

inline double orient2d(double ax, double ay, double bx, double by, double px,
                       double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Top-left fill rule for screen space with y growing downward and the
// interior on the right of each directed edge.
inline bool edge_top_left(const ScreenVertex& a, const ScreenVertex& b) {
  return (a.v == b.v && b.u > a.u) || (b.v < a.v);
}

void raster_triangle(ScreenVertex s0, ScreenVertex s1, ScreenVertex s2,
                     std::int32_t id, double d_near, double d_far,
                     DepthBuffer& db, FragmentBuffer& fb) {
  double area2 = orient2d(s0.u, s0.v, s1.u, s1.v, s2.u, s2.v);
  if (area2 == 0.0) return;
  if (area2 < 0.0) {
    std::swap(s1, s2);
    area2 = -area2;
  }

  const double min_u = std::min({s0.u, s1.u, s2.u});
  const double max_u = std::max({s0.u, s1.u, s2.u});
  const double min_v = std::min({s0.v, s1.v, s2.v});
  const double max_v = std::max({s0.v, s1.v, s2.v});
  const int ix0 = std::max(0, int(std::ceil(min_u - 0.5)));
  const int ix1 = std::min(db.width - 1, int(std::floor(max_u - 0.5)));
  const int iy0 = std::max(0, int(std::ceil(min_v - 0.5)));
  const int iy1 = std::min(db.height - 1, int(std::floor(max_v - 0.5)));
  if (ix0 > ix1 || iy0 > iy1) return;

  const bool tl0 = edge_top_left(s1, s2);
  const bool tl1 = edge_top_left(s2, s0);
  const bool tl2 = edge_top_left(s0, s1);

  for (int iy = iy0; iy <= iy1; ++iy) {
    const double py = iy + 0.5;
    for (int ix = ix0; ix <= ix1; ++ix) {
      const double px = ix + 0.5;
      const double w0 = orient2d(s1.u, s1.v, s2.u, s2.v, px, py);
      const double w1 = orient2d(s2.u, s2.v, s0.u, s0.v, px, py);
      const double w2 = orient2d(s0.u, s0.v, s1.u, s1.v, px, py);
      const bool inside = (w0 > 0.0 || (w0 == 0.0 && tl0)) &&
                          (w1 > 0.0 || (w1 == 0.0 && tl1)) &&
                          (w2 > 0.0 || (w2 == 0.0 && tl2));
      if (!inside) continue;
      const double inv_z =
          (w0 * s0.inv_z + w1 * s1.inv_z + w2 * s2.inv_z) / area2;
      if (!(inv_z > 0.0)) continue;
      double z = 1.0 / inv_z;
      if (z > d_far) continue;
      if (z < d_near) z = d_near;  // interpolation noise below the clip plane
      const std::size_t idx = std::size_t(iy) * db.width + ix;
      const float zf = static_cast<float>(z);
      if (zf < db.depth[idx] ||
          (zf == db.depth[idx] && id < fb.frag[idx])) {
        db.depth[idx] = zf;
        fb.frag[idx] = id;
      }
    }
  }
}

}  // namespace

std::vector<Mesh> scene_meshes(const Frame& frame, const Environment& env) {
  std::vector<Mesh> meshes;
  meshes.reserve(frame.objects.size() + env.static_boxes.size() + 1);
  for (const ObjectBox& obj : frame.objects)
    meshes.emplace_back(obj.id, box_to_mesh(obj));
  for (std::size_t k = 0; k < env.static_boxes.size(); ++k)
    meshes.emplace_back(env_box_id(k), box_to_mesh(env.static_boxes[k]));
  const GroundRect& g = env.ground;
  const Vec3 c00(g.min_x, g.y, g.min_z);
  const Vec3 c01(g.min_x, g.y, g.max_z);
  const Vec3 c11(g.max_x, g.y, g.max_z);
  const Vec3 c10(g.max_x, g.y, g.min_z);
  meshes.emplace_back(
      kGroundId,
      std::vector<Triangle>{Triangle{c00, c01, c11}, Triangle{c00, c11, c10}});
  return meshes;
}

std::pair<DepthBuffer, FragmentBuffer> rasterize(
    const std::vector<Mesh>& meshes, const CameraMatrices& cams,
    const Intrinsics& intr) {
  DepthBuffer db;
  db.width = intr.width;
  db.height = intr.height;
  db.depth.assign(std::size_t(intr.width) * intr.height,
                  DepthBuffer::kBackground);
  FragmentBuffer fb;
  fb.width = intr.width;
  fb.height = intr.height;
  fb.frag.assign(db.depth.size(), kBackgroundId);

  const double f = cams.intrinsic(0, 0);
  const double cx = cams.intrinsic(0, 2);
  const double cy = cams.intrinsic(1, 2);
  const Eigen::Matrix3d r = cams.extrinsic.leftCols<3>();
  const Vec3 t = cams.extrinsic.col(3);

  for (const Mesh& mesh : meshes) {
    for (const Triangle& tri : mesh.second) {
      const std::array<Vec3, 3> cam_tri = {r * tri.a + t, r * tri.b + t,
                                           r * tri.c + t};
      std::array<Vec3, 4> poly;
      const int n = clip_near(cam_tri, intr.d_near, poly);
      if (n < 3) continue;
      std::array<ScreenVertex, 4> sv;
      for (int i = 0; i < n; ++i) {
        const double inv_z = 1.0 / poly[i].z();
        sv[i] = ScreenVertex{f * poly[i].x() * inv_z + cx,
                             f * poly[i].y() * inv_z + cy, inv_z};
      }
      for (int i = 2; i < n; ++i)
        raster_triangle(sv[0], sv[i - 1], sv[i], mesh.first, intr.d_near,
                        intr.d_far, db, fb);
    }
  }
  return {std::move(db), std::move(fb)};
}

PointCloud reproject(const DepthBuffer& db, const FragmentBuffer& fb,
                     const CameraMatrices& cams, std::int32_t sensor_id) {
  PointCloud cloud;
  for (int iy = 0; iy < db.height; ++iy) {
    for (int ix = 0; ix < db.width; ++ix) {
      if (db.is_background(ix, iy)) continue;
      const ImagePoint ip{ix + 0.5, iy + 0.5, double(db.at(ix, iy))};
      cloud.push_back(CloudPoint{unproject(ip, cams), fb.at(ix, iy),
                                 sensor_id});
    }
  }
  return cloud;
}

std::int64_t vis_metric(const ObjectBox& object,
                        const std::vector<CanonicalPose>& sensors,
                        const Frame& frame, const Environment& env,
                        const Intrinsics& intr) {
  const std::vector<Mesh> meshes = scene_meshes(frame, env);
  std::int64_t count = 0;
  for (const CanonicalPose& pose : sensors) {
    const auto [db, fb] = rasterize(meshes, camera_matrices(pose, intr), intr);
    for (const std::int32_t id : fb.frag)
      if (id == object.id) ++count;
  }
  return count;
}

double depth_lookup(const DepthBuffer& db, double u, double v) {
  const int ix =
      std::clamp(int(std::floor(u)), 0, db.width - 1);
  const int iy =
      std::clamp(int(std::floor(v)), 0, db.height - 1);
  return double(db.at(ix, iy));
}

}  // namespace visopt
