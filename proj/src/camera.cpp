#include "visopt/camera.hpp"

#include <cmath>

#include "visopt/errors.hpp"

namespace visopt {

double focal_pixels(const Intrinsics& intr) {
  return (intr.width / 2.0) / std::tan(intr.hfov / 2.0);
}

Eigen::Matrix3d intrinsic_matrix(const Intrinsics& intr) {
  const double f = focal_pixels(intr);
  Eigen::Matrix3d k;
  k << f, 0.0, intr.width / 2.0,
       0.0, f, intr.height / 2.0,
       0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d camera_rotation(double yaw, double pitch) {
  // R_cw = R_Y(yaw) * R_X(pi/2 - pitch). Pitch 0 aims straight down,
  // pi/2 horizontal, pi straight up.
  const double a = 3.14159265358979323846 / 2.0 - pitch;
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cx = std::cos(a), sx = std::sin(a);
  Eigen::Matrix3d ry;
  ry << cy, 0.0, sy,
        0.0, 1.0, 0.0,
        -sy, 0.0, cy;
  Eigen::Matrix3d rx;
  rx << 1.0, 0.0, 0.0,
        0.0, cx, -sx,
        0.0, sx, cx;
  return ry * rx;
}

Vec3 camera_forward(double yaw, double pitch) {
  return camera_rotation(yaw, pitch) * Vec3(0.0, 0.0, 1.0);
}

Eigen::Matrix<double, 3, 4> extrinsic_matrix(const CanonicalPose& pose) {
  const Eigen::Matrix3d r_wc =
      camera_rotation(pose.yaw, pose.pitch).transpose();
  Eigen::Matrix<double, 3, 4> ext;
  ext.leftCols<3>() = r_wc;
  ext.col(3) = -r_wc * pose.position;
  return ext;
}

CameraMatrices camera_matrices(const CanonicalPose& pose,
                               const Intrinsics& intr) {
  return CameraMatrices{intrinsic_matrix(intr), extrinsic_matrix(pose)};
}

std::optional<ImagePoint> project(const Vec3& p, const CameraMatrices& cams) {
  const Vec3 pc = cams.extrinsic * p.homogeneous();
  if (std::abs(pc.z()) < 1e-12) return std::nullopt;
  const Vec3 uvw = cams.intrinsic * pc;
  return ImagePoint{uvw.x() / pc.z(), uvw.y() / pc.z(), pc.z()};
}

Vec3 unproject(const ImagePoint& ip, const CameraMatrices& cams) {
  if (ip.d <= 0.0)
    throw PreconditionError("unproject requires positive depth");
  const double f = cams.intrinsic(0, 0);
  const double cx = cams.intrinsic(0, 2);
  const double cy = cams.intrinsic(1, 2);
  const Vec3 pc((ip.u - cx) * ip.d / f, (ip.v - cy) * ip.d / f, ip.d);
  const Eigen::Matrix3d r_wc = cams.extrinsic.leftCols<3>();
  return r_wc.transpose() * (pc - cams.extrinsic.col(3));
}

bool in_frustum(const ImagePoint& ip, const Intrinsics& intr) {
  return ip.u >= 0.0 && ip.u <= intr.width && ip.v >= 0.0 &&
         ip.v <= intr.height && ip.d >= intr.d_near && ip.d <= intr.d_far;
}

}  // namespace visopt
