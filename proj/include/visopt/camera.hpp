#pragma once

#include <Eigen/Core>
#include <optional>

#include "visopt/scene.hpp"

namespace visopt {

/// Pinhole camera intrinsic description. Square pixels, principal point at
/// the image centre.
struct Intrinsics {
  int width = 200;
  int height = 200;
  double hfov = 1.5707963267948966;  // horizontal field of view, radians
  double d_near = 1.0;               // near clipping plane, meters
  double d_far = 100.0;              // far clipping plane, meters
};

/// Intrinsic and extrinsic (world -> camera) matrices of one sensor.
struct CameraMatrices {
  Eigen::Matrix3d intrinsic;
  Eigen::Matrix<double, 3, 4> extrinsic;
};

/// Image-plane projection of a point: pixel coordinates and camera-axis
/// depth. May lie outside the image or behind the camera (d < 0).
struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;
};

double focal_pixels(const Intrinsics& intr);

/// Standard pinhole intrinsic matrix with the focal length derived from
/// the horizontal field of view: focal = (W/2) / tan(hfov/2).
Eigen::Matrix3d intrinsic_matrix(const Intrinsics& intr);

/// Camera-to-world rotation for the project's pose convention: yaw about
/// world +Y, then pitch about the camera X axis; the camera looks along
/// its +Z axis. At yaw=0, pitch=pi/2 the rotation is the identity.
Eigen::Matrix3d camera_rotation(double yaw, double pitch);

/// World-frame direction of the optical axis.
Vec3 camera_forward(double yaw, double pitch);

/// World -> camera transform [R | t] with t = -R * position.
Eigen::Matrix<double, 3, 4> extrinsic_matrix(const CanonicalPose& pose);

CameraMatrices camera_matrices(const CanonicalPose& pose,
                               const Intrinsics& intr);

/// Projects a world point into the image plane. Returns nullopt when the
/// point lies in the camera plane (|depth| < 1e-12); points behind the
/// camera project with d < 0.
std::optional<ImagePoint> project(const Vec3& p, const CameraMatrices& cams);

/// Inverse of project for d > 0. Throws PreconditionError for d <= 0.
Vec3 unproject(const ImagePoint& ip, const CameraMatrices& cams);

/// Frustum membership with inclusive bounds:
/// 0 <= u <= W, 0 <= v <= H, d_near <= d <= d_far.
bool in_frustum(const ImagePoint& ip, const Intrinsics& intr);

}  // namespace visopt
