#pragma once

#include <optional>

#include <Eigen/Core>

#include "depthrefine/grid.hpp"

namespace depthrefine {

// Camera frame: +x right, +y down, +z forward.
using Point3 = Eigen::Vector3d;

struct Pixel {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

class BehindCameraError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  // Throws DomainError when fx, fy are not positive or the principal point
  // lies outside [0, width) x [0, height).
  void validate() const;
};

// Maps points from a source frame into a target frame: p' = R p + t.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }
  // Rotation about the camera y axis (vertical in the image), radians.
  static RigidTransform from_yaw(double yaw, const Eigen::Vector3d& t = Eigen::Vector3d::Zero());

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;

  // (a * b).apply(p) == a.apply(b.apply(p))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    return {a.rotation_ * b.rotation_, a.rotation_ * b.translation_ + a.translation_};
  }

  bool is_rotation(double tol = 1e-9) const;
  bool approx_equal(const RigidTransform& other, double tol = 1e-9) const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

struct StereoRig {
  double baseline = 0.5;
  CameraIntrinsics intrinsics;
};

// Back-projects pixel x at the given z-depth: depth * K^-1 [u v 1]^T.
Point3 lift(const Pixel& x, double depth, const CameraIntrinsics& K);

Point3 transform_point(const RigidTransform& Q, const Point3& c);

// pi(K c). Throws BehindCameraError if c.z <= 0.
Pixel project(const CameraIntrinsics& K, const Point3& c);

// Non-throwing variant for per-pixel loops; nullopt when c.z <= 0.
std::optional<Pixel> try_project(const CameraIntrinsics& K, const Point3& c);

// Left camera -> right camera of a rectified rig: identity rotation,
// translation (-B, 0, 0).
RigidTransform stereo_rig_transform(const StereoRig& rig);

double depth_from_disparity(double disparity, double focal, double baseline);
double disparity_from_depth(double depth, double focal, double baseline);

// Given world-from-camera poses of frames i and j, returns the transform
// taking camera-i coordinates to camera-j coordinates.
RigidTransform relative_pose(const RigidTransform& pose_i, const RigidTransform& pose_j);

}  // namespace depthrefine
