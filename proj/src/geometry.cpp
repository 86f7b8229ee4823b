#include "depthrefine/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

namespace depthrefine {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw DomainError("focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw DomainError("image dimensions must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw DomainError("principal point must lie inside the image");
  }
}

RigidTransform RigidTransform::from_yaw(double yaw, const Eigen::Vector3d& t) {
  return {Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix(), t};
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

bool RigidTransform::is_rotation(double tol) const {
  const Eigen::Matrix3d should_be_identity = rotation_.transpose() * rotation_;
  return (should_be_identity - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(rotation_.determinant() - 1.0) <= tol;
}

bool RigidTransform::approx_equal(const RigidTransform& other, double tol) const {
  return (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
         (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
}

Point3 lift(const Pixel& x, double depth, const CameraIntrinsics& K) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw DomainError("lift: depth must be positive, got " + std::to_string(depth));
  }
  return {(x.u - K.cx) / K.fx * depth, (x.v - K.cy) / K.fy * depth, depth};
}

Point3 transform_point(const RigidTransform& Q, const Point3& c) { return Q.apply(c); }

std::optional<Pixel> try_project(const CameraIntrinsics& K, const Point3& c) {
  if (!(c.z() > 0.0)) {
    return std::nullopt;
  }
  return Pixel{K.fx * c.x() / c.z() + K.cx, K.fy * c.y() / c.z() + K.cy};
}

Pixel project(const CameraIntrinsics& K, const Point3& c) {
  auto p = try_project(K, c);
  if (!p) {
    throw BehindCameraError("project: point has z = " + std::to_string(c.z()));
  }
  return *p;
}

RigidTransform stereo_rig_transform(const StereoRig& rig) {
  if (!(rig.baseline > 0.0)) {
    throw DomainError("stereo baseline must be positive");
  }
  return RigidTransform::from_translation({-rig.baseline, 0.0, 0.0});
}

double depth_from_disparity(double disparity, double focal, double baseline) {
  if (!(disparity > 0.0)) {
    throw DomainError("depth_from_disparity: disparity must be positive");
  }
  return focal * baseline / disparity;
}

double disparity_from_depth(double depth, double focal, double baseline) {
  if (!(depth > 0.0)) {
    throw DomainError("disparity_from_depth: depth must be positive");
  }
  return focal * baseline / depth;
}

RigidTransform relative_pose(const RigidTransform& pose_i, const RigidTransform& pose_j) {
  return pose_j.inverse() * pose_i;
}

}  // namespace depthrefine
