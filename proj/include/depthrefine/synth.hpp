#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "depthrefine/flow.hpp"
#include "depthrefine/geometry.hpp"
#include "depthrefine/refiner.hpp"

namespace depthrefine {

// Procedural stereo-video scenes with exact ground truth. Everything is
// ray-cast at pixel centers in world coordinates (same axis convention as the
// camera frame at the identity pose).

// Band-limited sinusoid texture over world coordinates. Intensity depends only
// on the 3D surface point, so corresponding pixels share it exactly.
struct Texture {
  double amplitude = 0.03;
  double wavelength = 4.0;  // meters
};

struct FrontoPlane {
  double z = 20.0;  // world Z = z
};

struct SlantedPlane {
  Eigen::Vector3d normal{0.0, 0.0, 1.0};  // points n . X = offset
  double offset = 10.0;
};

struct Sphere {
  Eigen::Vector3d center{0.0, 0.0, 8.0};
  double radius = 1.0;
};

struct Primitive {
  std::variant<FrontoPlane, SlantedPlane, Sphere> shape;
  Texture texture;
};

// Per-frame pose of the left camera: yaw about the vertical axis and a
// translation that grows linearly with the frame index.
struct CameraPath {
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity{0.1, 0.0, 0.25};  // meters per frame
  double yaw_start = 0.0;
  double yaw_rate = 0.01;  // radians per frame
};

enum class View { Left, Right };

struct ViewId {
  int frame = 0;
  View view = View::Left;
};

struct SceneSpec {
  std::vector<Primitive> primitives;  // the last one should close the scene
  StereoRig rig;
  CameraPath path;
  int frames = 5;
  std::uint64_t seed = 0;  // texture phases

  // World-from-camera pose of a view.
  RigidTransform pose(const ViewId& id) const;
  void validate() const;

  // 64x48, 5 frames, B = 0.5 m, fx = fy = 60 px, closed by a background plane.
  static SceneSpec desk(const std::string& preset = "mixed", std::uint64_t seed = 0);
  static std::vector<std::string> presets();
};

struct RayHit {
  double depth = 0.0;  // camera z
  int primitive = -1;
  Eigen::Vector3d world = Eigen::Vector3d::Zero();
};

// Nearest hit along the ray through a (possibly fractional) pixel.
std::optional<RayHit> raycast(const SceneSpec& spec, const RigidTransform& world_from_camera, const Pixel& p);

// Throws DomainError if any pixel misses every primitive.
DepthMap render_depth(const SceneSpec& spec, const ViewId& id);

Image render_image(const SceneSpec& spec, const ViewId& id);

struct ExactFlow {
  FlowField forward;
  FlowField backward;
  // Analytic co-visibility of source pixels in the target view.
  ValidityMask mask;
  // Co-visible pixels whose target inverse depth, read bilinearly from the
  // rendered target grid, matches the true value within 1e-6 relative. Curved
  // surfaces and silhouettes fail this; this is the mask bundles carry.
  ValidityMask exact;
};

ExactFlow exact_flow(const SceneSpec& spec, const ViewId& source, const ViewId& target);

struct Perturbation {
  double noise_sigma = 0.0;  // std-dev of log-depth noise
  double blur_radius = 0.0;  // Gaussian kernel half-width in pixels (sigma = radius / 2)
  double scale = 1.0;
  std::uint64_t seed = 0;
};

// Blur, then multiplicative log-normal noise, then global scale. Invalid
// pixels pass through untouched.
std::vector<DepthMap> perturb(const std::vector<DepthMap>& depths, const Perturbation& p);
DepthMap gaussian_blur(const DepthMap& depth, double radius);

struct SyntheticBundle {
  SceneSpec spec;
  VideoBundle bundle;  // initial depths are the ground truth until perturbed
  std::vector<DepthMap> gt_left;
  std::vector<DepthMap> gt_right;
  std::map<FramePair, ValidityMask> covisibility;  // analytic, before the exactness test
};

// Renders every view and exact flows for all pairs the given sampling needs
// (hierarchical covers consecutive).
SyntheticBundle make_bundle(const SceneSpec& spec, FrameSampling sampling = FrameSampling::Hierarchical);

}  // namespace depthrefine
