#include "depthrefine/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace depthrefine {

namespace {

constexpr double kMinHitDistance = 1e-9;
// Co-visibility tolerance: relative depth agreement and round-trip pixels.
constexpr double kVisibilityTolerance = 1e-6;

// splitmix64 finalizer, used to derive per-primitive texture phases.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double phase(std::uint64_t seed, int primitive, int k) {
  const std::uint64_t h = mix(seed * 1000003ULL + static_cast<std::uint64_t>(primitive) * 7919ULL + k);
  return 2.0 * std::numbers::pi * static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53);
}

double texture_value(const SceneSpec& spec, int primitive, const Eigen::Vector3d& X) {
  const Texture& t = spec.primitives[static_cast<std::size_t>(primitive)].texture;
  if (t.amplitude == 0.0) {
    return 0.5;
  }
  const double k = 2.0 * std::numbers::pi / t.wavelength;
  const double a = std::sin(k * X.x() + phase(spec.seed, primitive, 0)) * std::cos(k * X.y() + phase(spec.seed, primitive, 1));
  const double b = std::sin(0.7 * k * (0.6 * X.x() + 0.8 * X.z()) + phase(spec.seed, primitive, 2));
  return 0.5 + t.amplitude * 0.5 * (a + b);
}

std::optional<double> intersect(const Primitive& prim, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) {
  return std::visit(
      [&](const auto& s) -> std::optional<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FrontoPlane> || std::is_same_v<T, SlantedPlane>) {
          Eigen::Vector3d n;
          double offset;
          if constexpr (std::is_same_v<T, FrontoPlane>) {
            n = Eigen::Vector3d::UnitZ();
            offset = s.z;
          } else {
            n = s.normal;
            offset = s.offset;
          }
          const double denom = n.dot(dir);
          if (denom == 0.0) {
            return std::nullopt;
          }
          const double t = (offset - n.dot(origin)) / denom;
          return t > kMinHitDistance ? std::optional<double>(t) : std::nullopt;
        } else {
          const Eigen::Vector3d oc = origin - s.center;
          const double a = dir.squaredNorm();
          const double b = 2.0 * oc.dot(dir);
          const double c = oc.squaredNorm() - s.radius * s.radius;
          const double disc = b * b - 4.0 * a * c;
          if (disc < 0.0) {
            return std::nullopt;
          }
          const double sq = std::sqrt(disc);
          const double t0 = (-b - sq) / (2.0 * a);
          const double t1 = (-b + sq) / (2.0 * a);
          if (t0 > kMinHitDistance) return t0;
          if (t1 > kMinHitDistance) return t1;
          return std::nullopt;
        }
      },
      prim.shape);
}

}  // namespace

RigidTransform SceneSpec::pose(const ViewId& id) const {
  const double k = id.frame;
  const RigidTransform left = RigidTransform::from_yaw(path.yaw_start + k * path.yaw_rate, path.start + k * path.velocity);
  if (id.view == View::Left) {
    return left;
  }
  return left * stereo_rig_transform(rig).inverse();
}

void SceneSpec::validate() const {
  if (frames < 2) {
    throw DomainError("scene needs at least 2 frames");
  }
  if (primitives.empty()) {
    throw DomainError("scene has no primitives");
  }
  rig.intrinsics.validate();
  if (!(rig.baseline > 0.0)) {
    throw DomainError("stereo baseline must be positive");
  }
  for (const auto& p : primitives) {
    if (!(p.texture.wavelength > 0.0) || p.texture.amplitude < 0.0) {
      throw DomainError("texture wavelength must be positive and amplitude non-negative");
    }
    if (const auto* s = std::get_if<Sphere>(&p.shape); s && !(s->radius > 0.0)) {
      throw DomainError("sphere radius must be positive");
    }
    if (const auto* s = std::get_if<SlantedPlane>(&p.shape); s && !(s->normal.norm() > 0.0)) {
      throw DomainError("plane normal must be non-zero");
    }
  }
}

std::vector<std::string> SceneSpec::presets() { return {"planes", "sphere", "mixed"}; }

SceneSpec SceneSpec::desk(const std::string& preset, std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.rig.baseline = 0.5;
  s.rig.intrinsics = CameraIntrinsics{60.0, 60.0, 31.5, 23.5, 64, 48};
  s.frames = 5;

  const Primitive background{FrontoPlane{20.0}, Texture{0.03, 8.0}};
  const Eigen::Vector3d slant_normal = Eigen::Vector3d(0.57, 0.12, 0.81).normalized();
  const Primitive slanted{SlantedPlane{slant_normal, slant_normal.dot(Eigen::Vector3d(-1.0, 0.0, 10.0))},
                          Texture{0.03, 5.5}};
  if (preset == "planes") {
    s.primitives = {slanted, background};
  } else if (preset == "sphere") {
    s.primitives = {Primitive{Sphere{{0.3, 0.1, 8.0}, 1.5}, Texture{0.03, 4.0}}, background};
  } else if (preset == "mixed") {
    s.primitives = {Primitive{Sphere{{0.6, 0.2, 7.5}, 1.2}, Texture{0.03, 4.0}},
                    Primitive{Sphere{{-1.6, -0.9, 11.0}, 0.9}, Texture{0.03, 4.0}}, slanted, background};
  } else {
    throw DomainError("unknown scene preset '" + preset + "'");
  }
  return s;
}

std::optional<RayHit> raycast(const SceneSpec& spec, const RigidTransform& world_from_camera, const Pixel& p) {
  const CameraIntrinsics& K = spec.rig.intrinsics;
  const Eigen::Vector3d ray((p.u - K.cx) / K.fx, (p.v - K.cy) / K.fy, 1.0);
  const Eigen::Vector3d dir = world_from_camera.rotation() * ray;
  const Eigen::Vector3d& origin = world_from_camera.translation();

  std::optional<RayHit> best;
  for (std::size_t i = 0; i < spec.primitives.size(); ++i) {
    auto t = intersect(spec.primitives[i], origin, dir);
    if (t && (!best || *t < best->depth)) {
      // ray has unit camera-z component, so the ray parameter is the depth
      best = RayHit{*t, static_cast<int>(i), origin + *t * dir};
    }
  }
  return best;
}

DepthMap render_depth(const SceneSpec& spec, const ViewId& id) {
  const CameraIntrinsics& K = spec.rig.intrinsics;
  const RigidTransform pose = spec.pose(id);
  DepthMap d(K.width, K.height, 0.0);
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      auto hit = raycast(spec, pose, {double(u), double(v)});
      if (!hit) {
        throw DomainError("scene is not closed: pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                          ") of frame " + std::to_string(id.frame) + " hits nothing");
      }
      d(u, v) = hit->depth;
    }
  }
  return d;
}

Image render_image(const SceneSpec& spec, const ViewId& id) {
  const CameraIntrinsics& K = spec.rig.intrinsics;
  const RigidTransform pose = spec.pose(id);
  Image img(K.width, K.height, 0.0);
  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      auto hit = raycast(spec, pose, {double(u), double(v)});
      img(u, v) = hit ? texture_value(spec, hit->primitive, hit->world) : 0.0;
    }
  }
  return img;
}

namespace {

FlowField flow_from_depth(const DepthMap& depth, const CameraIntrinsics& K, const RigidTransform& target_from_source) {
  FlowField flow(depth.width(), depth.height());
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const auto p = try_project(K, target_from_source.apply(lift({double(u), double(v)}, depth(u, v), K)));
      if (p) {
        flow(u, v) = {p->u - u, p->v - v};
      }
    }
  }
  return flow;
}

}  // namespace

ExactFlow exact_flow(const SceneSpec& spec, const ViewId& source, const ViewId& target) {
  const CameraIntrinsics& K = spec.rig.intrinsics;
  const RigidTransform src_pose = spec.pose(source);
  const RigidTransform tgt_pose = spec.pose(target);
  const RigidTransform tgt_from_src = relative_pose(src_pose, tgt_pose);
  const RigidTransform src_from_tgt = tgt_from_src.inverse();
  const DepthMap src_depth = render_depth(spec, source);
  const DepthMap tgt_depth = render_depth(spec, target);

  ExactFlow out{flow_from_depth(src_depth, K, tgt_from_src), flow_from_depth(tgt_depth, K, src_from_tgt),
                ValidityMask(K.width, K.height, 0), ValidityMask(K.width, K.height, 0)};

  for (int v = 0; v < K.height; ++v) {
    for (int u = 0; u < K.width; ++u) {
      const Point3 c = tgt_from_src.apply(lift({double(u), double(v)}, src_depth(u, v), K));
      const auto p = try_project(K, c);
      if (!p || !bilinear_stencil(K.width, K.height, *p)) {
        continue;
      }
      const auto hit = raycast(spec, tgt_pose, *p);
      if (!hit || std::abs(hit->depth - c.z()) > kVisibilityTolerance * c.z()) {
        continue;
      }
      const auto back = try_project(K, src_from_tgt.apply(lift(*p, hit->depth, K)));
      if (!back || std::hypot(back->u - u, back->v - v) > kVisibilityTolerance) {
        continue;
      }
      out.mask(u, v) = 1;
      const BilinearStencil s = *bilinear_stencil(K.width, K.height, *p);
      double inv = 0.0;
      for (int k = 0; k < s.count; ++k) {
        inv += s.weight[k] / tgt_depth(s.u[k], s.v[k]);
      }
      // The disparity residual must sit inside the loss's stationary dead zone,
      // otherwise exact depths would still receive a gradient.
      if (std::abs(inv * c.z() - 1.0) <= kVisibilityTolerance &&
          K.fx * std::abs(inv - 1.0 / c.z()) <= 0.5 * kStationaryResidual) {
        out.exact(u, v) = 1;
      }
    }
  }
  return out;
}

DepthMap gaussian_blur(const DepthMap& depth, double radius) {
  if (!(radius > 0.0)) {
    return depth;
  }
  const int half = static_cast<int>(std::ceil(radius));
  const double sigma = radius / 2.0;
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  for (int k = -half; k <= half; ++k) {
    kernel[static_cast<std::size_t>(k + half)] = std::exp(-0.5 * k * k / (sigma * sigma));
  }

  auto pass = [&](const DepthMap& in, int du, int dv) {
    DepthMap out = in;
    for (int v = 0; v < in.height(); ++v) {
      for (int u = 0; u < in.width(); ++u) {
        if (!in.valid(u, v)) {
          continue;
        }
        double sum = 0.0, wsum = 0.0;
        for (int k = -half; k <= half; ++k) {
          const int uu = std::clamp(u + k * du, 0, in.width() - 1);
          const int vv = std::clamp(v + k * dv, 0, in.height() - 1);
          if (in.valid(uu, vv)) {
            const double w = kernel[static_cast<std::size_t>(k + half)];
            sum += w * in(uu, vv);
            wsum += w;
          }
        }
        out(u, v) = sum / wsum;
      }
    }
    return out;
  };
  return pass(pass(depth, 1, 0), 0, 1);
}

std::vector<DepthMap> perturb(const std::vector<DepthMap>& depths, const Perturbation& p) {
  if (!(p.scale > 0.0) || p.noise_sigma < 0.0 || p.blur_radius < 0.0) {
    throw DomainError("perturbation needs scale > 0, sigma >= 0 and radius >= 0");
  }
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DepthMap> out;
  out.reserve(depths.size());
  for (const auto& d : depths) {
    DepthMap m = gaussian_blur(d, p.blur_radius);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!DepthMap::valid_value(m[i])) {
        continue;
      }
      if (p.noise_sigma > 0.0) {
        m[i] *= std::exp(p.noise_sigma * normal(rng));
      }
      m[i] *= p.scale;
    }
    out.push_back(std::move(m));
  }
  return out;
}

SyntheticBundle make_bundle(const SceneSpec& spec, FrameSampling sampling) {
  spec.validate();
  SyntheticBundle sb;
  sb.spec = spec;
  VideoBundle& b = sb.bundle;
  b.rig = spec.rig;
  for (int i = 0; i < spec.frames; ++i) {
    const ViewId l{i, View::Left};
    const ViewId r{i, View::Right};
    b.trajectory.push_back(spec.pose(l));
    sb.gt_left.push_back(render_depth(spec, l));
    sb.gt_right.push_back(render_depth(spec, r));
    b.left_images.push_back(render_image(spec, l));
    b.right_images.push_back(render_image(spec, r));
  }
  b.left_depth = sb.gt_left;
  b.right_depth = sb.gt_right;

  const PairSets pairs = build_pair_sets(spec.frames, sampling);
  auto add = [&](const FramePair& p) {
    const ViewId src{p.source, View::Left};
    const ViewId tgt{p.target, p.kind == PairKind::LeftRight ? View::Right : View::Left};
    ExactFlow f = exact_flow(spec, src, tgt);
    sb.covisibility.emplace(p, std::move(f.mask));
    b.flows.emplace(p, PairFlows{std::move(f.forward), std::move(f.backward), std::move(f.exact)});
  };
  for (const auto& p : pairs.left_right) add(p);
  for (const auto& p : pairs.temporal) add(p);
  return sb;
}

}  // namespace depthrefine
