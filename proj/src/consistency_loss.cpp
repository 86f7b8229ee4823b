#include "depthrefine/consistency_loss.hpp"

#include <cmath>
#include <string>

namespace depthrefine {

namespace {

struct PixelTerms {
  double spatial = 0.0;
  double disparity = 0.0;
  double d_spatial_d_source = 0.0;
  double d_disparity_d_source = 0.0;
  // d(disparity)/d(target depth) at each stencil tap.
  double d_disparity_d_tap[4] = {0.0, 0.0, 0.0, 0.0};
  BilinearStencil stencil;
  bool has_disparity = false;
};

bool has_target(const FramePairContext& ctx) { return ctx.target_depth.size() > 0; }

void check_shapes(const FramePairContext& ctx) {
  const int w = ctx.source_depth.width();
  const int h = ctx.source_depth.height();
  if (!ctx.flow.same_shape(w, h) || !ctx.mask.same_shape(w, h)) {
    throw DomainError("frame pair: source depth, flow and mask dimensions differ");
  }
}

std::optional<PixelTerms> evaluate_pixel(int u, int v, const FramePairContext& ctx) {
  if (!ctx.mask(u, v)) {
    return std::nullopt;
  }
  const double depth = ctx.source_depth(u, v);
  if (!DepthMap::valid_value(depth)) {
    return std::nullopt;
  }
  const CameraIntrinsics& K = ctx.intrinsics;
  const Eigen::Vector3d ray((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
  const Eigen::Vector3d b = ctx.transform.rotation() * ray;
  const Eigen::Vector3d c = depth * b + ctx.transform.translation();
  const double z = c.z();
  if (!(z > 0.0)) {
    return std::nullopt;
  }

  const FlowVector& F = ctx.flow(u, v);
  const Pixel f{u + F.du, v + F.dv};

  PixelTerms t;
  if (has_target(ctx)) {
    auto stencil = bilinear_stencil(ctx.target_depth.width(), ctx.target_depth.height(), f);
    if (!stencil) {
      return std::nullopt;
    }
    // inverse depth is interpolated: it is affine in pixel coordinates on planes
    double inv_target = 0.0;
    for (int k = 0; k < stencil->count; ++k) {
      const double d = ctx.target_depth(stencil->u[k], stencil->v[k]);
      if (!DepthMap::valid_value(d)) {
        return std::nullopt;
      }
      inv_target += stencil->weight[k] / d;
    }
    const double diff = 1.0 / z - inv_target;
    t.has_disparity = true;
    t.stencil = *stencil;
    t.disparity = K.fx * std::abs(diff);
    const double sign = t.disparity > kStationaryResidual ? (diff > 0.0 ? 1.0 : -1.0) : 0.0;
    t.d_disparity_d_source = K.fx * sign * (-b.z() / (z * z));
    for (int k = 0; k < stencil->count; ++k) {
      const double d = ctx.target_depth(stencil->u[k], stencil->v[k]);
      t.d_disparity_d_tap[k] = K.fx * sign * stencil->weight[k] / (d * d);
    }
  } else if (!bilinear_stencil(ctx.flow.width(), ctx.flow.height(), f)) {
    return std::nullopt;
  }

  const double pu = K.fx * c.x() / z + K.cx;
  const double pv = K.fy * c.y() / z + K.cy;
  const double ru = pu - f.u;
  const double rv = pv - f.v;
  t.spatial = std::hypot(ru, rv);
  if (t.spatial > kStationaryResidual) {
    const double dpu = K.fx * (b.x() * z - c.x() * b.z()) / (z * z);
    const double dpv = K.fy * (b.y() * z - c.y() * b.z()) / (z * z);
    t.d_spatial_d_source = (ru * dpu + rv * dpv) / t.spatial;
  }
  return t;
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda >= 0.0) || !(w_edge >= 0.0)) {
    throw DomainError("loss weights must be non-negative");
  }
}

std::optional<double> spatial_residual(const Pixel& x, const FramePairContext& ctx) {
  check_shapes(ctx);
  const int u = static_cast<int>(x.u);
  const int v = static_cast<int>(x.v);
  if (u != x.u || v != x.v || !ctx.mask.contains(u, v)) {
    throw DomainError("spatial_residual: x must be an integral in-bounds pixel");
  }
  auto t = evaluate_pixel(u, v, ctx);
  if (!t) {
    return std::nullopt;
  }
  return t->spatial;
}

std::optional<double> disparity_residual(const Pixel& x, const FramePairContext& ctx) {
  check_shapes(ctx);
  const int u = static_cast<int>(x.u);
  const int v = static_cast<int>(x.v);
  if (u != x.u || v != x.v || !ctx.mask.contains(u, v)) {
    throw DomainError("disparity_residual: x must be an integral in-bounds pixel");
  }
  auto t = evaluate_pixel(u, v, ctx);
  if (!t || !t->has_disparity) {
    return std::nullopt;
  }
  return t->disparity;
}

PairLossBreakdown accumulate_pair_loss(const FramePairContext& ctx, const LossWeights& w, double scale,
                                       Grid<double>* d_source, Grid<double>* d_target) {
  check_shapes(ctx);
  if (d_source && !d_source->same_shape(ctx.source_depth.grid())) {
    throw DomainError("source gradient grid has the wrong shape");
  }
  if (d_target && has_target(ctx) && !d_target->same_shape(ctx.target_depth.grid())) {
    throw DomainError("target gradient grid has the wrong shape");
  }

  std::vector<std::pair<std::size_t, PixelTerms>> terms;
  terms.reserve(ctx.source_depth.size());
  PairLossBreakdown out;
  for (int v = 0; v < ctx.source_depth.height(); ++v) {
    for (int u = 0; u < ctx.source_depth.width(); ++u) {
      if (auto t = evaluate_pixel(u, v, ctx)) {
        out.spatial += t->spatial;
        out.disparity += t->disparity;
        terms.emplace_back(ctx.source_depth.grid().index(u, v), *t);
      }
    }
  }
  out.valid_count = terms.size();
  if (out.valid_count == 0) {
    return PairLossBreakdown{};
  }
  const double n = static_cast<double>(out.valid_count);
  out.spatial /= n;
  out.disparity /= n;
  out.combined = out.spatial + w.lambda * out.disparity;

  if (d_source || d_target) {
    const double k = scale / n;
    for (const auto& [idx, t] : terms) {
      if (d_source) {
        (*d_source)[idx] += k * (t.d_spatial_d_source + w.lambda * t.d_disparity_d_source);
      }
      if (d_target && t.has_disparity) {
        for (int s = 0; s < t.stencil.count; ++s) {
          (*d_target)(t.stencil.u[s], t.stencil.v[s]) += k * w.lambda * t.d_disparity_d_tap[s];
        }
      }
    }
  }
  return out;
}

PairLossBreakdown pair_loss(const FramePairContext& ctx, const LossWeights& w) {
  return accumulate_pair_loss(ctx, w, 1.0, nullptr, nullptr);
}

PairGradient pair_loss_gradient(const FramePairContext& ctx, const LossWeights& w) {
  PairGradient g{Grid<double>(ctx.source_depth.width(), ctx.source_depth.height(), 0.0),
                 Grid<double>(ctx.target_depth.width(), ctx.target_depth.height(), 0.0)};
  accumulate_pair_loss(ctx, w, 1.0, &g.source, has_target(ctx) ? &g.target : nullptr);
  return g;
}

GeometricLossReport geometric_loss(const std::vector<FramePairContext>& left_right,
                                   const std::vector<FramePairContext>& temporal, const LossWeights& w) {
  GeometricLossReport r;
  for (const auto& ctx : left_right) {
    r.left_right_pairs.push_back(pair_loss(ctx, w));
    r.left_right += r.left_right_pairs.back().combined;
  }
  for (const auto& ctx : temporal) {
    r.temporal_pairs.push_back(pair_loss(ctx, w));
    r.temporal += r.temporal_pairs.back().combined;
  }
  r.total = r.left_right + r.temporal;
  return r;
}

}  // namespace depthrefine
