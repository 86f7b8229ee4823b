#pragma once

#include <optional>
#include <vector>

#include "depthrefine/flow.hpp"
#include "depthrefine/geometry.hpp"
#include "depthrefine/grid.hpp"

namespace depthrefine {

// Weight of the inverse-depth term relative to the pixel-distance term.
inline constexpr double kDisparityWeight = 0.1;
inline constexpr double kDefaultEdgeWeight = 1.0;

// Residuals at or below this magnitude (pixels) are treated as exactly zero
// when differentiating, so a consistent configuration is a stationary point
// despite round-off in the reprojection.
inline constexpr double kStationaryResidual = 1e-9;

enum class PairKind { LeftRight, Temporal };

struct LossWeights {
  double lambda = kDisparityWeight;
  double w_edge = kDefaultEdgeWeight;

  void validate() const;
};

// One source->target correspondence problem. References must outlive the
// context. An empty target depth map disables the disparity term.
struct FramePairContext {
  const DepthMap& source_depth;
  const DepthMap& target_depth;
  const FlowField& flow;
  const ValidityMask& mask;
  RigidTransform transform;  // source camera -> target camera
  CameraIntrinsics intrinsics;
  PairKind kind = PairKind::Temporal;
};

struct PairLossBreakdown {
  double spatial = 0.0;    // mean pixel distance
  double disparity = 0.0;  // mean focal-scaled inverse-depth difference
  double combined = 0.0;   // spatial + lambda * disparity
  std::size_t valid_count = 0;
};

struct PairGradient {
  Grid<double> source;  // dL / dD_source
  Grid<double> target;  // dL / dD_target
};

struct GeometricLossReport {
  double left_right = 0.0;
  double temporal = 0.0;
  double total = 0.0;
  std::vector<PairLossBreakdown> left_right_pairs;
  std::vector<PairLossBreakdown> temporal_pairs;
};

// |p(x) - f(x)| where p is the depth-reprojected and f the flow-displaced
// location. nullopt if x is masked out or cannot be evaluated.
std::optional<double> spatial_residual(const Pixel& x, const FramePairContext& ctx);

// fx * |1/z_reprojected - w_target(f(x))| where w_target is the target inverse
// depth read bilinearly.
std::optional<double> disparity_residual(const Pixel& x, const FramePairContext& ctx);

PairLossBreakdown pair_loss(const FramePairContext& ctx, const LossWeights& w);

// Analytic derivatives of pair_loss(ctx, w).combined with respect to every
// source and target depth pixel.
PairGradient pair_loss_gradient(const FramePairContext& ctx, const LossWeights& w);

// As pair_loss, adding scale * dL/dD into the given grids (which must match
// the depth map shapes; target may be null when the disparity term is off).
PairLossBreakdown accumulate_pair_loss(const FramePairContext& ctx, const LossWeights& w, double scale,
                                       Grid<double>* d_source, Grid<double>* d_target);

GeometricLossReport geometric_loss(const std::vector<FramePairContext>& left_right,
                                   const std::vector<FramePairContext>& temporal, const LossWeights& w);

}  // namespace depthrefine
