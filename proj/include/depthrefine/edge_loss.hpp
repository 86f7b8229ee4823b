#pragma once

#include <cstdint>
#include <vector>

#include "depthrefine/grid.hpp"

namespace depthrefine {

// Edge-preserving losses comparing a current depth map against the initial
// one. Gradients are taken along u (column, horizontal) and v (row,
// vertical) with a neighbor spacing of h pixels.

inline const std::vector<int> kDefaultEdgeScales = {1, 2, 4, 6, 8};
// Scale-invariant gradient threshold at h = 1; scale h uses alpha * 2^(h-1).
inline constexpr double kEdgeAlpha = 0.02;
// Ratio-gradient threshold base at h = 1; scale h uses base * 2^(h-1).
inline constexpr double kRatioEdgeBase = 1.05;

enum class EdgeMaskKind { ScaleInvariant, Ratio };
enum class EdgeLossKind { None, Multiscale, Contrastive };

struct EdgeLossConfig {
  std::vector<int> scales = kDefaultEdgeScales;
  double alpha = kEdgeAlpha;
  double ratio_base = kRatioEdgeBase;
  // Penalize current ratios above the threshold as well as below it.
  bool two_sided = false;

  double scale_invariant_threshold(int h) const;
  double ratio_threshold(int h) const;
  void validate() const;
};

struct GradientField {
  int scale = 1;
  Grid<double> du;
  Grid<double> dv;
  // Ratio gradients only: 0 where the pixel or its neighbor had a
  // non-positive depth and the component was skipped.
  Grid<std::uint8_t> valid;
};

// Per-component edge membership. For the scale-invariant kind both grids hold
// the same per-pixel decision.
struct EdgeMask {
  int scale = 1;
  double threshold = 0.0;
  EdgeMaskKind kind = EdgeMaskKind::ScaleInvariant;
  Grid<std::uint8_t> along_u;
  Grid<std::uint8_t> along_v;

  bool at(int u, int v) const { return along_u(u, v) || along_v(u, v); }
  std::size_t count() const;
};

struct ScaleLoss {
  int scale = 1;
  double value = 0.0;
  std::size_t masked = 0;  // pixels (multiscale) or components (contrastive)
};

struct EdgeLossReport {
  double total = 0.0;
  std::vector<ScaleLoss> per_scale;
};

// (I(u+h) - I(u)) / (|I(u+h)| + |I(u)|) per axis; 0 where the neighbor is out
// of bounds or both values are zero.
GradientField si_gradient(const DepthMap& depth, int h);

// max / min of the neighbor pair per axis; 1 where the neighbor is out of
// bounds; 1 and flagged invalid where either value is non-positive.
GradientField ratio_gradient(const DepthMap& depth, int h);

EdgeMask edge_mask(const DepthMap& initial, int h, const EdgeLossConfig& cfg, EdgeMaskKind kind);

EdgeLossReport multiscale_gradient_loss(const DepthMap& initial, const DepthMap& current,
                                        const EdgeLossConfig& cfg);

EdgeLossReport contrastive_loss(const DepthMap& initial, const DepthMap& current, const EdgeLossConfig& cfg);

// dL/dD_current for the selected loss; masks are constants derived from the
// initial map.
Grid<double> edge_loss_gradient(const DepthMap& initial, const DepthMap& current, const EdgeLossConfig& cfg,
                                EdgeLossKind which);

// Loss value plus scale * gradient accumulated into `grad` (may be null).
EdgeLossReport accumulate_edge_loss(const DepthMap& initial, const DepthMap& current,
                                    const EdgeLossConfig& cfg, EdgeLossKind which, double scale,
                                    Grid<double>* grad);

}  // namespace depthrefine
