#pragma once

#include <span>
#include <vector>

#include "depthrefine/geometry.hpp"
#include "depthrefine/grid.hpp"

namespace depthrefine {

inline constexpr double kExceedanceBase = 1.25;

struct DepthEvalResult {
  double abs_rel = 0.0;
  // Fraction of pixels whose symmetric ratio max(p/g, g/p) exceeds 1.25^k.
  double exceed_1 = 0.0;
  double exceed_2 = 0.0;
  double exceed_3 = 0.0;
  std::size_t evaluated_pixels = 0;
};

struct PhotoEvalResult {
  double l1 = 0.0;
  double l2 = 0.0;
  std::size_t covered_pixels = 0;
  std::size_t excluded_pixels = 0;  // valid depth but projects outside the right image
};

// Evaluates pixels with gt > 0 and a valid prediction. Throws DomainError if
// there are none.
DepthEvalResult eval_depth(const DepthMap& pred, const DepthMap& gt);

struct ScaleAlignment {
  DepthMap aligned;
  double scale = 1.0;
};

// Least-squares s minimizing sum (s * pred - gt)^2 over evaluable pixels.
ScaleAlignment align_scale(const DepthMap& pred, const DepthMap& gt);

// Warps the right image into the left view through D_left and compares it
// with the left image, averaging over pixels that land inside the right image.
PhotoEvalResult photometric_metric(const Image& left, const Image& right, const DepthMap& left_depth,
                                   const StereoRig& rig);

// Channel mean of equally sized channel planes.
Image to_grayscale(std::span<const Image> channels);

DepthEvalResult eval_sequence(std::span<const DepthEvalResult> frames);
PhotoEvalResult eval_sequence(std::span<const PhotoEvalResult> frames);

}  // namespace depthrefine
