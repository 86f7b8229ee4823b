#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "depthrefine/geometry.hpp"
#include "depthrefine/grid.hpp"

namespace depthrefine {

// Forward-backward flow error above this many pixels marks a pixel occluded.
inline constexpr double kFlowConsistencyThreshold = 1.0;

struct FlowVector {
  double du = 0.0;
  double dv = 0.0;

  friend bool operator==(const FlowVector&, const FlowVector&) = default;
};

using FlowField = Grid<FlowVector>;

// 1 = usable (flow is forward-backward consistent and the target is readable),
// 0 = occluded / dis-occluded / unreadable. This is the complement of an
// occlusion map, so loss sums iterate directly over the set bits.
using ValidityMask = Grid<std::uint8_t>;

// Up to four grid taps with non-zero bilinear weight. Taps whose weight is
// exactly zero (integral coordinates) are omitted, so a point on the last
// row or column only touches in-bounds samples.
struct BilinearStencil {
  std::array<int, 4> u{};
  std::array<int, 4> v{};
  std::array<double, 4> weight{};
  int count = 0;
};

// nullopt if p is non-finite or any contributing tap lies outside the grid.
std::optional<BilinearStencil> bilinear_stencil(int width, int height, const Pixel& p);

template <typename T>
struct Sampled {
  T value{};
  bool ok = false;
};

Sampled<double> sample_bilinear(const Grid<double>& grid, const Pixel& p);
Sampled<FlowVector> sample_bilinear(const FlowField& grid, const Pixel& p);
// Additionally fails if any contributing tap holds an invalid depth.
Sampled<double> sample_bilinear(const DepthMap& depth, const Pixel& p);

// x + F(x); F is read exactly at integral x and bilinearly otherwise.
// Throws DomainError if x is outside [0, W-1] x [0, H-1].
Pixel displace(const Pixel& x, const FlowField& flow);

// Valid iff x + F_fwd(x) is readable and |F_fwd(x) + F_bwd(x + F_fwd(x))| <= threshold.
ValidityMask consistency_mask(const FlowField& forward, const FlowField& backward,
                              double threshold = kFlowConsistencyThreshold);

ValidityMask intersect(const ValidityMask& a, const ValidityMask& b);

// Pixels holding a valid depth.
ValidityMask depth_validity(const DepthMap& depth);

std::size_t count_valid(const ValidityMask& mask);

}  // namespace depthrefine
