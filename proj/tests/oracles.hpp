#pragma once

// Reference computations written without the library's geometry or sampling
// code, used to cross-check the optimized paths.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Cam {
  double fx, fy, cx, cy;
};

// Row-major 3x3 rotation and translation, p' = R p + t.
struct Pose {
  std::array<double, 9> R{1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::array<double, 3> t{0, 0, 0};
};

inline std::array<double, 3> apply(const Pose& q, const std::array<double, 3>& p) {
  std::array<double, 3> out{};
  for (int r = 0; r < 3; ++r) {
    out[r] = q.R[r * 3 + 0] * p[0] + q.R[r * 3 + 1] * p[1] + q.R[r * 3 + 2] * p[2] + q.t[r];
  }
  return out;
}

// Plain bilinear read over a row-major W x H array; nullopt if any
// neighbor with non-zero weight is out of range.
inline std::optional<double> bilinear(const std::vector<double>& data, int W, int H, double u, double v) {
  if (!std::isfinite(u) || !std::isfinite(v)) return std::nullopt;
  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const double a = u - u0;
  const double b = v - v0;
  double acc = 0.0;
  for (int dv = 0; dv <= 1; ++dv) {
    for (int du = 0; du <= 1; ++du) {
      const double w = (du ? a : 1.0 - a) * (dv ? b : 1.0 - b);
      if (w == 0.0) continue;
      const int uu = u0 + du;
      const int vv = v0 + dv;
      if (uu < 0 || vv < 0 || uu >= W || vv >= H) return std::nullopt;
      acc += w * data[static_cast<std::size_t>(vv) * W + uu];
    }
  }
  return acc;
}

struct PixelResidual {
  double spatial = 0.0;
  double disparity = 0.0;
};

// Step-by-step residuals at integer pixel (u, v): lift with the source depth,
// move by the pose, project, compare with the flow-displaced point. Target
// inverse depth is read bilinearly from 1/target.
inline std::optional<PixelResidual> pixel_residual(int u, int v, const std::vector<double>& src, int W, int H,
                                                   const std::vector<double>& tgt,
                                                   const std::vector<double>& flow_u,
                                                   const std::vector<double>& flow_v, const Cam& K,
                                                   const Pose& q) {
  const std::size_t i = static_cast<std::size_t>(v) * W + u;
  const double d = src[i];
  if (!(d > 0.0)) return std::nullopt;
  const double x = (u - K.cx) / K.fx * d;
  const double y = (v - K.cy) / K.fy * d;
  const auto c = apply(q, {x, y, d});
  if (!(c[2] > 0.0)) return std::nullopt;
  const double pu = K.fx * c[0] / c[2] + K.cx;
  const double pv = K.fy * c[1] / c[2] + K.cy;
  const double fu = u + flow_u[i];
  const double fv = v + flow_v[i];
  if (fu < 0 || fv < 0 || fu > W - 1 || fv > H - 1) return std::nullopt;
  PixelResidual r;
  r.spatial = std::hypot(pu - fu, pv - fv);
  if (!tgt.empty()) {
    std::vector<double> inv(tgt.size());
    for (std::size_t k = 0; k < tgt.size(); ++k) inv[k] = tgt[k] > 0.0 ? 1.0 / tgt[k] : NAN;
    const auto w = bilinear(inv, W, H, fu, fv);
    if (!w || !std::isfinite(*w)) return std::nullopt;
    r.disparity = K.fx * std::abs(1.0 / c[2] - *w);
  }
  return r;
}

// Minimizes a unimodal f on [a, b].
inline double golden_section(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol * (std::abs(c) + std::abs(d) + 1e-30)) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

// Every (i, j), i < j < n, whose gap is a power of two, by brute force over
// all pairs.
inline std::vector<std::pair<int, int>> power_of_two_gaps(int n) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int gap = j - i;
      bool pow2 = false;
      for (int p = 1; p <= gap; p *= 2) pow2 = pow2 || p == gap;
      if (pow2) out.emplace_back(i, j);
    }
  }
  return out;
}

// A 1x1 .flo holding (1.5, -2.0), built from the layout by hand.
inline std::vector<std::uint8_t> flo_1x1_bytes() {
  return {0x50, 0x49, 0x45, 0x48,   // "PIEH"
          0x01, 0x00, 0x00, 0x00,   // width 1
          0x01, 0x00, 0x00, 0x00,   // height 1
          0x00, 0x00, 0xC0, 0x3F,   // 1.5f
          0x00, 0x00, 0x00, 0xC0};  // -2.0f
}

}  // namespace oracle
