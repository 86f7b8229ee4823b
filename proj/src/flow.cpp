#include "depthrefine/flow.hpp"

#include <cmath>

namespace depthrefine {

namespace {

void require_same_shape(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1) {
    throw DomainError(std::string(what) + ": dimension mismatch");
  }
}

FlowVector operator*(const FlowVector& f, double s) { return {f.du * s, f.dv * s}; }
FlowVector operator+(const FlowVector& a, const FlowVector& b) { return {a.du + b.du, a.dv + b.dv}; }

template <typename T, typename Get, typename Accept>
Sampled<T> sample_with(int width, int height, const Pixel& p, Get get, Accept accept) {
  Sampled<T> out;
  auto stencil = bilinear_stencil(width, height, p);
  if (!stencil) {
    return out;
  }
  for (int k = 0; k < stencil->count; ++k) {
    if (!accept(stencil->u[k], stencil->v[k])) {
      return out;
    }
  }
  // Nested lerps rather than the weighted sum: constant neighborhoods come
  // back exactly.
  const int u0 = stencil->u[0];
  const int v0 = stencil->v[0];
  const double a = p.u - u0;
  const double b = p.v - v0;
  auto row = [&](int v) {
    const T x0 = get(u0, v);
    return a > 0.0 ? x0 + (get(u0 + 1, v) + x0 * -1.0) * a : x0;
  };
  const T r0 = row(v0);
  out.value = b > 0.0 ? r0 + (row(v0 + 1) + r0 * -1.0) * b : r0;
  out.ok = true;
  return out;
}

}  // namespace

std::optional<BilinearStencil> bilinear_stencil(int width, int height, const Pixel& p) {
  if (!std::isfinite(p.u) || !std::isfinite(p.v)) {
    return std::nullopt;
  }
  const double fu = std::floor(p.u);
  const double fv = std::floor(p.v);
  if (fu < 0.0 || fv < 0.0 || fu > width - 1 || fv > height - 1) {
    return std::nullopt;
  }
  const int u0 = static_cast<int>(fu);
  const int v0 = static_cast<int>(fv);
  const double a = p.u - fu;
  const double b = p.v - fv;

  const int nu = a > 0.0 ? 2 : 1;
  const int nv = b > 0.0 ? 2 : 1;
  if (u0 + nu - 1 >= width || v0 + nv - 1 >= height) {
    return std::nullopt;
  }

  BilinearStencil s;
  for (int j = 0; j < nv; ++j) {
    const double wv = nv == 1 ? 1.0 : (j == 0 ? 1.0 - b : b);
    for (int i = 0; i < nu; ++i) {
      const double wu = nu == 1 ? 1.0 : (i == 0 ? 1.0 - a : a);
      s.u[s.count] = u0 + i;
      s.v[s.count] = v0 + j;
      s.weight[s.count] = wu * wv;
      ++s.count;
    }
  }
  return s;
}

Sampled<double> sample_bilinear(const Grid<double>& grid, const Pixel& p) {
  return sample_with<double>(
      grid.width(), grid.height(), p, [&](int u, int v) { return grid(u, v); },
      [](int, int) { return true; });
}

Sampled<FlowVector> sample_bilinear(const FlowField& grid, const Pixel& p) {
  return sample_with<FlowVector>(
      grid.width(), grid.height(), p, [&](int u, int v) { return grid(u, v); },
      [](int, int) { return true; });
}

Sampled<double> sample_bilinear(const DepthMap& depth, const Pixel& p) {
  return sample_with<double>(
      depth.width(), depth.height(), p, [&](int u, int v) { return depth(u, v); },
      [&](int u, int v) { return depth.valid(u, v); });
}

Pixel displace(const Pixel& x, const FlowField& flow) {
  if (!(x.u >= 0.0 && x.v >= 0.0 && x.u <= flow.width() - 1 && x.v <= flow.height() - 1)) {
    throw DomainError("displace: pixel outside the flow field");
  }
  const double fu = std::floor(x.u);
  const double fv = std::floor(x.v);
  if (fu == x.u && fv == x.v) {
    const FlowVector& f = flow(static_cast<int>(fu), static_cast<int>(fv));
    return {x.u + f.du, x.v + f.dv};
  }
  const auto f = sample_bilinear(flow, x);
  return {x.u + f.value.du, x.v + f.value.dv};
}

ValidityMask consistency_mask(const FlowField& forward, const FlowField& backward, double threshold) {
  require_same_shape(forward.width(), forward.height(), backward.width(), backward.height(),
                     "consistency_mask");
  ValidityMask mask(forward.width(), forward.height(), 0);
  for (int v = 0; v < forward.height(); ++v) {
    for (int u = 0; u < forward.width(); ++u) {
      const FlowVector& f = forward(u, v);
      const Pixel target{u + f.du, v + f.dv};
      const auto b = sample_bilinear(backward, target);
      if (!b.ok) {
        continue;
      }
      const double eu = f.du + b.value.du;
      const double ev = f.dv + b.value.dv;
      mask(u, v) = std::hypot(eu, ev) <= threshold ? 1 : 0;
    }
  }
  return mask;
}

ValidityMask intersect(const ValidityMask& a, const ValidityMask& b) {
  require_same_shape(a.width(), a.height(), b.width(), b.height(), "intersect");
  ValidityMask out(a.width(), a.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (a[i] && b[i]) ? 1 : 0;
  }
  return out;
}

ValidityMask depth_validity(const DepthMap& depth) {
  ValidityMask out(depth.width(), depth.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = DepthMap::valid_value(depth[i]) ? 1 : 0;
  }
  return out;
}

std::size_t count_valid(const ValidityMask& mask) {
  std::size_t n = 0;
  for (auto m : mask.values()) {
    n += m ? 1 : 0;
  }
  return n;
}

}  // namespace depthrefine
