#include "depthrefine/edge_loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace depthrefine {

namespace {

// Below this the multiscale gradient difference is treated as zero.
constexpr double kZeroDifference = 1e-12;

double si_component(double a, double b) {
  const double den = std::abs(a) + std::abs(b);
  return den > 0.0 ? (a - b) / den : 0.0;
}

// Partial derivatives of si_component w.r.t. a (neighbor) and b (center).
void si_component_partials(double a, double b, double& da, double& db) {
  const double den = std::abs(a) + std::abs(b);
  if (!(den > 0.0)) {
    da = db = 0.0;
    return;
  }
  const double num = a - b;
  const double sa = a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
  const double sb = b > 0.0 ? 1.0 : (b < 0.0 ? -1.0 : 0.0);
  da = (den - num * sa) / (den * den);
  db = (-den - num * sb) / (den * den);
}

// max(a, b) / min(a, b) with ties resolved to the first argument (a).
double ratio_component(double a, double b, double& da, double& db) {
  if (a > b) {
    da = 1.0 / b;
    db = -a / (b * b);
    return a / b;
  }
  if (b > a) {
    db = 1.0 / a;
    da = -b / (a * a);
    return b / a;
  }
  da = db = 0.0;
  return 1.0;
}

void check_same_shape(const DepthMap& a, const DepthMap& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DomainError("edge loss: initial and current depth maps differ in size");
  }
}

void check_scale(int h) {
  if (h < 1) {
    throw DomainError("gradient scale must be >= 1, got " + std::to_string(h));
  }
}

EdgeLossReport multiscale_impl(const DepthMap& initial, const DepthMap& current, const EdgeLossConfig& cfg,
                               double scale, Grid<double>* grad) {
  EdgeLossReport report;
  for (int h : cfg.scales) {
    const EdgeMask mask = edge_mask(initial, h, cfg, EdgeMaskKind::ScaleInvariant);
    const GradientField g0 = si_gradient(initial, h);
    const GradientField g = si_gradient(current, h);

    ScaleLoss sl{h, 0.0, mask.count()};
    if (sl.masked > 0) {
      const double inv_n = 1.0 / static_cast<double>(sl.masked);
      for (int v = 0; v < current.height(); ++v) {
        for (int u = 0; u < current.width(); ++u) {
          if (!mask.at(u, v)) {
            continue;
          }
          const double eu = g0.du(u, v) - g.du(u, v);
          const double ev = g0.dv(u, v) - g.dv(u, v);
          const double e = std::hypot(eu, ev);
          sl.value += e;
          if (!grad || e <= kZeroDifference) {
            continue;
          }
          const double k = scale * inv_n / e;
          const double b = current(u, v);
          double da = 0.0, db = 0.0;
          // d|e|/dg = -e/|e|
          si_component_partials(current(u + h, v), b, da, db);
          (*grad)(u + h, v) += -k * eu * da;
          (*grad)(u, v) += -k * eu * db;
          si_component_partials(current(u, v + h), b, da, db);
          (*grad)(u, v + h) += -k * ev * da;
          (*grad)(u, v) += -k * ev * db;
        }
      }
      sl.value *= inv_n;
    }
    report.total += sl.value;
    report.per_scale.push_back(sl);
  }
  return report;
}

EdgeLossReport contrastive_impl(const DepthMap& initial, const DepthMap& current, const EdgeLossConfig& cfg,
                                double scale, Grid<double>* grad) {
  EdgeLossReport report;
  const int W = current.width();
  const int H = current.height();
  const double inv_hw = 1.0 / (static_cast<double>(W) * static_cast<double>(H));

  auto component = [&](int u, int v, int un, int vn, double thr, ScaleLoss& sl) {
    const double a = current(un, vn);
    const double b = current(u, v);
    if (!(a > 0.0) || !(b > 0.0)) {
      return;
    }
    double da = 0.0, db = 0.0;
    const double r = ratio_component(a, b, da, db);
    if (!cfg.two_sided && r >= thr) {
      return;
    }
    const double diff = thr - r;
    sl.value += diff * diff;
    if (grad) {
      const double k = scale * inv_hw * (-2.0 * diff);
      (*grad)(un, vn) += k * da;
      (*grad)(u, v) += k * db;
    }
  };

  for (int h : cfg.scales) {
    const EdgeMask mask = edge_mask(initial, h, cfg, EdgeMaskKind::Ratio);
    ScaleLoss sl{h, 0.0, 0};
    for (int v = 0; v < H; ++v) {
      for (int u = 0; u < W; ++u) {
        if (mask.along_u(u, v)) {
          ++sl.masked;
          component(u, v, u + h, v, mask.threshold, sl);
        }
        if (mask.along_v(u, v)) {
          ++sl.masked;
          component(u, v, u, v + h, mask.threshold, sl);
        }
      }
    }
    sl.value *= inv_hw;
    report.total += sl.value;
    report.per_scale.push_back(sl);
  }
  return report;
}

}  // namespace

double EdgeLossConfig::scale_invariant_threshold(int h) const { return alpha * std::ldexp(1.0, h - 1); }

double EdgeLossConfig::ratio_threshold(int h) const { return ratio_base * std::ldexp(1.0, h - 1); }

void EdgeLossConfig::validate() const {
  if (scales.empty()) {
    throw DomainError("edge loss needs at least one scale");
  }
  if (!std::is_sorted(scales.begin(), scales.end()) || scales.front() < 1) {
    throw DomainError("edge scales must be ascending and >= 1");
  }
  if (!(alpha > 0.0)) {
    throw DomainError("edge alpha must be positive");
  }
  if (!(ratio_base > 1.0)) {
    throw DomainError("ratio edge base must exceed 1");
  }
}

std::size_t EdgeMask::count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < along_u.size(); ++i) {
    n += (along_u[i] || along_v[i]) ? 1 : 0;
  }
  return n;
}

GradientField si_gradient(const DepthMap& depth, int h) {
  check_scale(h);
  const int W = depth.width();
  const int H = depth.height();
  GradientField g{h, Grid<double>(W, H, 0.0), Grid<double>(W, H, 0.0), Grid<std::uint8_t>(W, H, 1)};
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const double c = depth(u, v);
      if (u + h < W) {
        g.du(u, v) = si_component(depth(u + h, v), c);
      }
      if (v + h < H) {
        g.dv(u, v) = si_component(depth(u, v + h), c);
      }
    }
  }
  return g;
}

GradientField ratio_gradient(const DepthMap& depth, int h) {
  check_scale(h);
  const int W = depth.width();
  const int H = depth.height();
  GradientField g{h, Grid<double>(W, H, 1.0), Grid<double>(W, H, 1.0), Grid<std::uint8_t>(W, H, 1)};
  double da = 0.0, db = 0.0;
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const double c = depth(u, v);
      if (!(c > 0.0)) {
        g.valid(u, v) = 0;
        continue;
      }
      if (u + h < W) {
        const double n = depth(u + h, v);
        if (n > 0.0) {
          g.du(u, v) = ratio_component(n, c, da, db);
        } else {
          g.valid(u, v) = 0;
        }
      }
      if (v + h < H) {
        const double n = depth(u, v + h);
        if (n > 0.0) {
          g.dv(u, v) = ratio_component(n, c, da, db);
        } else {
          g.valid(u, v) = 0;
        }
      }
    }
  }
  return g;
}

EdgeMask edge_mask(const DepthMap& initial, int h, const EdgeLossConfig& cfg, EdgeMaskKind kind) {
  check_scale(h);
  const int W = initial.width();
  const int H = initial.height();
  EdgeMask m;
  m.scale = h;
  m.kind = kind;
  m.along_u = Grid<std::uint8_t>(W, H, 0);
  m.along_v = Grid<std::uint8_t>(W, H, 0);

  if (kind == EdgeMaskKind::ScaleInvariant) {
    m.threshold = cfg.scale_invariant_threshold(h);
    const GradientField g = si_gradient(initial, h);
    for (int v = 0; v + h < H; ++v) {
      for (int u = 0; u + h < W; ++u) {
        const double mag = std::max(std::abs(g.du(u, v)), std::abs(g.dv(u, v)));
        const std::uint8_t on = mag > m.threshold ? 1 : 0;
        m.along_u(u, v) = on;
        m.along_v(u, v) = on;
      }
    }
    return m;
  }

  m.threshold = cfg.ratio_threshold(h);
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const double c = initial(u, v);
      if (!(c > 0.0)) {
        continue;
      }
      double da = 0.0, db = 0.0;
      if (u + h < W && initial(u + h, v) > 0.0) {
        m.along_u(u, v) = ratio_component(initial(u + h, v), c, da, db) > m.threshold ? 1 : 0;
      }
      if (v + h < H && initial(u, v + h) > 0.0) {
        m.along_v(u, v) = ratio_component(initial(u, v + h), c, da, db) > m.threshold ? 1 : 0;
      }
    }
  }
  return m;
}

EdgeLossReport accumulate_edge_loss(const DepthMap& initial, const DepthMap& current,
                                    const EdgeLossConfig& cfg, EdgeLossKind which, double scale,
                                    Grid<double>* grad) {
  check_same_shape(initial, current);
  if (grad && !grad->same_shape(current.grid())) {
    throw DomainError("edge loss gradient grid has the wrong shape");
  }
  switch (which) {
    case EdgeLossKind::Multiscale:
      return multiscale_impl(initial, current, cfg, scale, grad);
    case EdgeLossKind::Contrastive:
      return contrastive_impl(initial, current, cfg, scale, grad);
    case EdgeLossKind::None:
      break;
  }
  return {};
}

EdgeLossReport multiscale_gradient_loss(const DepthMap& initial, const DepthMap& current,
                                        const EdgeLossConfig& cfg) {
  return accumulate_edge_loss(initial, current, cfg, EdgeLossKind::Multiscale, 1.0, nullptr);
}

EdgeLossReport contrastive_loss(const DepthMap& initial, const DepthMap& current, const EdgeLossConfig& cfg) {
  return accumulate_edge_loss(initial, current, cfg, EdgeLossKind::Contrastive, 1.0, nullptr);
}

Grid<double> edge_loss_gradient(const DepthMap& initial, const DepthMap& current, const EdgeLossConfig& cfg,
                                EdgeLossKind which) {
  Grid<double> grad(current.width(), current.height(), 0.0);
  accumulate_edge_loss(initial, current, cfg, which, 1.0, &grad);
  return grad;
}

}  // namespace depthrefine
