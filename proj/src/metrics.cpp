#include "depthrefine/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "depthrefine/flow.hpp"

namespace depthrefine {

namespace {

void require_same_size(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1) {
    throw DomainError(std::string(what) + ": dimension mismatch");
  }
}

bool evaluable(double pred, double gt) { return gt > 0.0 && std::isfinite(gt) && DepthMap::valid_value(pred); }

}  // namespace

DepthEvalResult eval_depth(const DepthMap& pred, const DepthMap& gt) {
  require_same_size(pred.width(), pred.height(), gt.width(), gt.height(), "eval_depth");
  const double t1 = kExceedanceBase;
  const double t2 = t1 * t1;
  const double t3 = t2 * t1;

  DepthEvalResult r;
  double abs_rel = 0.0;
  std::size_t e1 = 0, e2 = 0, e3 = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double p = pred[i];
    const double g = gt[i];
    if (!evaluable(p, g)) {
      continue;
    }
    abs_rel += std::abs(p - g) / g;
    const double ratio = std::max(p / g, g / p);
    e1 += ratio > t1;
    e2 += ratio > t2;
    e3 += ratio > t3;
    ++r.evaluated_pixels;
  }
  if (r.evaluated_pixels == 0) {
    throw DomainError("eval_depth: no pixel has both a valid prediction and ground truth");
  }
  const double n = static_cast<double>(r.evaluated_pixels);
  r.abs_rel = abs_rel / n;
  r.exceed_1 = static_cast<double>(e1) / n;
  r.exceed_2 = static_cast<double>(e2) / n;
  r.exceed_3 = static_cast<double>(e3) / n;
  return r;
}

ScaleAlignment align_scale(const DepthMap& pred, const DepthMap& gt) {
  require_same_size(pred.width(), pred.height(), gt.width(), gt.height(), "align_scale");
  double pg = 0.0;
  double pp = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (evaluable(pred[i], gt[i])) {
      pg += pred[i] * gt[i];
      pp += pred[i] * pred[i];
      ++n;
    }
  }
  if (n == 0 || !(pp > 0.0)) {
    throw DomainError("align_scale: no evaluable non-zero prediction");
  }
  ScaleAlignment out{pred, pg / pp};
  for (std::size_t i = 0; i < out.aligned.size(); ++i) {
    if (DepthMap::valid_value(out.aligned[i])) {
      out.aligned[i] *= out.scale;
    }
  }
  return out;
}

PhotoEvalResult photometric_metric(const Image& left, const Image& right, const DepthMap& left_depth,
                                   const StereoRig& rig) {
  require_same_size(left.width(), left.height(), right.width(), right.height(), "photometric_metric");
  require_same_size(left.width(), left.height(), left_depth.width(), left_depth.height(), "photometric_metric");
  const RigidTransform to_right = stereo_rig_transform(rig);
  const CameraIntrinsics& K = rig.intrinsics;

  PhotoEvalResult r;
  double l1 = 0.0;
  double l2 = 0.0;
  for (int v = 0; v < left.height(); ++v) {
    for (int u = 0; u < left.width(); ++u) {
      const double d = left_depth(u, v);
      if (!DepthMap::valid_value(d)) {
        continue;
      }
      const auto p = try_project(K, transform_point(to_right, lift({double(u), double(v)}, d, K)));
      const auto s = p ? sample_bilinear(right, *p) : Sampled<double>{};
      if (!s.ok) {
        ++r.excluded_pixels;
        continue;
      }
      const double diff = s.value - left(u, v);
      l1 += std::abs(diff);
      l2 += diff * diff;
      ++r.covered_pixels;
    }
  }
  if (r.covered_pixels == 0) {
    throw DomainError("photometric_metric: no pixel reprojects into the right image");
  }
  r.l1 = l1 / static_cast<double>(r.covered_pixels);
  r.l2 = l2 / static_cast<double>(r.covered_pixels);
  return r;
}

Image to_grayscale(std::span<const Image> channels) {
  if (channels.empty()) {
    throw DomainError("to_grayscale: no channels");
  }
  Image out(channels[0].width(), channels[0].height(), 0.0);
  for (const auto& c : channels) {
    require_same_size(c.width(), c.height(), out.width(), out.height(), "to_grayscale");
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += c[i];
    }
  }
  for (auto& x : out.values()) {
    x /= static_cast<double>(channels.size());
  }
  return out;
}

DepthEvalResult eval_sequence(std::span<const DepthEvalResult> frames) {
  if (frames.empty()) {
    throw DomainError("eval_sequence: no frames");
  }
  DepthEvalResult m;
  for (const auto& f : frames) {
    m.abs_rel += f.abs_rel;
    m.exceed_1 += f.exceed_1;
    m.exceed_2 += f.exceed_2;
    m.exceed_3 += f.exceed_3;
    m.evaluated_pixels += f.evaluated_pixels;
  }
  const double n = static_cast<double>(frames.size());
  m.abs_rel /= n;
  m.exceed_1 /= n;
  m.exceed_2 /= n;
  m.exceed_3 /= n;
  return m;
}

PhotoEvalResult eval_sequence(std::span<const PhotoEvalResult> frames) {
  if (frames.empty()) {
    throw DomainError("eval_sequence: no frames");
  }
  PhotoEvalResult m;
  for (const auto& f : frames) {
    m.l1 += f.l1;
    m.l2 += f.l2;
    m.covered_pixels += f.covered_pixels;
    m.excluded_pixels += f.excluded_pixels;
  }
  const double n = static_cast<double>(frames.size());
  m.l1 /= n;
  m.l2 /= n;
  return m;
}

}  // namespace depthrefine
