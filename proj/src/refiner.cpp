#include "depthrefine/refiner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace depthrefine {

namespace {

const DepthMap& no_target() {
  static const DepthMap empty;
  return empty;
}

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw DomainError(what);
  }
}

std::vector<Grid<double>> zero_like(const std::vector<DepthMap>& maps) {
  std::vector<Grid<double>> out;
  out.reserve(maps.size());
  for (const auto& m : maps) {
    out.emplace_back(m.width(), m.height(), 0.0);
  }
  return out;
}

}  // namespace

std::string describe(const FramePair& pair) {
  if (pair.kind == PairKind::LeftRight) {
    return "left-right " + std::to_string(pair.source);
  }
  return "temporal " + std::to_string(pair.source) + "->" + std::to_string(pair.target);
}

PairSets build_pair_sets(int frame_count, FrameSampling sampling) {
  if (frame_count < 2) {
    throw DomainError("temporal pairs need at least 2 frames");
  }
  PairSets s;
  for (int i = 0; i < frame_count; ++i) {
    s.left_right.push_back({PairKind::LeftRight, i, i});
  }
  if (sampling == FrameSampling::Consecutive) {
    for (int i = 1; i < frame_count; ++i) {
      s.temporal.push_back({PairKind::Temporal, i - 1, i});
    }
    return s;
  }
  for (int gap = 1; gap < frame_count; gap *= 2) {
    for (int i = 0; i + gap < frame_count; ++i) {
      s.temporal.push_back({PairKind::Temporal, i, i + gap});
    }
  }
  return s;
}

void VideoBundle::validate(const PairSets& pairs) const {
  const int n = frame_count();
  require(n >= 2, "bundle needs at least 2 frames");
  require(static_cast<int>(trajectory.size()) == n, "trajectory length differs from frame count");
  require(right_depth.empty() || static_cast<int>(right_depth.size()) == n,
          "right depth count differs from frame count");
  require(left_images.empty() || static_cast<int>(left_images.size()) == n,
          "left image count differs from frame count");
  require(right_images.empty() || static_cast<int>(right_images.size()) == n,
          "right image count differs from frame count");
  rig.intrinsics.validate();
  require(rig.baseline > 0.0, "stereo baseline must be positive");

  const int W = left_depth.front().width();
  const int H = left_depth.front().height();
  require(W == rig.intrinsics.width && H == rig.intrinsics.height,
          "depth maps do not match the intrinsics image size");
  auto same = [&](int w, int h) { return w == W && h == H; };
  for (const auto& d : left_depth) require(same(d.width(), d.height()), "left depth size mismatch");
  for (const auto& d : right_depth) require(same(d.width(), d.height()), "right depth size mismatch");
  for (const auto& im : left_images) require(same(im.width(), im.height()), "left image size mismatch");
  for (const auto& im : right_images) require(same(im.width(), im.height()), "right image size mismatch");
  for (const auto& pose : trajectory) require(pose.is_rotation(1e-6), "trajectory pose is not a rotation");

  auto check_pair = [&](const FramePair& p) {
    auto it = flows.find(p);
    require(it != flows.end(), "missing flows for " + describe(p));
    const PairFlows& f = it->second;
    require(f.forward.same_shape(W, H) && f.backward.same_shape(W, H), "flow size mismatch for " + describe(p));
    require(!f.mask || f.mask->same_shape(W, H), "mask size mismatch for " + describe(p));
    require(p.source >= 0 && p.source < n && p.target >= 0 && p.target < n,
            "frame index out of range for " + describe(p));
  };
  for (const auto& p : pairs.left_right) check_pair(p);
  for (const auto& p : pairs.temporal) check_pair(p);
}

void RefinerConfig::validate() const {
  require(epochs >= 1, "epochs must be >= 1");
  require(learning_rate > 0.0, "learning rate must be positive");
  weights.validate();
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "optimizer betas must lie in [0, 1)");
  require(epsilon > 0.0, "optimizer epsilon must be positive");
  require(min_depth > 0.0 && max_depth > min_depth, "depth clamp range is invalid");
  require(flow_threshold >= 0.0, "flow consistency threshold must be non-negative");
  if (edge != EdgeLossKind::None) {
    edge_config.validate();
  }
}

ParameterField ParameterField::from_depths(const std::vector<DepthMap>& left, const std::vector<DepthMap>& right) {
  auto invert = [](const std::vector<DepthMap>& maps) {
    std::vector<Grid<double>> out;
    for (const auto& m : maps) {
      Grid<double> g(m.width(), m.height(), 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = DepthMap::valid_value(m[i]) ? 1.0 / m[i] : 0.0;
      }
      out.push_back(std::move(g));
    }
    return out;
  };
  return {invert(left), invert(right)};
}

namespace {

std::vector<DepthMap> to_depths(const std::vector<Grid<double>>& inverse) {
  std::vector<DepthMap> out;
  out.reserve(inverse.size());
  for (const auto& g : inverse) {
    DepthMap d(g.width(), g.height(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      d[i] = g[i] > 0.0 ? 1.0 / g[i] : 0.0;
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

std::vector<DepthMap> ParameterField::left_depths() const { return to_depths(left); }
std::vector<DepthMap> ParameterField::right_depths() const { return to_depths(right); }

RefinementProblem::RefinementProblem(const VideoBundle& bundle, const RefinerConfig& cfg)
    : bundle_(bundle), cfg_(cfg), pairs_(build_pair_sets(bundle.frame_count(), cfg.sampling)) {
  cfg_.validate();
  bundle_.validate(pairs_);

  const RigidTransform stereo = stereo_rig_transform(bundle.rig);
  auto prepare = [&](const FramePair& p) {
    const PairFlows& f = bundle.flows.at(p);
    ValidityMask m = consistency_mask(f.forward, f.backward, cfg_.flow_threshold);
    if (f.mask) {
      m = intersect(m, *f.mask);
    }
    m = intersect(m, depth_validity(bundle.left_depth[p.source]));
    masks_.emplace(p, std::move(m));
    transforms_.emplace(p, p.kind == PairKind::LeftRight
                               ? stereo
                               : relative_pose(bundle.trajectory[p.source], bundle.trajectory[p.target]));
  };
  for (const auto& p : pairs_.left_right) prepare(p);
  for (const auto& p : pairs_.temporal) prepare(p);
}

TotalLossReport RefinementProblem::evaluate(const std::vector<DepthMap>& left, const std::vector<DepthMap>& right,
                                            DepthGradient* grad) const {
  const bool use_right = !right.empty();
  if (grad) {
    grad->left = zero_like(left);
    grad->right = zero_like(right);
  }

  TotalLossReport report;
  auto run_pair = [&](const FramePair& p, std::vector<PairLossBreakdown>& sink, double& sum) {
    const bool lr = p.kind == PairKind::LeftRight;
    const DepthMap& target = lr ? (use_right ? right[p.target] : no_target()) : left[p.target];
    const FramePairContext ctx{left[p.source],
                               target,
                               bundle_.flows.at(p).forward,
                               masks_.at(p),
                               transforms_.at(p),
                               bundle_.rig.intrinsics,
                               p.kind};
    Grid<double>* d_src = grad ? &grad->left[p.source] : nullptr;
    Grid<double>* d_tgt = nullptr;
    if (grad && target.size() > 0) {
      d_tgt = lr ? &grad->right[p.target] : &grad->left[p.target];
    }
    const PairLossBreakdown b = accumulate_pair_loss(ctx, cfg_.weights, 1.0, d_src, d_tgt);
    if (!std::isfinite(b.combined)) {
      throw RefineError("non-finite loss in pair " + describe(p));
    }
    sink.push_back(b);
    sum += b.combined;
  };
  for (const auto& p : pairs_.left_right) run_pair(p, report.geometric.left_right_pairs, report.geometric.left_right);
  for (const auto& p : pairs_.temporal) run_pair(p, report.geometric.temporal_pairs, report.geometric.temporal);
  report.geometric.total = report.geometric.left_right + report.geometric.temporal;

  if (cfg_.edge != EdgeLossKind::None) {
    for (std::size_t i = 0; i < left.size(); ++i) {
      Grid<double>* g = grad ? &grad->left[i] : nullptr;
      EdgeLossReport e =
          accumulate_edge_loss(bundle_.left_depth[i], left[i], cfg_.edge_config, cfg_.edge, cfg_.weights.w_edge, g);
      if (!std::isfinite(e.total)) {
        throw RefineError("non-finite edge loss in frame " + std::to_string(i));
      }
      report.edge += e.total;
      report.edge_per_frame.push_back(std::move(e));
    }
  }
  report.total = report.geometric.total + cfg_.weights.w_edge * report.edge;

  if (grad) {
    // Pixels that are invalid in the current maps carry no parameter.
    auto clear_invalid = [](const std::vector<DepthMap>& maps, std::vector<Grid<double>>& g) {
      for (std::size_t f = 0; f < maps.size(); ++f) {
        for (std::size_t i = 0; i < maps[f].size(); ++i) {
          if (!DepthMap::valid_value(maps[f][i])) {
            g[f][i] = 0.0;
          }
        }
      }
    };
    clear_invalid(left, grad->left);
    clear_invalid(right, grad->right);
  }
  return report;
}

TotalLossReport total_loss(const ParameterField& params, const VideoBundle& bundle, const RefinerConfig& cfg) {
  RefinementProblem problem(bundle, cfg);
  return problem.evaluate(params.left_depths(), params.right_depths(), nullptr);
}

RefineReport refine(const VideoBundle& bundle, const RefinerConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RefinementProblem problem(bundle, cfg);

  ParameterField params = ParameterField::from_depths(bundle.left_depth, bundle.right_depth);
  const double w_lo = 1.0 / cfg.max_depth;
  const double w_hi = 1.0 / cfg.min_depth;
  auto clamp_all = [&](std::vector<Grid<double>>& grids) {
    for (auto& g : grids) {
      for (auto& w : g.values()) {
        if (w > 0.0) {
          w = std::clamp(w, w_lo, w_hi);
        }
      }
    }
  };
  clamp_all(params.left);
  clamp_all(params.right);

  std::vector<Grid<double>> m_left = zero_like(bundle.left_depth), v_left = m_left;
  std::vector<Grid<double>> m_right = zero_like(bundle.right_depth), v_right = m_right;

  RefineReport report;
  report.history.reserve(static_cast<std::size_t>(cfg.epochs));
  DepthGradient grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const TotalLossReport loss = problem.evaluate(params.left_depths(), params.right_depths(), &grad);
    report.history.push_back(loss.summary());

    const double t = epoch + 1;
    const double bias1 = 1.0 - std::pow(cfg.beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.beta2, t);
    auto step = [&](std::vector<Grid<double>>& w, const std::vector<Grid<double>>& g_depth,
                    std::vector<Grid<double>>& m, std::vector<Grid<double>>& v) {
      for (std::size_t f = 0; f < w.size(); ++f) {
        for (std::size_t i = 0; i < w[f].size(); ++i) {
          const double wi = w[f][i];
          if (!(wi > 0.0)) {
            continue;
          }
          // D = 1/w  =>  dL/dw = -dL/dD / w^2
          const double g = -g_depth[f][i] / (wi * wi);
          m[f][i] = cfg.beta1 * m[f][i] + (1.0 - cfg.beta1) * g;
          v[f][i] = cfg.beta2 * v[f][i] + (1.0 - cfg.beta2) * g * g;
          const double m_hat = m[f][i] / bias1;
          const double v_hat = v[f][i] / bias2;
          w[f][i] = std::clamp(wi - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon), w_lo, w_hi);
        }
      }
    };
    step(params.left, grad.left, m_left, v_left);
    step(params.right, grad.right, m_right, v_right);
  }

  report.left_depth = params.left_depths();
  report.right_depth = params.right_depths();
  report.final_loss = problem.evaluate(report.left_depth, report.right_depth, nullptr).summary();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

GradientCheckResult gradient_check(const VideoBundle& bundle, const RefinerConfig& cfg,
                                   const GradientCheckOptions& options) {
  RefinementProblem problem(bundle, cfg);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto jittered = [&](const std::vector<DepthMap>& maps) {
    std::vector<DepthMap> out = maps;
    for (auto& m : out) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (DepthMap::valid_value(m[i])) {
          m[i] *= std::exp(options.jitter * normal(rng));
        }
      }
    }
    return out;
  };
  std::vector<DepthMap> left = jittered(bundle.left_depth);
  std::vector<DepthMap> right = jittered(bundle.right_depth);

  DepthGradient grad;
  problem.evaluate(left, right, &grad);

  const std::size_t per_frame = left.front().size();
  const std::size_t frames = left.size() + right.size();
  std::uniform_int_distribution<std::size_t> pick(0, frames * per_frame - 1);

  GradientCheckResult result;
  for (int s = 0; s < options.samples; ++s) {
    const std::size_t k = pick(rng);
    const std::size_t f = k / per_frame;
    const std::size_t i = k % per_frame;
    const bool is_left = f < left.size();
    std::vector<DepthMap>& maps = is_left ? left : right;
    const std::size_t frame = is_left ? f : f - left.size();
    const double analytic = is_left ? grad.left[frame][i] : grad.right[frame][i];

    const double d0 = maps[frame][i];
    if (!DepthMap::valid_value(d0)) {
      continue;
    }
    const double h = options.relative_step * d0;
    auto loss_at = [&](double d) {
      maps[frame][i] = d;
      return problem.evaluate(left, right, nullptr).total;
    };
    const double lp = loss_at(d0 + h);
    const double lm = loss_at(d0 - h);
    const double l0 = loss_at(d0);
    const double numeric = (lp - lm) / (2.0 * h);

    // Below this, a central difference cannot tell a gradient from round-off
    // in the loss total.
    const double resolution = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(l0) / h;
    if (std::abs(analytic) <= resolution && std::abs(numeric) <= resolution) {
      ++result.zero_both;
      ++result.evaluated;
      continue;
    }
    const double fwd = (lp - l0) / h;
    const double bwd = (l0 - lm) / h;
    if (std::abs(fwd - bwd) > options.kink_tolerance * std::max(std::abs(fwd), std::abs(bwd))) {
      ++result.excluded;
      continue;
    }
    const double rel = std::abs(analytic - numeric) / std::max(std::abs(analytic), std::abs(numeric));
    result.max_relative_error = std::max(result.max_relative_error, rel);
    ++result.evaluated;
  }
  return result;
}

}  // namespace depthrefine
