// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "depthrefine/cli.hpp"
#include "depthrefine/consistency_loss.hpp"
#include "depthrefine/edge_loss.hpp"
#include "depthrefine/io.hpp"
#include "depthrefine/metrics.hpp"
#include "depthrefine/refiner.hpp"
#include "depthrefine/synth.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace depthrefine;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::vector<FramePairContext> truth_contexts(const SyntheticBundle& sb, const std::vector<FramePair>& pairs) {
  std::vector<FramePairContext> out;
  for (const auto& p : pairs) {
    const bool lr = p.kind == PairKind::LeftRight;
    const PairFlows& f = sb.bundle.flows.at(p);
    const RigidTransform Q = lr ? stereo_rig_transform(sb.spec.rig)
                                : relative_pose(sb.bundle.trajectory[p.source], sb.bundle.trajectory[p.target]);
    out.push_back({sb.gt_left[p.source], lr ? sb.gt_right[p.target] : sb.gt_left[p.target], f.forward, *f.mask, Q,
                   sb.spec.rig.intrinsics, p.kind});
  }
  return out;
}

// Perturbs left and right initial depths together, as the synth command does.
void perturb_bundle(SyntheticBundle& sb, const Perturbation& p) {
  std::vector<DepthMap> both = sb.gt_left;
  both.insert(both.end(), sb.gt_right.begin(), sb.gt_right.end());
  const std::vector<DepthMap> init = perturb(both, p);
  const std::size_t n = sb.gt_left.size();
  sb.bundle.left_depth.assign(init.begin(), init.begin() + static_cast<std::ptrdiff_t>(n));
  sb.bundle.right_depth.assign(init.begin() + static_cast<std::ptrdiff_t>(n), init.end());
}

double mean_abs_rel(const std::vector<DepthMap>& pred, const std::vector<DepthMap>& gt) {
  std::vector<DepthEvalResult> rows;
  for (std::size_t i = 0; i < gt.size(); ++i) rows.push_back(eval_depth(pred[i], gt[i]));
  return eval_sequence(rows).abs_rel;
}

double mean_photo_l1(const SyntheticBundle& sb, const std::vector<DepthMap>& left) {
  std::vector<PhotoEvalResult> rows;
  for (std::size_t i = 0; i < left.size(); ++i) {
    rows.push_back(photometric_metric(sb.bundle.left_images[i], sb.bundle.right_images[i], left[i], sb.spec.rig));
  }
  return eval_sequence(rows).l1;
}

Outcome zero_loss_oracle() {
  Outcome o;
  double worst_geo = 0.0, worst_photo = 0.0;
  int bundles = 0;
  for (const auto& preset : SceneSpec::presets()) {
    for (std::uint64_t seed : {0u, 1u}) {
      const SyntheticBundle sb = make_bundle(SceneSpec::desk(preset, seed));
      const PairSets pairs = build_pair_sets(sb.spec.frames, FrameSampling::Hierarchical);
      const GeometricLossReport r =
          geometric_loss(truth_contexts(sb, pairs.left_right), truth_contexts(sb, pairs.temporal), LossWeights{});
      worst_geo = std::max(worst_geo, r.total);
      for (int i = 0; i < sb.spec.frames; ++i) {
        worst_photo = std::max(worst_photo, photometric_metric(sb.bundle.left_images[i], sb.bundle.right_images[i],
                                                               sb.gt_left[i], sb.spec.rig)
                                                .l1);
      }
      ++bundles;
    }
  }
  o.require(bundles >= 6, "at least 6 bundles");
  o.require(worst_geo < 1e-6, "geometric < 1e-6");
  o.require(worst_photo < 1e-3, "photometric l1 < 1e-3");
  o.note(fmt::format("{} bundles, max geometric {:.3e}, max photometric l1 {:.3e}", bundles, worst_geo, worst_photo));
  return o;
}

Outcome gradient_fidelity() {
  Outcome o;
  SceneSpec spec = SceneSpec::desk("mixed", 4);
  spec.rig.intrinsics = {45.0, 45.0, 23.5, 15.5, 48, 32};
  SyntheticBundle sb = make_bundle(spec);
  perturb_bundle(sb, {0.05, 1.5, 1.0, 9});

  struct Variant {
    const char* name;
    EdgeLossKind edge;
    double w_edge;
  };
  for (const Variant& v : {Variant{"geometric", EdgeLossKind::None, 0.0},
                           Variant{"multiscale", EdgeLossKind::Multiscale, 1.0},
                           Variant{"contrastive", EdgeLossKind::Contrastive, 1.0}}) {
    RefinerConfig cfg;
    cfg.sampling = FrameSampling::Hierarchical;
    cfg.edge = v.edge;
    cfg.weights.w_edge = v.w_edge;
    // Extra draws cover the samples dropped at kinks.
    GradientCheckOptions options;
    options.samples = 260;
    const GradientCheckResult r = gradient_check(sb.bundle, cfg, options);
    const int nonzero = r.evaluated - r.zero_both;
    o.require(r.evaluated >= 200, fmt::format("{}: >= 200 samples", v.name));
    o.require(nonzero >= 100, fmt::format("{}: most samples carry gradient", v.name));
    o.require(r.max_relative_error < 1e-4, fmt::format("{}: relative error < 1e-4", v.name));
    o.note(fmt::format("{} max rel err {:.3e} ({} checked, {} both zero, {} kinks skipped)", v.name,
                       r.max_relative_error, r.evaluated, r.zero_both, r.excluded));
  }
  return o;
}

Outcome refinement_recovery() {
  Outcome o;
  SyntheticBundle sb = make_bundle(SceneSpec::desk("mixed", 0));
  perturb_bundle(sb, {0.1, 0.0, 1.0, 0});
  RefinerConfig cfg;
  cfg.epochs = 100;
  cfg.learning_rate = kMonocularInitLearningRate;
  cfg.sampling = FrameSampling::Hierarchical;
  const double rel0 = mean_abs_rel(sb.bundle.left_depth, sb.gt_left);
  const double photo0 = mean_photo_l1(sb, sb.bundle.left_depth);
  const RefineReport r = refine(sb.bundle, cfg);
  const double rel1 = mean_abs_rel(r.left_depth, sb.gt_left);
  const double photo1 = mean_photo_l1(sb, r.left_depth);
  o.require(rel1 <= 0.5 * rel0, "abs-rel halved");
  o.require(photo1 <= 0.7 * photo0, "photometric l1 improved by 30%");
  o.note(fmt::format("lr {:g}, abs-rel {:.4f} -> {:.4f}, photometric l1 {:.3e} -> {:.3e} ({:.0f}% better)",
                     cfg.learning_rate, rel0, rel1, photo0, photo1, 100.0 * (1.0 - photo1 / photo0)));
  return o;
}

Outcome edge_retention() {
  Outcome o;
  SyntheticBundle sb = make_bundle(SceneSpec::desk("mixed", 0));
  perturb_bundle(sb, {0.1, 2.0, 1.0, 3});
  const EdgeLossConfig ecfg;

  const auto retained = [&](const std::vector<DepthMap>& refined) {
    std::size_t kept = 0, total = 0;
    for (std::size_t i = 0; i < refined.size(); ++i) {
      const EdgeMask truth = edge_mask(sb.gt_left[i], 1, ecfg, EdgeMaskKind::Ratio);
      const EdgeMask after = edge_mask(refined[i], 1, ecfg, EdgeMaskKind::Ratio);
      for (int v = 0; v < sb.spec.rig.intrinsics.height; ++v) {
        for (int u = 0; u < sb.spec.rig.intrinsics.width; ++u) {
          if (!truth.at(u, v)) continue;
          ++total;
          if (after.at(u, v)) ++kept;
        }
      }
    }
    return std::pair{kept, total};
  };

  RefinerConfig cfg;
  cfg.epochs = 100;
  cfg.learning_rate = kMonocularInitLearningRate;
  cfg.sampling = FrameSampling::Hierarchical;
  cfg.edge = EdgeLossKind::None;
  cfg.weights.w_edge = 0.0;
  const auto [kept_plain, total] = retained(refine(sb.bundle, cfg).left_depth);
  cfg.edge = EdgeLossKind::Contrastive;
  cfg.weights.w_edge = 1.0;
  const auto kept_edge = retained(refine(sb.bundle, cfg).left_depth).first;
  const auto kept_init = retained(sb.bundle.left_depth).first;
  o.require(kept_edge > kept_plain, "contrastive retains more edge pixels");
  o.note(fmt::format("ground-truth h=1 ratio edges {}, retained: blurred init {}, no edge loss {}, contrastive {}",
                     total, kept_init, kept_plain, kept_edge));
  return o;
}

Outcome scale_invariance() {
  Outcome o;
  SyntheticBundle sb = make_bundle(SceneSpec::desk("mixed", 2));
  std::vector<DepthMap> both = sb.gt_left;
  const std::vector<DepthMap> anchor = perturb(both, {0.05, 1.0, 1.0, 1});
  const std::vector<DepthMap> current = perturb(both, {0.1, 0.0, 1.0, 2});
  const EdgeLossConfig one_sided;
  EdgeLossConfig two_sided;
  two_sided.two_sided = true;
  double worst = 0.0, smallest = 1e300;
  for (std::size_t i = 0; i < anchor.size(); ++i) {
    const double ms = multiscale_gradient_loss(anchor[i], current[i], one_sided).total;
    const double cl = contrastive_loss(anchor[i], current[i], one_sided).total;
    const double cl2 = contrastive_loss(anchor[i], current[i], two_sided).total;
    smallest = std::min({smallest, ms, cl2});
    for (double s : {0.5, 2.0, 10.0}) {
      DepthMap scaled = current[i];
      for (auto& x : scaled.grid().values()) x *= s;
      worst = std::max(worst, std::abs(multiscale_gradient_loss(anchor[i], scaled, one_sided).total - ms));
      worst = std::max(worst, std::abs(contrastive_loss(anchor[i], scaled, one_sided).total - cl));
      worst = std::max(worst, std::abs(contrastive_loss(anchor[i], scaled, two_sided).total - cl2));
    }
  }
  o.require(smallest > 1e-6, "losses are non-trivial");
  o.require(worst <= 1e-9, "invariant within 1e-9");
  o.note(fmt::format("max |L(sD) - L(D)| {:.3e} over 5 frames x 3 scales, smallest loss {:.3e}", worst, smallest));
  return o;
}

Outcome constants() {
  Outcome o;
  const EdgeLossConfig ecfg;
  const RefinerConfig rcfg;
  o.require(LossWeights{}.lambda == 0.1 && kDisparityWeight == 0.1, "lambda 0.1");
  o.require(ecfg.scales == std::vector<int>{1, 2, 4, 6, 8}, "scales {1,2,4,6,8}");
  o.require(ecfg.alpha == 0.02, "alpha 0.02");
  bool thresholds = true;
  for (int h : ecfg.scales) {
    thresholds = thresholds && std::abs(ecfg.scale_invariant_threshold(h) - 0.02 * std::pow(2.0, h - 1)) < 1e-15 &&
                 std::abs(ecfg.ratio_threshold(h) - 1.05 * std::pow(2.0, h - 1)) < 1e-12;
  }
  o.require(thresholds, "alpha_h and ratio thresholds double per scale");
  o.require(kFlowConsistencyThreshold == 1.0 && rcfg.flow_threshold == 1.0, "flow threshold 1 px");

  // Behavior: a round trip off by exactly 1 px is kept, 1.01 px is not.
  FlowField fwd(4, 1, {2.0, 0.0}), bwd(4, 1, {-1.0, 0.0});
  const ValidityMask at_one = consistency_mask(fwd, bwd);
  bwd = FlowField(4, 1, {-0.99, 0.0});
  const ValidityMask beyond = consistency_mask(fwd, bwd);
  o.require(at_one(0, 0) == 1 && beyond(0, 0) == 0, "1 px round trip boundary");

  // Behavior: a ratio of 1.06 is an h=1 ratio edge, 1.04 is not.
  DepthMap step(3, 2, 1.0);
  step(1, 0) = 1.06;
  step(1, 1) = 1.04;
  const EdgeMask rm = edge_mask(step, 1, ecfg, EdgeMaskKind::Ratio);
  o.require(rm.along_u(0, 0) == 1 && rm.along_u(0, 1) == 0, "ratio threshold 1.05 boundary");

  // Behavior: lambda scales the disparity term in the pair loss.
  const CameraIntrinsics K{100, 100, 10, 10, 20, 20};
  DepthMap src(20, 20, 2.5), tgt(20, 20, 5.0);
  const FramePairContext c{src, tgt, FlowField(20, 20), ValidityMask(20, 20, 1), RigidTransform::identity(), K,
                           PairKind::Temporal};
  const PairLossBreakdown full = pair_loss(c, LossWeights{});
  o.require(std::abs(full.combined - (full.spatial + 0.1 * full.disparity)) < 1e-12 && full.disparity > 0.0,
            "combined = spatial + 0.1 * disparity");
  o.note("lambda 0.1, scales {1,2,4,6,8}, alpha 0.02 doubling, ratio 1.05 doubling, flow 1 px");
  return o;
}

Outcome metrics() {
  Outcome o;
  const DepthEvalResult a = eval_depth(DepthMap(1, 1, 11.0), DepthMap(1, 1, 10.0));
  const DepthEvalResult b = eval_depth(DepthMap(1, 1, 13.0), DepthMap(1, 1, 10.0));
  o.require(std::abs(a.abs_rel - 0.1) < 1e-15 && a.exceed_1 == 0.0, "eval_depth 11/10");
  o.require(std::abs(b.abs_rel - 0.3) < 1e-15 && b.exceed_1 == 1.0 && b.exceed_2 == 0.0, "eval_depth 13/10");
  DepthMap gt(8, 6);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(1.0, 30.0);
  for (auto& x : gt.grid().values()) x = d(rng);
  o.require(eval_depth(gt, gt).abs_rel == 0.0, "eval_depth identity");
  DepthMap half = gt, noisy = gt;
  for (auto& x : half.grid().values()) x /= 2.0;
  for (auto& x : noisy.grid().values()) x *= d(rng) / 15.0;
  o.require(std::abs(align_scale(half, gt).scale - 2.0) < 1e-15, "align_scale recovers 2");
  const auto sse = [&](double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) acc += (s * noisy[i] - gt[i]) * (s * noisy[i] - gt[i]);
    return acc;
  };
  const double s_ref = oracle::golden_section(sse, 0.01, 100.0);
  const double s = align_scale(noisy, gt).scale;
  o.require(std::abs(s - s_ref) < 1e-6, "align_scale vs golden section");
  const StereoRig rig{0.5, {40, 40, 15.5, 11.5, 32, 24}};
  const PhotoEvalResult same = photometric_metric(Image(32, 24, 0.4), Image(32, 24, 0.4), DepthMap(32, 24, 5.0), rig);
  o.require(same.l1 == 0.0 && same.excluded_pixels == 4u * 24u, "photometric constant image and exclusions");
  o.note(fmt::format("align_scale {:.12f} vs golden section {:.12f}", s, s_ref));
  return o;
}

Outcome formats() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> val(-50.0f, 50.0f);

  FlowField flow(23, 17);
  for (auto& v : flow.values()) v = {val(rng), val(rng)};
  const Bytes flo = encode_flo(flow);
  o.require(decode_flo(flo) == flow && encode_flo(decode_flo(flo)) == flo, ".flo round trip");
  FlowField one(1, 1, {1.5, -2.0});
  o.require(encode_flo(one) == oracle::flo_1x1_bytes(), ".flo reference bytes");

  PfmImage pfm{19, 7, 1, std::vector<float>(19 * 7)};
  for (auto& x : pfm.data) x = val(rng);
  const Bytes pb = encode_pfm(pfm);
  o.require(decode_pfm(pb).data == pfm.data && encode_pfm(decode_pfm(pb)) == pb, "PFM round trip");
  const PfmImage be = decode_pfm(read_file(fs::path(TEST_DATA_DIR) / "big_endian_2x2.pfm"));
  o.require(be.data == std::vector<float>{1.5f, 2.25f, -3.0f, 100.0f}, "big-endian PFM");

  DepthMap depth(21, 9);
  for (auto& x : depth.grid().values()) x = std::abs(val(rng)) + 0.5;
  const double scale = 1.0 / 256.0;
  const DepthMap q = decode_png16_depth(encode_png16_depth(depth, scale), scale);
  bool bounded = true;
  for (std::size_t i = 0; i < depth.size(); ++i) bounded = bounded && std::abs(q[i] - depth[i]) <= scale / 2;
  o.require(bounded, "PNG16 quantization within scale / 2");
  o.require(decode_png16_depth(encode_png16_depth(q, scale), scale) == q, "PNG16 value round trip");

  std::vector<RigidTransform> poses;
  for (int i = 0; i < 5; ++i) poses.push_back(RigidTransform::from_yaw(0.01 * i, {0.1 * i, 0.0, 0.25 * i}));
  const PoseTrajectory t = parse_kitti_poses(format_kitti_poses(poses));
  bool same = t.poses.size() == poses.size();
  for (std::size_t i = 0; same && i < poses.size(); ++i) {
    same = t.poses[i].rotation() == poses[i].rotation() && t.poses[i].translation() == poses[i].translation();
  }
  o.require(same, "KITTI pose round trip");

  // Fuzz: mutated and random inputs into every decoder; only FormatError may escape.
  const std::string pose_text = format_kitti_poses(poses);
  const std::vector<Bytes> seeds{flo, pb, encode_png16_depth(q, scale), Bytes(pose_text.begin(), pose_text.end())};
  std::uniform_int_distribution<int> byte(0, 255);
  int cases = 0, rejected = 0;
  bool crashed = false;
  for (int iter = 0; iter < 4000 && !crashed; ++iter) {
    Bytes b = seeds[iter % seeds.size()];
    switch ((iter / 4) % 3) {
      case 0:
        for (int k = 0; k < 1 + iter % 6; ++k) b[rng() % b.size()] = static_cast<std::uint8_t>(byte(rng));
        break;
      case 1:
        b.resize(rng() % (b.size() + 1));
        break;
      default:
        b.resize(rng() % 256);
        for (auto& x : b) x = static_cast<std::uint8_t>(byte(rng));
    }
    const std::string text(b.begin(), b.end());
    const std::vector<std::function<void()>> readers{
        [&] { decode_flo(b); }, [&] { decode_pfm(b); }, [&] { decode_png16_depth(b, 1.0); },
        [&] { parse_kitti_poses(text); }, [&] { parse_intrinsics(text); }};
    for (const auto& read : readers) {
      ++cases;
      try {
        read();
      } catch (const FormatError&) {
        ++rejected;
      } catch (const std::exception& e) {
        crashed = true;
        o.note(fmt::format("unexpected exception: {}", e.what()));
      }
    }
  }
  o.require(!crashed, "fuzzed inputs raise only FormatError");
  o.note(fmt::format("{} fuzz cases, {} rejected cleanly", cases, rejected));
  return o;
}

struct CliRun {
  int code = 0;
  std::string out;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str()};
}

// synth -> refine -> eval into `dir`; returns every file's bytes plus stdout.
std::map<std::string, Bytes> pipeline(const fs::path& dir, std::string& stdout_all, bool& ok) {
  const std::string data = (dir / "data").string(), out = (dir / "out").string();
  const std::string manifest = (dir / "data" / "manifest.ini").string();
  std::vector<CliRun> runs{
      cli({"synth", data}),
      cli({"refine", manifest, out, "--epochs", "20", "--lr", "4e-4", "--edge", "contrastive", "--seed", "7"}),
      cli({"eval", manifest, out + "/depth", data + "/gt"}),
      cli({"eval", manifest, out + "/depth"}),
  };
  ok = true;
  for (const auto& r : runs) {
    ok = ok && r.code == 0;
    stdout_all += r.out;
  }
  // synth echoes its output directory
  for (std::size_t at; (at = stdout_all.find(dir.string())) != std::string::npos;) {
    stdout_all.replace(at, dir.string().size(), "<dir>");
  }
  std::map<std::string, Bytes> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
  }
  return files;
}

Outcome determinism() {
  Outcome o;
  testutil::TempDir a("accept_a"), b("accept_b");
  std::string out_a, out_b;
  bool ok_a = false, ok_b = false;
  const auto files_a = pipeline(a.path(), out_a, ok_a);
  const auto files_b = pipeline(b.path(), out_b, ok_b);
  o.require(ok_a && ok_b, "all commands exit 0");
  o.require(files_a.size() > 40, "full output inventory");
  o.require(files_a == files_b, "output files byte-identical");
  o.require(out_a == out_b, "stdout identical");
  std::size_t bytes = 0;
  for (const auto& [name, data] : files_a) bytes += data.size();
  o.note(fmt::format("{} files, {} bytes compared", files_a.size(), bytes));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria{
      {1, "zero-loss oracle", 10, zero_loss_oracle},
      {2, "gradient fidelity", 60, gradient_fidelity},
      {3, "refinement recovery", 300, refinement_recovery},
      {4, "edge retention", 300, edge_retention},
      {5, "scale invariance", 60, scale_invariance},
      {6, "default constants", 60, constants},
      {7, "metrics", 60, metrics},
      {8, "format round trips and fuzzing", 60, formats},
      {9, "determinism", 300, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(fmt::format("exception: {}", e.what()));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget_seconds) {
      o.pass = false;
      o.note(fmt::format("over the {:g} s budget", c.budget_seconds));
    }
    failed += o.pass ? 0 : 1;
    std::cout << fmt::format("{} criterion {} ({}): {} [{:.2f} s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail,
                             seconds)
              << std::flush;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
