#include "depthrefine/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "depthrefine/edge_loss.hpp"
#include "depthrefine/io.hpp"
#include "depthrefine/manifest.hpp"
#include "depthrefine/metrics.hpp"
#include "depthrefine/refiner.hpp"
#include "depthrefine/synth.hpp"

namespace depthrefine {

namespace fs = std::filesystem;

namespace {

// Failure that maps to the runtime exit code.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exclusive claim on an output directory for one command.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".depthrefine.lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
      throw RuntimeFailure(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
    }
    FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw RuntimeFailure(fmt::format("cannot lock {} (another run active, or not writable)", dir.string()));
    }
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

std::string frame_name(const std::string& view, int i) { return fmt::format("{}_{:03d}", view, i); }

std::string pair_file_stem(const FramePair& p) {
  return p.kind == PairKind::LeftRight ? fmt::format("lr_{:03d}", p.source)
                                       : fmt::format("temporal_{:03d}_{:03d}", p.source, p.target);
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------- synth

int cmd_synth(const std::vector<std::string>& positional, std::ostream& out, std::ostream& err) {
  if (positional.empty() || positional.size() > 2) {
    err << "synth: expected [scene.ini] OUT_DIR\n";
    return kExitValidation;
  }
  const SynthConfig cfg = positional.size() == 2 ? read_synth_config(positional[0]) : SynthConfig{};
  const fs::path dir = fs::absolute(positional.back());
  OutputLock lock(dir);

  err << fmt::format("synth: rendering '{}' scene, {} frames at {}x{}\n", cfg.preset, cfg.scene.frames,
                     cfg.scene.rig.intrinsics.width, cfg.scene.rig.intrinsics.height);
  const SyntheticBundle sb = make_bundle(cfg.scene, FrameSampling::Hierarchical);
  const int n = cfg.scene.frames;

  std::vector<DepthMap> both = sb.gt_left;
  both.insert(both.end(), sb.gt_right.begin(), sb.gt_right.end());
  const std::vector<DepthMap> init = perturb(both, cfg.perturb);

  for (const char* sub : {"gt", "init", "images", "flow", "masks"}) {
    fs::create_directories(dir / sub);
  }
  RunManifest m;
  m.frames = n;
  m.baseline = cfg.scene.rig.baseline;
  m.intrinsics = dir / "intrinsics.txt";
  m.trajectory = dir / "poses.txt";
  m.refiner.sampling = FrameSampling::Hierarchical;
  for (int i = 0; i < n; ++i) {
    write_pfm_depth(dir / "gt" / (frame_name("left", i) + ".pfm"), sb.gt_left[i]);
    write_pfm_depth(dir / "gt" / (frame_name("right", i) + ".pfm"), sb.gt_right[i]);
    m.left_depth.push_back(dir / "init" / (frame_name("left", i) + ".pfm"));
    m.right_depth.push_back(dir / "init" / (frame_name("right", i) + ".pfm"));
    write_pfm_depth(m.left_depth.back(), init[i]);
    write_pfm_depth(m.right_depth.back(), init[n + i]);
    m.left_image.push_back(dir / "images" / (frame_name("left", i) + ".pfm"));
    m.right_image.push_back(dir / "images" / (frame_name("right", i) + ".pfm"));
    write_pfm_image(m.left_image.back(), sb.bundle.left_images[i]);
    write_pfm_image(m.right_image.back(), sb.bundle.right_images[i]);
  }
  for (const auto& [pair, flows] : sb.bundle.flows) {
    const std::string stem = pair_file_stem(pair);
    FlowFiles f{pair, dir / "flow" / (stem + "_forward.flo"), dir / "flow" / (stem + "_backward.flo"),
                dir / "masks" / (stem + ".png")};
    write_flo(f.forward, flows.forward);
    write_flo(f.backward, flows.backward);
    write_png8_mask(*f.mask, *flows.mask);
    m.flows.emplace(pair, f);
  }
  write_kitti_poses(m.trajectory, sb.bundle.trajectory);
  write_text(m.intrinsics, format_intrinsics(cfg.scene.rig.intrinsics));
  write_text(dir / "manifest.ini", format_manifest(m, dir));

  out << fmt::format("wrote {} frames, {} flow pairs to {}\n", n, sb.bundle.flows.size(), dir.string());
  return kExitOk;
}

// ---------------------------------------------------------------- refine

struct RefineOverrides {
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<double> lambda;
  std::optional<double> w_edge;
  std::optional<std::string> edge;
  std::optional<std::string> sampling;
  std::optional<std::uint64_t> seed;
};

std::string loss_table(const RefineReport& r, bool with_edge) {
  std::string t = with_edge ? fmt::format("{:>6} {:>16} {:>16} {:>16} {:>16}\n", "epoch", "left_right", "temporal",
                                          "edge", "total")
                            : fmt::format("{:>6} {:>16} {:>16} {:>16}\n", "epoch", "left_right", "temporal", "total");
  auto row = [&](const std::string& label, const EpochLoss& e) {
    t += with_edge ? fmt::format("{:>6} {:>16.9e} {:>16.9e} {:>16.9e} {:>16.9e}\n", label, e.left_right, e.temporal,
                                 e.edge, e.total)
                   : fmt::format("{:>6} {:>16.9e} {:>16.9e} {:>16.9e}\n", label, e.left_right, e.temporal, e.total);
  };
  for (std::size_t i = 0; i < r.history.size(); ++i) row(std::to_string(i), r.history[i]);
  row("final", r.final_loss);
  return t;
}

std::string loss_records(const RefineReport& r) {
  std::string s;
  auto record = [&](const nlohmann::json& epoch, const EpochLoss& e) {
    nlohmann::json j{{"epoch", epoch},
                     {"left_right", e.left_right},
                     {"temporal", e.temporal},
                     {"geometric", e.left_right + e.temporal},
                     {"edge", e.edge},
                     {"total", e.total}};
    s += j.dump() + "\n";
  };
  for (std::size_t i = 0; i < r.history.size(); ++i) record(i, r.history[i]);
  record("final", r.final_loss);
  return s;
}

int cmd_refine(const std::string& manifest_path, const std::string& out_dir, const RefineOverrides& o,
               std::ostream& out, std::ostream& err) {
  RunManifest m = read_manifest(fs::absolute(manifest_path));
  RefinerConfig& cfg = m.refiner;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.lr) cfg.learning_rate = *o.lr;
  if (o.lambda) cfg.weights.lambda = *o.lambda;
  if (o.w_edge) cfg.weights.w_edge = *o.w_edge;
  if (o.edge) cfg.edge = *parse_edge_kind(*o.edge);
  if (o.sampling) cfg.sampling = *parse_sampling(*o.sampling);
  if (o.seed) cfg.seed = *o.seed;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ValidationError({std::string("refiner config: ") + e.what()});
  }
  if (auto missing = missing_flows(m, cfg.sampling); !missing.empty()) {
    throw ValidationError(missing);
  }

  const fs::path dir = fs::absolute(out_dir);
  OutputLock lock(dir);
  const VideoBundle bundle = load_bundle(m);
  err << fmt::format("refine: {} frames, {} epochs, lr {:g}, edge {}, sampling {}\n", bundle.frame_count(),
                     cfg.epochs, cfg.learning_rate, edge_kind_name(cfg.edge), sampling_name(cfg.sampling));

  RefineReport report;
  try {
    report = refine(bundle, cfg);
  } catch (const RefineError& e) {
    throw RuntimeFailure(e.what());
  }
  err << fmt::format("refine: done in {:.2f} s\n", report.wall_seconds);

  fs::create_directories(dir / "depth");
  for (int i = 0; i < bundle.frame_count(); ++i) {
    write_pfm_depth(dir / "depth" / (frame_name("left", i) + ".pfm"), report.left_depth[i]);
    if (bundle.has_right_depth()) {
      write_pfm_depth(dir / "depth" / (frame_name("right", i) + ".pfm"), report.right_depth[i]);
    }
  }
  const std::string table = loss_table(report, cfg.edge != EdgeLossKind::None);
  write_text(dir / "loss_history.txt", table);
  write_text(dir / "loss_history.jsonl", loss_records(report));
  write_text(dir / "effective_config.ini", format_manifest(m, dir));
  out << table;
  return kExitOk;
}

// ---------------------------------------------------------------- eval

std::vector<DepthMap> read_frames(const fs::path& dir, const std::string& view, int n,
                                  std::vector<std::string>& missing) {
  std::vector<DepthMap> out;
  for (int i = 0; i < n; ++i) {
    const fs::path p = dir / (frame_name(view, i) + ".pfm");
    if (!fs::is_regular_file(p)) {
      missing.push_back(p.string());
      continue;
    }
    out.push_back(read_pfm_depth(p));
  }
  return out;
}

int cmd_eval(const std::string& manifest_path, const std::string& pred_dir, const std::optional<std::string>& gt_dir,
             bool align, std::ostream& out, std::ostream& err) {
  const RunManifest m = read_manifest(fs::absolute(manifest_path));
  if (align && !gt_dir) {
    throw ValidationError({"--align-scale needs a ground-truth directory"});
  }
  std::vector<std::string> missing;
  const auto pred = read_frames(pred_dir, "left", m.frames, missing);
  std::vector<DepthMap> gt;
  if (gt_dir) gt = read_frames(*gt_dir, "left", m.frames, missing);
  if (!missing.empty()) {
    std::vector<std::string> problems;
    for (const auto& p : missing) problems.push_back("missing frame: " + p);
    throw ValidationError(problems);
  }

  if (gt_dir) {
    std::vector<DepthEvalResult> rows;
    out << fmt::format("{:>6} {:>12} {:>12} {:>12} {:>12} {:>8}{}\n", "frame", "abs_rel", "exceed_1", "exceed_2",
                       "exceed_3", "pixels", align ? fmt::format(" {:>12}", "scale") : "");
    for (int i = 0; i < m.frames; ++i) {
      if (!pred[i].grid().same_shape(gt[i].width(), gt[i].height())) {
        throw ValidationError({fmt::format("frame {}: prediction and ground truth sizes differ", i)});
      }
      std::optional<ScaleAlignment> a;
      if (align) a = align_scale(pred[i], gt[i]);
      rows.push_back(eval_depth(a ? a->aligned : pred[i], gt[i]));
      const auto& r = rows.back();
      out << fmt::format("{:>6} {:>12.9f} {:>12.9f} {:>12.9f} {:>12.9f} {:>8}{}\n", i, r.abs_rel, r.exceed_1,
                         r.exceed_2, r.exceed_3, r.evaluated_pixels, a ? fmt::format(" {:>12.9f}", a->scale) : "");
    }
    const DepthEvalResult mean = eval_sequence(rows);
    out << fmt::format("{:>6} {:>12.9f} {:>12.9f} {:>12.9f} {:>12.9f} {:>8}\n", "mean", mean.abs_rel, mean.exceed_1,
                       mean.exceed_2, mean.exceed_3, mean.evaluated_pixels);
    return kExitOk;
  }

  if (m.left_image.empty() || m.right_image.empty()) {
    throw ValidationError({"photometric evaluation needs left and right images in the manifest"});
  }
  const CameraIntrinsics K = read_intrinsics(m.intrinsics);
  const StereoRig rig{m.baseline, K};
  std::vector<PhotoEvalResult> rows;
  out << fmt::format("{:>6} {:>12} {:>12} {:>8} {:>8}\n", "frame", "l1", "l2", "covered", "excluded");
  for (int i = 0; i < m.frames; ++i) {
    const Image left = read_pfm_image(m.left_image[i]);
    const Image right = read_pfm_image(m.right_image[i]);
    if (!pred[i].grid().same_shape(left.width(), left.height())) {
      throw ValidationError({fmt::format("frame {}: prediction size differs from the images", i)});
    }
    rows.push_back(photometric_metric(left, right, pred[i], rig));
    const auto& r = rows.back();
    out << fmt::format("{:>6} {:>12.9f} {:>12.9f} {:>8} {:>8}\n", i, r.l1, r.l2, r.covered_pixels, r.excluded_pixels);
  }
  const PhotoEvalResult mean = eval_sequence(rows);
  out << fmt::format("{:>6} {:>12.9f} {:>12.9f} {:>8} {:>8}\n", "mean", mean.l1, mean.l2, mean.covered_pixels,
                     mean.excluded_pixels);
  (void)err;
  return kExitOk;
}

// ---------------------------------------------------------------- losses

int cmd_losses(const std::string& manifest_path, const std::string& depth_dir,
               const std::optional<std::string>& dump_dir, std::optional<double> alpha, std::ostream& out,
               std::ostream& err) {
  RunManifest m = read_manifest(fs::absolute(manifest_path));
  if (alpha) {
    m.refiner.edge_config.alpha = *alpha;
    try {
      m.refiner.edge_config.validate();
    } catch (const DomainError& e) {
      throw ValidationError({std::string("--alpha: ") + e.what()});
    }
  }
  std::vector<std::string> missing;
  const auto left = read_frames(depth_dir, "left", m.frames, missing);
  if (!missing.empty()) {
    std::vector<std::string> problems;
    for (const auto& p : missing) problems.push_back("missing frame: " + p);
    throw ValidationError(problems);
  }
  const VideoBundle bundle = load_bundle(m);
  std::vector<DepthMap> right;
  if (bundle.has_right_depth()) {
    std::vector<std::string> no_right;
    right = read_frames(depth_dir, "right", m.frames, no_right);
    if (!no_right.empty()) {
      err << "losses: no refined right depths, using the manifest's\n";
      right = bundle.right_depth;
    }
  }
  for (const auto& d : left) {
    if (!d.grid().same_shape(bundle.rig.intrinsics.width, bundle.rig.intrinsics.height)) {
      throw ValidationError({"depth maps in " + depth_dir + " do not match the intrinsics size"});
    }
  }

  const RefinementProblem problem(bundle, m.refiner);
  const TotalLossReport report = problem.evaluate(left, right, nullptr);

  out << fmt::format("{:<16} {:>8} {:>9} {:>16} {:>16} {:>16}\n", "pair", "valid", "coverage", "spatial", "disparity",
                     "combined");
  const std::size_t pixels = static_cast<std::size_t>(bundle.rig.intrinsics.width) * bundle.rig.intrinsics.height;
  auto pair_rows = [&](const std::vector<FramePair>& pairs, const std::vector<PairLossBreakdown>& rows) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& r = rows[i];
      const double coverage = static_cast<double>(count_valid(problem.joint_mask(pairs[i]))) / pixels;
      out << fmt::format("{:<16} {:>8} {:>9.4f} {:>16.9e} {:>16.9e} {:>16.9e}\n", describe(pairs[i]), r.valid_count,
                         coverage, r.spatial, r.disparity, r.combined);
    }
  };
  pair_rows(problem.pairs().left_right, report.geometric.left_right_pairs);
  pair_rows(problem.pairs().temporal, report.geometric.temporal_pairs);
  out << fmt::format("geometric left_right {:.9e} temporal {:.9e} total {:.9e}\n", report.geometric.left_right,
                     report.geometric.temporal, report.geometric.total);

  const EdgeLossConfig& ecfg = m.refiner.edge_config;
  out << fmt::format("\n{:>6} {:>6} {:>10} {:>10} {:>16} {:>16}\n", "frame", "scale", "si_mask", "ratio_mask",
                     "multiscale", "contrastive");
  for (int i = 0; i < bundle.frame_count(); ++i) {
    const DepthMap& anchor = bundle.left_depth[i];
    const EdgeLossReport ms = multiscale_gradient_loss(anchor, left[i], ecfg);
    const EdgeLossReport cl = contrastive_loss(anchor, left[i], ecfg);
    for (std::size_t s = 0; s < ecfg.scales.size(); ++s) {
      const int h = ecfg.scales[s];
      const EdgeMask si = edge_mask(anchor, h, ecfg, EdgeMaskKind::ScaleInvariant);
      const EdgeMask ratio = edge_mask(anchor, h, ecfg, EdgeMaskKind::Ratio);
      out << fmt::format("{:>6} {:>6} {:>10} {:>10} {:>16.9e} {:>16.9e}\n", i, h, si.count(), ratio.count(),
                         ms.per_scale[s].value, cl.per_scale[s].value);
      if (dump_dir) {
        fs::create_directories(*dump_dir);
        auto dump = [&](const EdgeMask& em, const char* kind) {
          Grid<std::uint8_t> g(em.along_u.width(), em.along_u.height(), 0);
          for (int v = 0; v < g.height(); ++v) {
            for (int u = 0; u < g.width(); ++u) g(u, v) = em.at(u, v);
          }
          write_png8_mask(fs::path(*dump_dir) / fmt::format("edge_{}_{:03d}_h{}.png", kind, i, h), g);
        };
        dump(si, "si");
        dump(ratio, "ratio");
      }
    }
  }
  out << fmt::format("edge ({}) {:.9e} w_edge {:.9g} total {:.9e}\n", edge_kind_name(m.refiner.edge), report.edge,
                     m.refiner.weights.w_edge, report.total);

  if (dump_dir) {
    for (const auto& group : {problem.pairs().left_right, problem.pairs().temporal}) {
      for (const auto& p : group) {
        write_png8_mask(fs::path(*dump_dir) / ("joint_" + pair_file_stem(p) + ".png"), problem.joint_mask(p));
      }
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stereo video depth refinement by geometric consistency"};
  app.require_subcommand(1);

  std::vector<std::string> synth_args;
  auto* synth = app.add_subcommand("synth", "Render a synthetic stereo video bundle");
  synth->add_option("args", synth_args, "[scene.ini] OUT_DIR")->required()->expected(1, 2);

  std::string manifest, out_dir;
  RefineOverrides o;
  auto* refine_cmd = app.add_subcommand("refine", "Refine the initial depths of a manifest");
  refine_cmd->add_option("manifest", manifest)->required();
  refine_cmd->add_option("out_dir", out_dir)->required();
  refine_cmd->add_option("--epochs", o.epochs, "Number of epochs")->check(CLI::PositiveNumber);
  refine_cmd->add_option("--lr", o.lr, "Learning rate")->check(CLI::PositiveNumber);
  refine_cmd->add_option("--lambda", o.lambda, "Disparity weight")->check(CLI::NonNegativeNumber);
  refine_cmd->add_option("--w-edge", o.w_edge, "Edge loss weight")->check(CLI::NonNegativeNumber);
  refine_cmd->add_option("--edge", o.edge, "none, ms or contrastive")
      ->check(CLI::IsMember({"none", "ms", "contrastive"}));
  refine_cmd->add_option("--sampling", o.sampling, "consecutive or hierarchical")
      ->check(CLI::IsMember({"consecutive", "hierarchical"}));
  refine_cmd->add_option("--seed", o.seed, "Random seed");

  std::string pred_dir;
  std::optional<std::string> gt_dir;
  bool align = false;
  auto* eval = app.add_subcommand("eval", "Evaluate predicted depths");
  eval->add_option("manifest", manifest)->required();
  eval->add_option("pred_dir", pred_dir)->required();
  eval->add_option("gt_dir", gt_dir);
  eval->add_flag("--align-scale", align, "Least-squares scale alignment per frame");

  std::string depth_dir;
  std::optional<std::string> dump_dir;
  std::optional<double> alpha;
  auto* losses = app.add_subcommand("losses", "Report every loss term for a set of depths");
  losses->add_option("manifest", manifest)->required();
  losses->add_option("depth_dir", depth_dir)->required();
  losses->add_option("--dump-masks", dump_dir, "Write validity and edge masks here");
  losses->add_option("--alpha", alpha, "Scale-invariant edge threshold")->check(CLI::PositiveNumber);

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*synth) return cmd_synth(synth_args, out, err);
    if (*refine_cmd) return cmd_refine(manifest, out_dir, o, out, err);
    if (*eval) return cmd_eval(manifest, pred_dir, gt_dir, align, out, err);
    if (*losses) return cmd_losses(manifest, depth_dir, dump_dir, alpha, out, err);
  } catch (const ValidationError& e) {
    err << "error: validation failed\n";
    for (const auto& p : e.problems()) err << "  " << p << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace depthrefine
