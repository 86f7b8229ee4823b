#include "depthrefine/manifest.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "depthrefine/io.hpp"

namespace depthrefine {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += (i ? sep : "") + items[i];
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<long long> to_integer(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> to_real(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Typed access to an IniDocument that records every problem and remembers
// which keys were consumed.
class Reader {
 public:
  Reader(const IniDocument& doc, std::vector<std::string>& problems) : doc_(doc), problems_(problems) {}

  const IniEntry* find(const std::string& section, const std::string& key) {
    auto s = doc_.find(section);
    if (s == doc_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    used_.insert({section, key});
    return &k->second;
  }

  void problem(const std::string& section, const std::string& key, const IniEntry* e, const std::string& msg) {
    problems_.push_back(e ? fmt::format("[{}] {} (line {}): {}", section, key, e->line, msg)
                          : fmt::format("[{}] {}: {}", section, key, msg));
  }

  std::optional<std::string> text(const std::string& section, const std::string& key, bool required) {
    const IniEntry* e = find(section, key);
    if (!e) {
      if (required) problem(section, key, nullptr, "missing required key");
      return std::nullopt;
    }
    return e->value;
  }

  template <typename T>
  void integer(const std::string& section, const std::string& key, T& out, bool required = false) {
    const IniEntry* e = find(section, key);
    if (!e) {
      if (required) problem(section, key, nullptr, "missing required key");
      return;
    }
    if (auto v = to_integer(e->value)) {
      out = static_cast<T>(*v);
    } else {
      problem(section, key, e, "'" + e->value + "' is not an integer");
    }
  }

  void real(const std::string& section, const std::string& key, double& out, bool required = false) {
    const IniEntry* e = find(section, key);
    if (!e) {
      if (required) problem(section, key, nullptr, "missing required key");
      return;
    }
    if (auto v = to_real(e->value)) {
      out = *v;
    } else {
      problem(section, key, e, "'" + e->value + "' is not a number");
    }
  }

  void boolean(const std::string& section, const std::string& key, bool& out) {
    const IniEntry* e = find(section, key);
    if (!e) return;
    if (e->value == "true" || e->value == "1") {
      out = true;
    } else if (e->value == "false" || e->value == "0") {
      out = false;
    } else {
      problem(section, key, e, "'" + e->value + "' is not a boolean");
    }
  }

  // Reports keys nobody asked for. Call after all lookups.
  void reject_unknown(const std::set<std::string>& sections) {
    for (const auto& [section, entries] : doc_) {
      if (!sections.count(section)) {
        problems_.push_back(fmt::format("unknown section [{}]", section));
        continue;
      }
      for (const auto& [key, e] : entries) {
        if (!used_.count({section, key})) {
          problems_.push_back(fmt::format("[{}] {} (line {}): unknown key", section, key, e.line));
        }
      }
    }
  }

  const IniDocument& doc() const { return doc_; }

 private:
  const IniDocument& doc_;
  std::vector<std::string>& problems_;
  std::set<std::pair<std::string, std::string>> used_;
};

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

void read_edge_section(Reader& r, EdgeLossConfig& edge) {
  if (auto scales = r.text("edge", "scales", false)) {
    std::vector<int> parsed;
    bool ok = !trim(*scales).empty();
    for (const auto& item : split(*scales, ',')) {
      auto v = to_integer(trim(item));
      if (!v) {
        ok = false;
        break;
      }
      parsed.push_back(static_cast<int>(*v));
    }
    if (ok) {
      edge.scales = parsed;
    } else {
      r.problem("edge", "scales", r.find("edge", "scales"), "expected a comma-separated list of integers");
    }
  }
  r.real("edge", "alpha", edge.alpha);
  r.real("edge", "ratio_base", edge.ratio_base);
  r.boolean("edge", "two_sided", edge.two_sided);
}

void read_refiner_section(Reader& r, RefinerConfig& cfg) {
  r.integer("refiner", "epochs", cfg.epochs);
  r.real("refiner", "learning_rate", cfg.learning_rate);
  r.real("refiner", "lambda", cfg.weights.lambda);
  r.real("refiner", "w_edge", cfg.weights.w_edge);
  if (auto s = r.text("refiner", "edge", false)) {
    if (auto k = parse_edge_kind(*s)) {
      cfg.edge = *k;
    } else {
      r.problem("refiner", "edge", r.find("refiner", "edge"), "expected none, ms or contrastive");
    }
  }
  if (auto s = r.text("refiner", "sampling", false)) {
    if (auto k = parse_sampling(*s)) {
      cfg.sampling = *k;
    } else {
      r.problem("refiner", "sampling", r.find("refiner", "sampling"), "expected consecutive or hierarchical");
    }
  }
  r.real("refiner", "beta1", cfg.beta1);
  r.real("refiner", "beta2", cfg.beta2);
  r.real("refiner", "epsilon", cfg.epsilon);
  r.integer("refiner", "seed", cfg.seed);
  r.real("refiner", "d_min", cfg.min_depth);
  r.real("refiner", "d_max", cfg.max_depth);
  r.real("refiner", "flow_threshold", cfg.flow_threshold);
  read_edge_section(r, cfg.edge_config);
}

struct KeyIndex {
  std::string name;
  int index = -1;
};

// "left_depth.3" -> {"left_depth", 3}
std::optional<KeyIndex> split_indexed(const std::string& key) {
  const auto dot = key.rfind('.');
  if (dot == std::string::npos) return std::nullopt;
  auto idx = to_integer(key.substr(dot + 1));
  if (!idx || *idx < 0) return std::nullopt;
  return KeyIndex{key.substr(0, dot), static_cast<int>(*idx)};
}

// "lr.2.forward" / "temporal.0-1.mask"
struct FlowKey {
  FramePair pair;
  std::string role;
};

std::optional<FlowKey> parse_flow_key(const std::string& key) {
  const auto parts = split(key, '.');
  if (parts.size() != 3) return std::nullopt;
  FlowKey k;
  k.role = parts[2];
  if (parts[0] == "lr") {
    auto i = to_integer(parts[1]);
    if (!i || *i < 0) return std::nullopt;
    k.pair = {PairKind::LeftRight, static_cast<int>(*i), static_cast<int>(*i)};
  } else if (parts[0] == "temporal") {
    const auto ends = split(parts[1], '-');
    if (ends.size() != 2) return std::nullopt;
    auto s = to_integer(ends[0]);
    auto t = to_integer(ends[1]);
    if (!s || !t || *s < 0 || *t < 0) return std::nullopt;
    k.pair = {PairKind::Temporal, static_cast<int>(*s), static_cast<int>(*t)};
  } else {
    return std::nullopt;
  }
  if (k.role != "forward" && k.role != "backward" && k.role != "mask") return std::nullopt;
  return k;
}

std::string flow_key_prefix(const FramePair& p) {
  return p.kind == PairKind::LeftRight ? fmt::format("lr.{}", p.source)
                                       : fmt::format("temporal.{}-{}", p.source, p.target);
}

bool is_depth_file(const fs::path& p) { return p.extension() == ".pfm" || p.extension() == ".png"; }

DepthMap load_depth(const fs::path& p, double scale) {
  return p.extension() == ".png" ? read_png16_depth(p, scale) : read_pfm_depth(p);
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::runtime_error(join(problems, "\n")), problems_(std::move(problems)) {}

IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::vector<std::string> problems;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        problems.push_back(fmt::format("line {}: malformed section header", line_no));
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(fmt::format("line {}: expected 'key = value'", line_no));
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      problems.push_back(fmt::format("line {}: empty key", line_no));
      continue;
    }
    if (section.empty()) {
      problems.push_back(fmt::format("line {}: key '{}' outside any section", line_no, key));
      continue;
    }
    auto [it, inserted] = doc[section].emplace(key, IniEntry{value, line_no});
    if (!inserted) {
      problems.push_back(fmt::format("line {}: duplicate key [{}] {} (first on line {})", line_no, section, key,
                                     it->second.line));
    }
  }
  if (!problems.empty()) throw ValidationError(problems);
  return doc;
}

std::string sampling_name(FrameSampling s) { return s == FrameSampling::Consecutive ? "consecutive" : "hierarchical"; }

std::string edge_kind_name(EdgeLossKind k) {
  switch (k) {
    case EdgeLossKind::None:
      return "none";
    case EdgeLossKind::Multiscale:
      return "ms";
    case EdgeLossKind::Contrastive:
      return "contrastive";
  }
  return "none";
}

std::optional<FrameSampling> parse_sampling(const std::string& s) {
  if (s == "consecutive") return FrameSampling::Consecutive;
  if (s == "hierarchical") return FrameSampling::Hierarchical;
  return std::nullopt;
}

std::optional<EdgeLossKind> parse_edge_kind(const std::string& s) {
  if (s == "none") return EdgeLossKind::None;
  if (s == "ms") return EdgeLossKind::Multiscale;
  if (s == "contrastive") return EdgeLossKind::Contrastive;
  return std::nullopt;
}

RunManifest parse_manifest(const std::string& text, const fs::path& base_dir) {
  const IniDocument doc = parse_ini(text);
  std::vector<std::string> problems;
  Reader r(doc, problems);
  RunManifest m;

  r.integer("frames", "count", m.frames, true);
  r.real("frames", "depth_scale", m.depth_scale);
  if (r.find("frames", "count") && m.frames < 2) {
    r.problem("frames", "count", r.find("frames", "count"), "need at least 2 frames");
  }
  if (!(m.depth_scale > 0.0)) {
    r.problem("frames", "depth_scale", r.find("frames", "depth_scale"), "must be positive");
  }

  // per-frame files
  std::map<std::string, std::map<int, fs::path>> per_frame;
  static const std::set<std::string> kFrameLists = {"left_depth", "right_depth", "left_image", "right_image"};
  if (auto s = doc.find("frames"); s != doc.end()) {
    for (const auto& [key, e] : s->second) {
      if (key == "count" || key == "depth_scale") continue;
      auto ki = split_indexed(key);
      if (!ki || !kFrameLists.count(ki->name)) continue;  // left for reject_unknown
      r.find("frames", key);
      if (m.frames >= 2 && ki->index >= m.frames) {
        r.problem("frames", key, &e, fmt::format("frame index beyond count {}", m.frames));
        continue;
      }
      per_frame[ki->name][ki->index] = resolve(base_dir, e.value);
    }
  }
  auto collect = [&](const std::string& name, bool required) {
    std::vector<fs::path> out;
    const auto& got = per_frame[name];
    if (got.empty() && !required) return out;
    for (int i = 0; i < m.frames; ++i) {
      auto it = got.find(i);
      if (it == got.end()) {
        r.problem("frames", fmt::format("{}.{}", name, i), nullptr, "missing required key");
      } else {
        out.push_back(it->second);
      }
    }
    return out;
  };
  m.left_depth = collect("left_depth", true);
  m.right_depth = collect("right_depth", false);
  m.left_image = collect("left_image", false);
  m.right_image = collect("right_image", false);

  // camera
  if (auto s = r.text("camera", "intrinsics", true)) m.intrinsics = resolve(base_dir, *s);
  if (auto s = r.text("camera", "trajectory", true)) m.trajectory = resolve(base_dir, *s);
  r.real("camera", "baseline", m.baseline, true);
  if (r.find("camera", "baseline") && !(m.baseline > 0.0)) {
    r.problem("camera", "baseline", r.find("camera", "baseline"), "must be positive");
  }

  // flows
  if (auto s = doc.find("flows"); s != doc.end()) {
    for (const auto& [key, e] : s->second) {
      auto fk = parse_flow_key(key);
      if (!fk) continue;
      r.find("flows", key);
      const FramePair& p = fk->pair;
      if (m.frames >= 2 && (p.source >= m.frames || p.target >= m.frames)) {
        r.problem("flows", key, &e, "frame index beyond count");
        continue;
      }
      FlowFiles& f = m.flows[p];
      f.pair = p;
      const fs::path path = resolve(base_dir, e.value);
      if (fk->role == "forward") {
        f.forward = path;
      } else if (fk->role == "backward") {
        f.backward = path;
      } else {
        f.mask = path;
      }
    }
  }
  for (const auto& [p, f] : m.flows) {
    if (f.forward.empty()) r.problem("flows", flow_key_prefix(p) + ".forward", nullptr, "missing required key");
    if (f.backward.empty()) r.problem("flows", flow_key_prefix(p) + ".backward", nullptr, "missing required key");
  }

  read_refiner_section(r, m.refiner);
  r.reject_unknown({"frames", "camera", "flows", "refiner", "edge"});

  try {
    m.refiner.validate();
  } catch (const std::exception& e) {
    problems.push_back(std::string("[refiner] ") + e.what());
  }
  if (m.frames >= 2) {
    for (const auto& miss : missing_flows(m, m.refiner.sampling)) problems.push_back(miss);
  }

  // files exist and agree on size
  std::optional<CameraIntrinsics> K;
  auto exists = [&](const fs::path& p, const std::string& what) {
    if (p.empty()) return false;
    if (!fs::is_regular_file(p)) {
      problems.push_back(fmt::format("{}: file not found: {}", what, p.string()));
      return false;
    }
    return true;
  };
  if (exists(m.intrinsics, "intrinsics")) {
    try {
      K = read_intrinsics(m.intrinsics);
    } catch (const std::exception& e) {
      problems.push_back(e.what());
    }
  }
  if (exists(m.trajectory, "trajectory")) {
    try {
      const auto t = read_kitti_poses(m.trajectory);
      if (m.frames >= 2 && static_cast<int>(t.poses.size()) != m.frames) {
        problems.push_back(fmt::format("trajectory: {} poses for {} frames", t.poses.size(), m.frames));
      }
    } catch (const std::exception& e) {
      problems.push_back(e.what());
    }
  }
  auto check_size = [&](const fs::path& p, const std::string& what) {
    if (!exists(p, what)) return;
    try {
      const ImageSize s = probe_size(p);
      if (K && (s.width != K->width || s.height != K->height)) {
        problems.push_back(fmt::format("{}: size {}x{} differs from intrinsics {}x{}", what, s.width, s.height,
                                       K->width, K->height));
      }
    } catch (const std::exception& e) {
      problems.push_back(fmt::format("{}: {}", what, e.what()));
    }
  };
  auto check_list = [&](const std::vector<fs::path>& files, const std::string& name, bool depth) {
    for (std::size_t i = 0; i < files.size(); ++i) {
      const std::string what = fmt::format("{}.{}", name, i);
      if (depth && !is_depth_file(files[i])) {
        problems.push_back(what + ": depth files must be .pfm or .png");
        continue;
      }
      if (!depth && files[i].extension() != ".pfm") {
        problems.push_back(what + ": images must be .pfm");
        continue;
      }
      check_size(files[i], what);
    }
  };
  check_list(m.left_depth, "left_depth", true);
  check_list(m.right_depth, "right_depth", true);
  check_list(m.left_image, "left_image", false);
  check_list(m.right_image, "right_image", false);
  for (const auto& [p, f] : m.flows) {
    const std::string prefix = flow_key_prefix(p);
    check_size(f.forward, prefix + ".forward");
    check_size(f.backward, prefix + ".backward");
    if (f.mask) check_size(*f.mask, prefix + ".mask");
  }

  if (!problems.empty()) throw ValidationError(problems);
  return m;
}

RunManifest read_manifest(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw ValidationError({"manifest not found: " + path.string()});
  }
  const Bytes b = read_file(path);
  RunManifest m = parse_manifest(std::string(b.begin(), b.end()), path.parent_path());
  m.source = path;
  return m;
}

std::vector<std::string> missing_flows(const RunManifest& m, FrameSampling sampling) {
  std::vector<std::string> out;
  const PairSets sets = build_pair_sets(m.frames, sampling);
  auto check = [&](const FramePair& p) {
    if (!m.flows.count(p)) {
      out.push_back(fmt::format("[flows] {}.forward: missing for {} sampling", flow_key_prefix(p),
                                sampling_name(sampling)));
    }
  };
  for (const auto& p : sets.left_right) check(p);
  for (const auto& p : sets.temporal) check(p);
  return out;
}

VideoBundle load_bundle(const RunManifest& m) {
  VideoBundle b;
  b.rig.intrinsics = read_intrinsics(m.intrinsics);
  b.rig.baseline = m.baseline;
  b.trajectory = read_kitti_poses(m.trajectory).poses;
  for (const auto& p : m.left_depth) b.left_depth.push_back(load_depth(p, m.depth_scale));
  for (const auto& p : m.right_depth) b.right_depth.push_back(load_depth(p, m.depth_scale));
  for (const auto& p : m.left_image) b.left_images.push_back(read_pfm_image(p));
  for (const auto& p : m.right_image) b.right_images.push_back(read_pfm_image(p));
  for (const auto& [pair, f] : m.flows) {
    PairFlows pf{read_flo(f.forward), read_flo(f.backward), std::nullopt};
    if (f.mask) pf.mask = read_png8_mask(*f.mask);
    b.flows.emplace(pair, std::move(pf));
  }
  b.validate(build_pair_sets(m.frames, m.refiner.sampling));
  return b;
}

std::string format_manifest(const RunManifest& m, const fs::path& base_dir) {
  auto rel = [&](const fs::path& p) { return p.lexically_proximate(base_dir).generic_string(); };
  std::string out = "[frames]\n";
  out += fmt::format("count = {}\n", m.frames);
  out += fmt::format("depth_scale = {:.17g}\n", m.depth_scale);
  auto list = [&](const std::vector<fs::path>& files, const char* name) {
    for (std::size_t i = 0; i < files.size(); ++i) out += fmt::format("{}.{} = {}\n", name, i, rel(files[i]));
  };
  list(m.left_depth, "left_depth");
  list(m.right_depth, "right_depth");
  list(m.left_image, "left_image");
  list(m.right_image, "right_image");

  out += "\n[camera]\n";
  out += fmt::format("intrinsics = {}\n", rel(m.intrinsics));
  out += fmt::format("trajectory = {}\n", rel(m.trajectory));
  out += fmt::format("baseline = {:.17g}\n", m.baseline);

  out += "\n[flows]\n";
  for (const auto& [p, f] : m.flows) {
    const std::string prefix = flow_key_prefix(p);
    out += fmt::format("{}.forward = {}\n", prefix, rel(f.forward));
    out += fmt::format("{}.backward = {}\n", prefix, rel(f.backward));
    if (f.mask) out += fmt::format("{}.mask = {}\n", prefix, rel(*f.mask));
  }

  const RefinerConfig& c = m.refiner;
  out += "\n[refiner]\n";
  out += fmt::format("epochs = {}\n", c.epochs);
  out += fmt::format("learning_rate = {:.17g}\n", c.learning_rate);
  out += fmt::format("lambda = {:.17g}\n", c.weights.lambda);
  out += fmt::format("w_edge = {:.17g}\n", c.weights.w_edge);
  out += fmt::format("edge = {}\n", edge_kind_name(c.edge));
  out += fmt::format("sampling = {}\n", sampling_name(c.sampling));
  out += fmt::format("beta1 = {:.17g}\n", c.beta1);
  out += fmt::format("beta2 = {:.17g}\n", c.beta2);
  out += fmt::format("epsilon = {:.17g}\n", c.epsilon);
  out += fmt::format("seed = {}\n", c.seed);
  out += fmt::format("d_min = {:.17g}\n", c.min_depth);
  out += fmt::format("d_max = {:.17g}\n", c.max_depth);
  out += fmt::format("flow_threshold = {:.17g}\n", c.flow_threshold);

  std::vector<std::string> scales;
  for (int h : c.edge_config.scales) scales.push_back(std::to_string(h));
  out += "\n[edge]\n";
  out += fmt::format("scales = {}\n", join(scales, ","));
  out += fmt::format("alpha = {:.17g}\n", c.edge_config.alpha);
  out += fmt::format("ratio_base = {:.17g}\n", c.edge_config.ratio_base);
  out += fmt::format("two_sided = {}\n", c.edge_config.two_sided ? "true" : "false");
  return out;
}

SynthConfig parse_synth_config(const std::string& text) {
  const IniDocument doc = parse_ini(text);
  std::vector<std::string> problems;
  Reader r(doc, problems);
  SynthConfig c;

  std::uint64_t seed = 0;
  r.integer("scene", "seed", seed);
  if (auto p = r.text("scene", "preset", false)) c.preset = *p;
  const auto presets = SceneSpec::presets();
  if (std::find(presets.begin(), presets.end(), c.preset) == presets.end()) {
    r.problem("scene", "preset", r.find("scene", "preset"), "unknown preset '" + c.preset + "'");
    c.preset = "mixed";
  }
  c.scene = SceneSpec::desk(c.preset, seed);

  CameraIntrinsics& K = c.scene.rig.intrinsics;
  r.integer("scene", "width", K.width);
  r.integer("scene", "height", K.height);
  K.cx = (K.width - 1) / 2.0;
  K.cy = (K.height - 1) / 2.0;
  r.real("scene", "fx", K.fx);
  r.real("scene", "fy", K.fy);
  r.real("scene", "cx", K.cx);
  r.real("scene", "cy", K.cy);
  r.integer("scene", "frames", c.scene.frames);
  r.real("scene", "baseline", c.scene.rig.baseline);
  double amplitude = -1.0;
  r.real("scene", "texture_amplitude", amplitude);
  if (amplitude >= 0.0) {
    for (auto& p : c.scene.primitives) p.texture.amplitude = amplitude;
  } else if (r.find("scene", "texture_amplitude")) {
    r.problem("scene", "texture_amplitude", r.find("scene", "texture_amplitude"), "must be non-negative");
  }

  c.perturb.seed = seed;
  r.real("perturb", "noise", c.perturb.noise_sigma);
  r.real("perturb", "blur", c.perturb.blur_radius);
  r.real("perturb", "scale", c.perturb.scale);
  r.integer("perturb", "seed", c.perturb.seed);
  if (c.perturb.noise_sigma < 0.0) r.problem("perturb", "noise", r.find("perturb", "noise"), "must be >= 0");
  if (c.perturb.blur_radius < 0.0) r.problem("perturb", "blur", r.find("perturb", "blur"), "must be >= 0");
  if (!(c.perturb.scale > 0.0)) r.problem("perturb", "scale", r.find("perturb", "scale"), "must be positive");

  r.reject_unknown({"scene", "perturb"});
  try {
    c.scene.validate();
  } catch (const std::exception& e) {
    problems.push_back(std::string("[scene] ") + e.what());
  }
  if (!problems.empty()) throw ValidationError(problems);
  return c;
}

SynthConfig read_synth_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw ValidationError({"scene file not found: " + path.string()});
  }
  const Bytes b = read_file(path);
  return parse_synth_config(std::string(b.begin(), b.end()));
}

}  // namespace depthrefine
