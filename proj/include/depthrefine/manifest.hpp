#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "depthrefine/refiner.hpp"
#include "depthrefine/synth.hpp"

namespace depthrefine {

// A manifest failed validation. Carries every problem found, not just the
// first one.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Minimal INI: "[section]" headers, "key = value" lines, '#' or ';' comments.
struct IniEntry {
  std::string value;
  int line = 0;
};

using IniSection = std::map<std::string, IniEntry>;
using IniDocument = std::map<std::string, IniSection>;

// Throws ValidationError for malformed lines and duplicate keys.
IniDocument parse_ini(const std::string& text);

struct FlowFiles {
  FramePair pair;
  std::filesystem::path forward;
  std::filesystem::path backward;
  std::optional<std::filesystem::path> mask;
};

// One run: every input file named explicitly, paths resolved against the
// manifest's directory.
struct RunManifest {
  std::filesystem::path source;
  int frames = 0;
  double depth_scale = 1.0 / 256.0;  // meters per unit for .png depths
  std::vector<std::filesystem::path> left_depth;
  std::vector<std::filesystem::path> right_depth;  // empty or one per frame
  std::vector<std::filesystem::path> left_image;   // empty or one per frame
  std::vector<std::filesystem::path> right_image;
  std::map<FramePair, FlowFiles> flows;
  std::filesystem::path intrinsics;
  std::filesystem::path trajectory;
  double baseline = 0.0;
  RefinerConfig refiner;
};

// Parses and validates: unknown keys, missing keys, bad values, missing files
// and mismatched dimensions are all reported together.
RunManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
RunManifest read_manifest(const std::filesystem::path& path);

// Flows the manifest lacks for the pair set a sampling mode needs.
std::vector<std::string> missing_flows(const RunManifest& m, FrameSampling sampling);

VideoBundle load_bundle(const RunManifest& m);

// Manifest text for a run with paths relative to `base_dir`.
std::string format_manifest(const RunManifest& m, const std::filesystem::path& base_dir);

std::string sampling_name(FrameSampling s);
std::string edge_kind_name(EdgeLossKind k);
std::optional<FrameSampling> parse_sampling(const std::string& s);
std::optional<EdgeLossKind> parse_edge_kind(const std::string& s);

// Scene description for the synthetic generator.
struct SynthConfig {
  std::string preset = "mixed";
  SceneSpec scene = SceneSpec::desk("mixed", 0);
  Perturbation perturb{0.1, 0.0, 1.0, 0};
};

SynthConfig parse_synth_config(const std::string& text);
SynthConfig read_synth_config(const std::filesystem::path& path);

}  // namespace depthrefine
