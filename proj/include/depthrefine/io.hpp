#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "depthrefine/flow.hpp"
#include "depthrefine/geometry.hpp"
#include "depthrefine/grid.hpp"

namespace depthrefine {

// Malformed or truncated input. `offset` is the byte (binary formats) or the
// 1-based line number (text formats) where reading failed, when known.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::optional<std::size_t> offset = std::nullopt);
  std::optional<std::size_t> offset() const { return offset_; }

 private:
  std::optional<std::size_t> offset_;
};

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Middlebury .flo: "PIEH", int32 width, int32 height, then row-major
// interleaved (du, dv) float32, all little-endian.
FlowField decode_flo(std::span<const std::uint8_t> bytes);
Bytes encode_flo(const FlowField& flow);
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const FlowField& flow);

// PFM: "Pf" (1 channel) or "PF" (3 channels), "width height", a scale whose
// sign gives the endianness (negative = little), then float32 rows stored
// bottom to top.
struct PfmImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;  // top-to-bottom, row-major, interleaved
};

PfmImage decode_pfm(std::span<const std::uint8_t> bytes);
Bytes encode_pfm(const PfmImage& image);  // always little-endian

DepthMap read_pfm_depth(const std::filesystem::path& path);
void write_pfm_depth(const std::filesystem::path& path, const DepthMap& depth);
// Three-channel files are reduced to their channel mean.
Image read_pfm_image(const std::filesystem::path& path);
void write_pfm_image(const std::filesystem::path& path, const Image& image);

// 16-bit grayscale PNG with depth = raw * scale; raw 0 is a missing depth.
DepthMap decode_png16_depth(std::span<const std::uint8_t> bytes, double scale);
Bytes encode_png16_depth(const DepthMap& depth, double scale);
DepthMap read_png16_depth(const std::filesystem::path& path, double scale);
void write_png16_depth(const std::filesystem::path& path, const DepthMap& depth, double scale);

// 8-bit grayscale PNG, 255 = set.
void write_png8_mask(const std::filesystem::path& path, const Grid<std::uint8_t>& mask);
Grid<std::uint8_t> read_png8_mask(const std::filesystem::path& path);

// KITTI odometry trajectory: one row-major 3x4 world-from-camera matrix per
// line. Rotations drifting more than 1e-6 from orthonormal are projected back
// onto SO(3) and flagged.
struct PoseTrajectory {
  std::vector<RigidTransform> poses;
  std::vector<bool> reorthonormalized;
};

PoseTrajectory parse_kitti_poses(const std::string& text);
PoseTrajectory read_kitti_poses(const std::filesystem::path& path);
std::string format_kitti_poses(std::span<const RigidTransform> poses);
void write_kitti_poses(const std::filesystem::path& path, std::span<const RigidTransform> poses);

// One line: "fx fy cx cy width height".
CameraIntrinsics parse_intrinsics(const std::string& text);
CameraIntrinsics read_intrinsics(const std::filesystem::path& path);
std::string format_intrinsics(const CameraIntrinsics& K);

struct ImageSize {
  int width = 0;
  int height = 0;
};

// Reads only the header of a .flo, .pfm or .png file.
ImageSize probe_size(const std::filesystem::path& path);

}  // namespace depthrefine
