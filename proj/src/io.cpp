#include "depthrefine/io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>

namespace depthrefine {

namespace {

constexpr char kFloMagic[4] = {'P', 'I', 'E', 'H'};
constexpr std::size_t kFloHeaderBytes = 12;
// Upper bound on either image dimension accepted by the readers.
constexpr std::int64_t kMaxDimension = 1 << 15;

std::uint32_t load_u32_le(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

std::uint32_t load_u32_be(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

void store_u32_le(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void store_f32_le(Bytes& out, float f) { store_u32_le(out, std::bit_cast<std::uint32_t>(f)); }

void check_dimensions(std::int64_t w, std::int64_t h, std::size_t offset) {
  if (w <= 0 || h <= 0) {
    throw FormatError(fmt::format("non-positive dimensions {}x{}", w, h), offset);
  }
  if (w > kMaxDimension || h > kMaxDimension) {
    throw FormatError(fmt::format("dimensions {}x{} exceed the supported maximum", w, h), offset);
  }
}

}  // namespace

FormatError::FormatError(const std::string& what, std::optional<std::size_t> offset)
    : std::runtime_error(offset ? fmt::format("{} (at offset {})", what, *offset) : what), offset_(offset) {}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

// ---------------------------------------------------------------- .flo

FlowField decode_flo(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) {
    throw FormatError("flo: file shorter than its magic", bytes.size());
  }
  if (std::memcmp(bytes.data(), kFloMagic, 4) != 0) {
    throw FormatError("flo: bad magic, expected PIEH", 0);
  }
  if (bytes.size() < kFloHeaderBytes) {
    throw FormatError("flo: truncated header", bytes.size());
  }
  const auto w = static_cast<std::int32_t>(load_u32_le(bytes.data() + 4));
  const auto h = static_cast<std::int32_t>(load_u32_le(bytes.data() + 8));
  check_dimensions(w, h, 4);
  const std::size_t expected = kFloHeaderBytes + static_cast<std::size_t>(w) * h * 8;
  if (bytes.size() < expected) {
    throw FormatError(fmt::format("flo: truncated payload, expected {} bytes", expected), bytes.size());
  }
  if (bytes.size() > expected) {
    throw FormatError("flo: trailing bytes after payload", expected);
  }
  FlowField flow(w, h);
  const std::uint8_t* p = bytes.data() + kFloHeaderBytes;
  for (std::size_t i = 0; i < flow.size(); ++i, p += 8) {
    flow[i] = {std::bit_cast<float>(load_u32_le(p)), std::bit_cast<float>(load_u32_le(p + 4))};
  }
  return flow;
}

Bytes encode_flo(const FlowField& flow) {
  Bytes out(kFloMagic, kFloMagic + 4);
  out.reserve(kFloHeaderBytes + flow.size() * 8);
  store_u32_le(out, static_cast<std::uint32_t>(flow.width()));
  store_u32_le(out, static_cast<std::uint32_t>(flow.height()));
  for (const auto& f : flow.values()) {
    store_f32_le(out, static_cast<float>(f.du));
    store_f32_le(out, static_cast<float>(f.dv));
  }
  return out;
}

FlowField read_flo(const std::filesystem::path& path) {
  try {
    return decode_flo(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_flo(const std::filesystem::path& path, const FlowField& flow) { write_file(path, encode_flo(flow)); }

// ---------------------------------------------------------------- PFM

namespace {

struct PfmHeader {
  int width = 0;
  int height = 0;
  int channels = 1;
  bool little_endian = true;
  std::size_t payload_offset = 0;
};

PfmHeader parse_pfm_header(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto is_space = [](std::uint8_t c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; };
  auto next_token = [&]() {
    while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !is_space(bytes[pos]) && pos - start < 64) ++pos;
    if (start == pos || pos >= bytes.size()) {
      throw FormatError("pfm: truncated header", pos);
    }
    return std::pair{std::string(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(pos)),
                     start};
  };
  auto to_int = [](const std::string& s, std::size_t at) {
    std::int64_t v = 0;
    if (s.empty() || s.size() > 9) throw FormatError("pfm: bad dimension '" + s + "'", at);
    std::size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) throw FormatError("pfm: bad dimension '" + s + "'", at);
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw FormatError("pfm: bad dimension '" + s + "'", at);
      v = v * 10 + (s[i] - '0');
    }
    return s[0] == '-' ? -v : v;
  };

  PfmHeader h;
  const auto [magic, magic_at] = next_token();
  if (magic == "Pf") {
    h.channels = 1;
  } else if (magic == "PF") {
    h.channels = 3;
  } else {
    throw FormatError("pfm: bad magic '" + magic + "'", magic_at);
  }
  const auto [ws, w_at] = next_token();
  const auto [hs, h_at] = next_token();
  const std::int64_t w = to_int(ws, w_at);
  const std::int64_t hh = to_int(hs, h_at);
  check_dimensions(w, hh, w_at);
  const auto [ss, s_at] = next_token();
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(ss, &used);
    if (used != ss.size()) throw std::invalid_argument(ss);
  } catch (const std::exception&) {
    throw FormatError("pfm: bad scale '" + ss + "'", s_at);
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw FormatError("pfm: scale must be non-zero and finite", s_at);
  }
  // exactly one whitespace byte separates the header from the payload
  if (pos >= bytes.size() || !is_space(bytes[pos])) {
    throw FormatError("pfm: missing separator before payload", pos);
  }
  h.width = static_cast<int>(w);
  h.height = static_cast<int>(hh);
  h.little_endian = scale < 0.0;
  h.payload_offset = pos + 1;
  return h;
}

}  // namespace

PfmImage decode_pfm(std::span<const std::uint8_t> bytes) {
  const PfmHeader h = parse_pfm_header(bytes);
  const std::size_t count = static_cast<std::size_t>(h.width) * h.height * h.channels;
  const std::size_t expected = h.payload_offset + count * 4;
  if (bytes.size() < expected) {
    throw FormatError(fmt::format("pfm: truncated payload, expected {} bytes", expected), bytes.size());
  }
  PfmImage img{h.width, h.height, h.channels, std::vector<float>(count)};
  const std::size_t row = static_cast<std::size_t>(h.width) * h.channels;
  for (int y = 0; y < h.height; ++y) {
    // file rows run bottom to top
    const std::uint8_t* src = bytes.data() + h.payload_offset + static_cast<std::size_t>(y) * row * 4;
    float* dst = img.data.data() + static_cast<std::size_t>(h.height - 1 - y) * row;
    for (std::size_t i = 0; i < row; ++i) {
      const std::uint32_t bits = h.little_endian ? load_u32_le(src + 4 * i) : load_u32_be(src + 4 * i);
      dst[i] = std::bit_cast<float>(bits);
    }
  }
  return img;
}

Bytes encode_pfm(const PfmImage& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw DomainError("pfm: only 1 or 3 channels are supported");
  }
  const std::string header = fmt::format("{}\n{} {}\n-1\n", image.channels == 1 ? "Pf" : "PF", image.width, image.height);
  Bytes out(header.begin(), header.end());
  out.reserve(header.size() + image.data.size() * 4);
  const std::size_t row = static_cast<std::size_t>(image.width) * image.channels;
  for (int y = image.height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) {
      store_f32_le(out, image.data[static_cast<std::size_t>(y) * row + i]);
    }
  }
  return out;
}

DepthMap read_pfm_depth(const std::filesystem::path& path) {
  PfmImage img;
  try {
    img = decode_pfm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (img.channels != 1) {
    throw FormatError(path.string() + ": depth PFM must have one channel");
  }
  DepthMap d(img.width, img.height);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = img.data[i];
  }
  return d;
}

void write_pfm_depth(const std::filesystem::path& path, const DepthMap& depth) {
  PfmImage img{depth.width(), depth.height(), 1, std::vector<float>(depth.size())};
  for (std::size_t i = 0; i < depth.size(); ++i) {
    img.data[i] = static_cast<float>(depth[i]);
  }
  write_file(path, encode_pfm(img));
}

Image read_pfm_image(const std::filesystem::path& path) {
  PfmImage img;
  try {
    img = decode_pfm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  Image out(img.width, img.height, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < img.channels; ++c) {
      s += img.data[i * img.channels + c];
    }
    out[i] = s / img.channels;
  }
  return out;
}

void write_pfm_image(const std::filesystem::path& path, const Image& image) {
  PfmImage img{image.width(), image.height(), 1, std::vector<float>(image.size())};
  for (std::size_t i = 0; i < image.size(); ++i) {
    img.data[i] = static_cast<float>(image[i]);
  }
  write_file(path, encode_pfm(img));
}

// ---------------------------------------------------------------- PNG

namespace {

struct PngGray {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
  std::string error;
};

struct MemoryReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->size) {
    png_error(png, "truncated PNG data");
  }
  std::memcpy(out, r->data + r->pos, n);
  r->pos += n;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

void png_error_to_state(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngGray*>(png_get_error_ptr(png));
  state->error = msg;
  png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

// All libpng calls and the setjmp live here; results go through the heap
// state, so no object with a destructor is live across the longjmp.
bool decode_png_gray_raw(const std::uint8_t* data, std::size_t size, PngGray* state) {
  MemoryReader reader{data, size, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, state, png_error_to_state, png_warning_ignore);
  if (!png) {
    state->error = "cannot allocate PNG reader";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    state->error = "cannot allocate PNG info";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_user_limits(png, kMaxDimension, kMaxDimension);
  png_set_read_fn(png, &reader, png_read_from_memory);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  state->width = static_cast<int>(w);
  state->height = static_cast<int>(h);
  state->bit_depth = depth;
  if (color != PNG_COLOR_TYPE_GRAY) {
    state->error = "PNG must be single-channel grayscale";
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  const std::size_t bytes_per_sample = depth == 16 ? 2 : 1;
  std::uint8_t* buffer = static_cast<std::uint8_t*>(png_malloc(png, rowbytes * h));
  png_bytep* rows = static_cast<png_bytep*>(png_malloc(png, sizeof(png_bytep) * h));
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buffer + y * rowbytes;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  state->samples.resize(static_cast<std::size_t>(w) * h);
  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) {
      std::uint16_t s;
      if (depth == 16) {
        s = static_cast<std::uint16_t>((rows[y][2 * x] << 8) | rows[y][2 * x + 1]);
      } else if (depth == 8) {
        s = rows[y][x];
      } else {
        // sub-byte gray: unpack MSB-first
        const int per_byte = 8 / depth;
        const int shift = 8 - depth * (1 + static_cast<int>(x % per_byte));
        s = static_cast<std::uint16_t>((rows[y][x / per_byte] >> shift) & ((1 << depth) - 1));
      }
      state->samples[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  (void)bytes_per_sample;
  png_free(png, rows);
  png_free(png, buffer);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_png_gray_raw(const PngGray* img, Bytes* out, std::string* error) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) {
    *error = "cannot allocate PNG writer";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    *error = "cannot allocate PNG info";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    *error = "libpng failed while encoding";
    return false;
  }
  png_set_write_fn(png, out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img->width), static_cast<png_uint_32>(img->height),
               img->bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t bps = img->bit_depth == 16 ? 2 : 1;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img->width) * bps);
  for (int y = 0; y < img->height; ++y) {
    for (int x = 0; x < img->width; ++x) {
      const std::uint16_t s = img->samples[static_cast<std::size_t>(y) * img->width + x];
      if (bps == 2) {
        row[2 * x] = static_cast<std::uint8_t>(s >> 8);
        row[2 * x + 1] = static_cast<std::uint8_t>(s & 0xff);
      } else {
        row[x] = static_cast<std::uint8_t>(s);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

PngGray decode_png_gray(std::span<const std::uint8_t> bytes) {
  auto state = std::make_unique<PngGray>();
  if (!decode_png_gray_raw(bytes.data(), bytes.size(), state.get())) {
    throw FormatError("png: " + state->error);
  }
  return std::move(*state);
}

Bytes encode_png_gray(const PngGray& img) {
  Bytes out;
  std::string error;
  if (!encode_png_gray_raw(&img, &out, &error)) {
    throw std::runtime_error("png: " + error);
  }
  return out;
}

}  // namespace

DepthMap decode_png16_depth(std::span<const std::uint8_t> bytes, double scale) {
  if (!(scale > 0.0)) {
    throw DomainError("png16 depth scale must be positive");
  }
  const PngGray img = decode_png_gray(bytes);
  if (img.bit_depth != 16) {
    throw FormatError(fmt::format("png16: expected 16-bit samples, got {}-bit", img.bit_depth));
  }
  DepthMap d(img.width, img.height, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = img.samples[i] * scale;
  }
  return d;
}

Bytes encode_png16_depth(const DepthMap& depth, double scale) {
  if (!(scale > 0.0)) {
    throw DomainError("png16 depth scale must be positive");
  }
  PngGray img{depth.width(), depth.height(), 16, std::vector<std::uint16_t>(depth.size()), {}};
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!DepthMap::valid_value(depth[i])) {
      continue;
    }
    const double raw = std::floor(depth[i] / scale + 0.5);
    img.samples[i] = static_cast<std::uint16_t>(std::clamp(raw, 0.0, 65535.0));
  }
  return encode_png_gray(img);
}

DepthMap read_png16_depth(const std::filesystem::path& path, double scale) {
  try {
    return decode_png16_depth(read_file(path), scale);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_png16_depth(const std::filesystem::path& path, const DepthMap& depth, double scale) {
  write_file(path, encode_png16_depth(depth, scale));
}

void write_png8_mask(const std::filesystem::path& path, const Grid<std::uint8_t>& mask) {
  PngGray img{mask.width(), mask.height(), 8, std::vector<std::uint16_t>(mask.size()), {}};
  for (std::size_t i = 0; i < mask.size(); ++i) {
    img.samples[i] = mask[i] ? 255 : 0;
  }
  write_file(path, encode_png_gray(img));
}

Grid<std::uint8_t> read_png8_mask(const std::filesystem::path& path) {
  const PngGray img = decode_png_gray(read_file(path));
  if (img.bit_depth != 8) {
    throw FormatError(path.string() + ": mask PNG must be 8-bit");
  }
  Grid<std::uint8_t> m(img.width, img.height, 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = img.samples[i] ? 1 : 0;
  }
  return m;
}

// ---------------------------------------------------------------- text

namespace {

std::vector<double> parse_numbers(const std::string& line, std::size_t line_no, const char* what) {
  std::vector<double> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw FormatError(fmt::format("{}: line {}: '{}' is not a number", what, line_no, tok), line_no);
    }
  }
  return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

PoseTrajectory parse_kitti_poses(const std::string& text) {
  PoseTrajectory t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) {
      continue;
    }
    const auto v = parse_numbers(line, line_no, "poses");
    if (v.size() != 12) {
      throw FormatError(fmt::format("poses: line {} has {} values, expected 12", line_no, v.size()), line_no);
    }
    Eigen::Matrix3d R;
    R << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    const Eigen::Vector3d T(v[3], v[7], v[11]);
    bool fixed = false;
    const double drift = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (drift > 1e-6 || std::abs(R.determinant() - 1.0) > 1e-6) {
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::Matrix3d U = svd.matrixU();
      if ((U * svd.matrixV().transpose()).determinant() < 0.0) {
        U.col(2) *= -1.0;
      }
      R = U * svd.matrixV().transpose();
      fixed = true;
    }
    t.poses.emplace_back(R, T);
    t.reorthonormalized.push_back(fixed);
  }
  return t;
}

PoseTrajectory read_kitti_poses(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  try {
    return parse_kitti_poses(std::string(b.begin(), b.end()));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string format_kitti_poses(std::span<const RigidTransform> poses) {
  std::string out;
  for (const auto& p : poses) {
    const auto& R = p.rotation();
    const auto& T = p.translation();
    out += fmt::format("{:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n",
                       R(0, 0), R(0, 1), R(0, 2), T(0), R(1, 0), R(1, 1), R(1, 2), T(1), R(2, 0), R(2, 1),
                       R(2, 2), T(2));
  }
  return out;
}

void write_kitti_poses(const std::filesystem::path& path, std::span<const RigidTransform> poses) {
  const std::string s = format_kitti_poses(poses);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

CameraIntrinsics parse_intrinsics(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto v = parse_numbers(line, line_no, "intrinsics");
    if (v.size() != 6 || v[4] != std::floor(v[4]) || v[5] != std::floor(v[5]) || v[4] < 1 || v[5] < 1 ||
        v[4] > kMaxDimension || v[5] > kMaxDimension) {
      throw FormatError("intrinsics: expected 'fx fy cx cy width height'", line_no);
    }
    CameraIntrinsics K{v[0], v[1], v[2], v[3], static_cast<int>(v[4]), static_cast<int>(v[5])};
    try {
      K.validate();
    } catch (const DomainError& e) {
      throw FormatError(std::string("intrinsics: ") + e.what(), line_no);
    }
    return K;
  }
  throw FormatError("intrinsics: file is empty");
}

CameraIntrinsics read_intrinsics(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  try {
    return parse_intrinsics(std::string(b.begin(), b.end()));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string format_intrinsics(const CameraIntrinsics& K) {
  return fmt::format("{:.17g} {:.17g} {:.17g} {:.17g} {} {}\n", K.fx, K.fy, K.cx, K.cy, K.width, K.height);
}

ImageSize probe_size(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  const std::string ext = path.extension().string();
  if (ext == ".flo") {
    if (b.size() < kFloHeaderBytes || std::memcmp(b.data(), kFloMagic, 4) != 0) {
      throw FormatError(path.string() + ": not a .flo file");
    }
    return {static_cast<int>(load_u32_le(b.data() + 4)), static_cast<int>(load_u32_le(b.data() + 8))};
  }
  if (ext == ".pfm") {
    const PfmHeader h = parse_pfm_header(b);
    return {h.width, h.height};
  }
  if (ext == ".png") {
    static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (b.size() < 24 || std::memcmp(b.data(), sig, 8) != 0) {
      throw FormatError(path.string() + ": not a PNG file");
    }
    return {static_cast<int>(load_u32_be(b.data() + 16)), static_cast<int>(load_u32_be(b.data() + 20))};
  }
  throw FormatError(path.string() + ": unknown file type '" + ext + "'");
}

}  // namespace depthrefine
