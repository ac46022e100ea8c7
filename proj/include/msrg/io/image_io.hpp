#pragma once

// PGM (P5, 8/16-bit) and PNG (8-bit gray/RGB) ingestion and export.
// Intensities are carried as raw reals; clamping and rounding happen only when
// writing a file.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "msrg/error.hpp"
#include "msrg/spectral_core.hpp"

namespace msrg::io {

struct Image {
  int width = 0;
  int height = 0;
  int maxval = 255;
  /// One buffer per colour channel, row-major, width * height values each.
  std::vector<std::vector<double>> channels;
};

inline std::vector<std::string> channel_names(std::size_t count) {
  if (count == 1) return {"gray"};
  if (count == 3) return {"red", "green", "blue"};
  std::vector<std::string> names;
  for (std::size_t i = 0; i < count; ++i) names.push_back("channel" + std::to_string(i));
  return names;
}

namespace detail {

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void ensure_parent_exists(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw Error(ErrorCode::IoError, "output directory '" + parent.string() + "' does not exist (writing '" +
                                        path.string() + "')");
}

class PgmHeaderParser {
 public:
  PgmHeaderParser(const std::vector<unsigned char>& bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

  std::size_t offset() const noexcept { return pos_; }

  void expect_magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '5') fail("missing 'P5' magic number");
    pos_ = 2;
  }

  int next_int(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000) fail(std::string("unreasonably large ") + what);
      ++pos_;
    }
    if (pos_ == start) fail(std::string("expected ") + what);
    return static_cast<int>(value);
  }

  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("expected whitespace before raster data");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::IoError,
                "corrupted PGM header in '" + name_ + "' at byte offset " + std::to_string(pos_) + ": " + why);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

inline Image decode_pgm(const std::vector<unsigned char>& bytes, const std::string& name) {
  PgmHeaderParser p(bytes, name);
  p.expect_magic();
  Image img;
  img.width = p.next_int("width");
  img.height = p.next_int("height");
  img.maxval = p.next_int("maxval");
  if (img.width < 1 || img.height < 1) p.fail("image dimensions must be positive");
  if (img.maxval < 1 || img.maxval > 65535) p.fail("maxval must be in [1, 65535]");
  p.single_whitespace();

  const std::size_t bytes_per_sample = img.maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  const std::size_t needed = count * bytes_per_sample;
  if (bytes.size() - p.offset() < needed)
    throw Error(ErrorCode::IoError, "truncated PGM raster in '" + name + "': expected " + std::to_string(needed) +
                                        " bytes after offset " + std::to_string(p.offset()));
  std::vector<double> values(count);
  const unsigned char* raster = bytes.data() + p.offset();
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = bytes_per_sample == 2 ? static_cast<double>((raster[2 * i] << 8) | raster[2 * i + 1])
                                      : static_cast<double>(raster[i]);
  }
  img.channels.push_back(std::move(values));
  return img;
}

inline Image decode_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw Error(ErrorCode::IoError, "cannot decode PNG '" + path.string() + "': " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image), 0);
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::IoError, "cannot decode PNG '" + path.string() + "': " + message);
  }
  Image img;
  img.width = static_cast<int>(image.width);
  img.height = static_cast<int>(image.height);
  img.maxval = 255;
  const std::size_t channels = color ? 3 : 1;
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  img.channels.assign(channels, std::vector<double>(count));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t c = 0; c < channels; ++c) img.channels[c][i] = buffer[i * channels + c];
  png_image_free(&image);
  return img;
}

inline bool has_png_signature(const std::vector<unsigned char>& bytes) {
  static constexpr unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::equal(std::begin(sig), std::end(sig), bytes.begin());
}

}  // namespace detail

/// Reads a PGM or PNG, dispatching on the file's magic bytes.
inline Image read_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_bytes(path);
  if (detail::has_png_signature(bytes)) return detail::decode_png(path);
  return detail::decode_pgm(bytes, path.string());
}

/// Splits an image into square lattice fields, one per channel.
inline std::vector<PixelField> to_fields(const Image& img) {
  if (img.width != img.height)
    throw Error(ErrorCode::NonSquareImage, "image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                                               "; the torus model needs a square N x N image");
  std::vector<PixelField> fields;
  for (const auto& c : img.channels) fields.emplace_back(LatticeSize(img.width), c);
  return fields;
}

inline Image from_fields(const std::vector<PixelField>& fields, int maxval) {
  Image img;
  img.width = img.height = fields.at(0).side();
  img.maxval = maxval;
  for (const auto& f : fields) img.channels.emplace_back(f.values().begin(), f.values().end());
  return img;
}

/// Number of samples that had to be clamped into [0, maxval].
inline std::size_t count_clamped(const Image& img) {
  std::size_t n = 0;
  for (const auto& c : img.channels)
    for (double v : c)
      if (v < -0.5 || v > img.maxval + 0.5) ++n;
  return n;
}

namespace detail {
inline unsigned quantize(double v, int maxval) {
  if (!std::isfinite(v)) return 0;
  return static_cast<unsigned>(std::lround(std::clamp(v, 0.0, static_cast<double>(maxval))));
}
}  // namespace detail

/// Writes a single-channel image as binary PGM (16-bit big-endian when
/// maxval > 255).
inline void write_pgm(const std::filesystem::path& path, const Image& img) {
  if (img.channels.size() != 1) throw Error(ErrorCode::InvalidArgument, "PGM output needs exactly one channel");
  detail::ensure_parent_exists(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << "P5\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  const bool wide = img.maxval > 255;
  std::vector<unsigned char> raster;
  raster.reserve(img.channels[0].size() * (wide ? 2 : 1));
  for (double v : img.channels[0]) {
    const unsigned q = detail::quantize(v, img.maxval);
    if (wide) raster.push_back(static_cast<unsigned char>(q >> 8));
    raster.push_back(static_cast<unsigned char>(q & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

/// Writes an 8-bit gray or RGB PNG.
inline void write_png(const std::filesystem::path& path, const Image& img) {
  const std::size_t channels = img.channels.size();
  if (channels != 1 && channels != 3) throw Error(ErrorCode::InvalidArgument, "PNG output needs 1 or 3 channels");
  detail::ensure_parent_exists(path);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  std::vector<png_byte> buffer(count * channels);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t c = 0; c < channels; ++c)
      buffer[i * channels + c] = static_cast<png_byte>(detail::quantize(img.channels[c][i], 255));
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr))
    throw Error(ErrorCode::IoError, "cannot write PNG '" + path.string() + "': " + image.message);
}

/// Picks the encoder from the extension: .png, otherwise PGM. Multi-channel
/// images always go to PNG.
inline void write_image(const std::filesystem::path& path, const Image& img) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    Image eight = img;
    eight.maxval = 255;
    write_png(path, eight);
  } else if (img.channels.size() == 1) {
    write_pgm(path, img);
  } else {
    throw Error(ErrorCode::InvalidConfig, "multi-channel output must use a .png path, got '" + path.string() + "'");
  }
}

}  // namespace msrg::io
