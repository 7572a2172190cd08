#pragma once

// Locale-independent CSV and binary PGM (P5) output.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "pcx/error.hpp"
#include "pcx/scan.hpp"

namespace pcx {

/// 17 significant digits, independent of the C locale.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << fields[i];
  }
  os << '\n';
}

/// 8-bit gray level of a value on the fixed 0..1 bit scale.
inline std::uint8_t gray_level(double bits) {
  const double v = std::clamp(bits, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(255.0 * v));
}

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first
};

/// Time runs left to right, site 1 is the top row.
inline GrayImage grid_image(const SpacetimeGrid& grid) {
  GrayImage img;
  img.width = static_cast<int>(grid.values.cols());
  img.height = static_cast<int>(grid.values.rows());
  img.pixels.reserve(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  for (Eigen::Index r = 0; r < grid.values.rows(); ++r)
    for (Eigen::Index c = 0; c < grid.values.cols(); ++c) img.pixels.push_back(gray_level(grid.values(r, c)));
  return img;
}

inline void write_pgm(std::ostream& os, const GrayImage& img) {
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

inline GrayImage read_pgm(std::istream& is) {
  std::string magic;
  GrayImage img;
  int maxval = 0;
  is >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || maxval != 255 || img.width <= 0 || img.height <= 0) throw Error(ErrorKind::io, "not an 8-bit P5 image");
  is.get();
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!is) throw Error(ErrorKind::io, "truncated image");
  return img;
}

inline std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  return out;
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error(ErrorKind::io, "cannot create output directory " + dir.string());
}

}  // namespace pcx
