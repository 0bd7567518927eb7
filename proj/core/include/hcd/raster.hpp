#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hcd {

enum class BandRole { optical, sar_intensity, stacked_log };

std::string to_string(BandRole role);
BandRole band_role_from_string(const std::string& s);

struct RasterHeader {
  int width = 0;
  int height = 0;
  int bands = 0;
  std::vector<BandRole> band_roles;
};

/// Row-major, pixel-interleaved float32 grid.
struct Raster {
  RasterHeader header;
  std::vector<float> data;

  int width() const { return header.width; }
  int height() const { return header.height; }
  int bands() const { return header.bands; }

  float at(int x, int y, int b) const {
    return data[(static_cast<std::size_t>(y) * header.width + x) * header.bands + b];
  }
  float& at(int x, int y, int b) {
    return data[(static_cast<std::size_t>(y) * header.width + x) * header.bands + b];
  }
};

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // 0 = no change, 1 = change

  bool at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    values[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
};

/// Reads the `.hdr` text header and its companion `.bin` payload.
/// Throws std::runtime_error on malformed keys, byte-length mismatch,
/// non-finite values, or negative SAR intensity.
Raster load_raster(const std::filesystem::path& header_path);

/// Writes header + payload so that load_raster inverts it bit-exactly.
/// Validates raster invariants before touching the filesystem.
void save_raster(const Raster& r, const std::filesystem::path& header_path);

/// Binary PGM (P5, maxval 255); pixel >= 128 maps to change=true.
/// Pass expected dimensions (> 0) to enforce a shape check.
Mask load_mask(const std::filesystem::path& path, int expected_width = -1,
               int expected_height = -1);

void save_mask(const Mask& m, const std::filesystem::path& path);

/// `.bin` path matching a `.hdr` path (extension swap).
std::filesystem::path raster_data_path(const std::filesystem::path& header_path);

}  // namespace hcd
