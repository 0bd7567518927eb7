#include "hcd/raster.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "raster payloads are little-endian; big-endian hosts unsupported");

namespace hcd {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void validate(const Raster& r, const std::string& ctx) {
  const auto& h = r.header;
  if (h.width <= 0 || h.height <= 0 || h.bands <= 0)
    fail(ctx + ": non-positive raster dimensions");
  if (static_cast<int>(h.band_roles.size()) != h.bands)
    fail(ctx + ": band_roles length does not match band count");
  const std::size_t expected =
      static_cast<std::size_t>(h.width) * h.height * h.bands;
  if (r.data.size() != expected) fail(ctx + ": data size does not match header");
  for (std::size_t i = 0; i < r.data.size(); ++i) {
    const float v = r.data[i];
    if (!std::isfinite(v)) fail(ctx + ": non-finite value in raster data");
    if (h.band_roles[i % h.bands] == BandRole::sar_intensity && v < 0.0f)
      fail(ctx + ": negative SAR intensity");
  }
}

}  // namespace

std::string to_string(BandRole role) {
  switch (role) {
    case BandRole::optical: return "optical";
    case BandRole::sar_intensity: return "sar_intensity";
    case BandRole::stacked_log: return "stacked_log";
  }
  fail("unknown band role");
}

BandRole band_role_from_string(const std::string& s) {
  if (s == "optical") return BandRole::optical;
  if (s == "sar_intensity") return BandRole::sar_intensity;
  if (s == "stacked_log") return BandRole::stacked_log;
  fail("unknown band role '" + s + "'");
}

std::filesystem::path raster_data_path(const std::filesystem::path& header_path) {
  std::filesystem::path p = header_path;
  p.replace_extension(".bin");
  return p;
}

Raster load_raster(const std::filesystem::path& header_path) {
  std::ifstream in(header_path);
  if (!in) fail("cannot open header " + header_path.string());

  RasterHeader h;
  bool have_w = false, have_h = false, have_b = false, have_roles = false;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("malformed header line '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "width") {
      h.width = std::stoi(val);
      have_w = true;
    } else if (key == "height") {
      h.height = std::stoi(val);
      have_h = true;
    } else if (key == "bands") {
      h.bands = std::stoi(val);
      have_b = true;
    } else if (key == "dtype") {
      if (val != "float32") fail("unsupported dtype '" + val + "'");
    } else if (key == "interleave") {
      if (val != "band-interleaved-by-pixel")
        fail("unsupported interleave '" + val + "'");
    } else if (key == "byteorder") {
      if (val != "little") fail("unsupported byteorder '" + val + "'");
    } else if (key == "band_roles") {
      std::stringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ','))
        h.band_roles.push_back(band_role_from_string(trim(tok)));
      have_roles = true;
    } else {
      fail("unknown header key '" + key + "'");
    }
  }
  if (!have_w || !have_h || !have_b || !have_roles)
    fail("header " + header_path.string() + " is missing required keys");
  if (h.width <= 0 || h.height <= 0 || h.bands <= 0)
    fail("non-positive dimension in header " + header_path.string());
  if (static_cast<int>(h.band_roles.size()) != h.bands)
    fail("band_roles length does not match bands in " + header_path.string());

  const auto data_path = raster_data_path(header_path);
  std::ifstream bin(data_path, std::ios::binary | std::ios::ate);
  if (!bin) fail("cannot open data file " + data_path.string());
  const std::size_t nvalues =
      static_cast<std::size_t>(h.width) * h.height * h.bands;
  const auto nbytes = static_cast<std::uintmax_t>(bin.tellg());
  if (nbytes != nvalues * 4)
    fail("data file " + data_path.string() + " has " + std::to_string(nbytes) +
         " bytes, expected " + std::to_string(nvalues * 4));
  bin.seekg(0);

  Raster r;
  r.header = std::move(h);
  r.data.resize(nvalues);
  bin.read(reinterpret_cast<char*>(r.data.data()),
           static_cast<std::streamsize>(nvalues * 4));
  if (!bin) fail("short read from " + data_path.string());

  validate(r, "load_raster(" + header_path.string() + ")");
  return r;
}

void save_raster(const Raster& r, const std::filesystem::path& header_path) {
  validate(r, "save_raster(" + header_path.string() + ")");

  std::ofstream out(header_path);
  if (!out) fail("cannot write header " + header_path.string());
  out << "width=" << r.header.width << "\n";
  out << "height=" << r.header.height << "\n";
  out << "bands=" << r.header.bands << "\n";
  out << "dtype=float32\n";
  out << "interleave=band-interleaved-by-pixel\n";
  out << "byteorder=little\n";
  out << "band_roles=";
  for (int b = 0; b < r.header.bands; ++b)
    out << (b ? "," : "") << to_string(r.header.band_roles[b]);
  out << "\n";
  if (!out) fail("I/O failure writing " + header_path.string());

  const auto data_path = raster_data_path(header_path);
  std::ofstream bin(data_path, std::ios::binary);
  if (!bin) fail("cannot write data file " + data_path.string());
  bin.write(reinterpret_cast<const char*>(r.data.data()),
            static_cast<std::streamsize>(r.data.size() * 4));
  if (!bin) fail("I/O failure writing " + data_path.string());
}

namespace {

int pgm_next_int(std::istream& in) {
  // Skips whitespace and '#' comment lines between header tokens.
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      in.unget();
      break;
    }
  }
  int v;
  if (!(in >> v)) fail("malformed PGM header");
  return v;
}

}  // namespace

Mask load_mask(const std::filesystem::path& path, int expected_width,
               int expected_height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open mask " + path.string());
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5')
    fail(path.string() + " is not a binary PGM (P5)");
  const int w = pgm_next_int(in);
  const int h = pgm_next_int(in);
  const int maxval = pgm_next_int(in);
  if (w <= 0 || h <= 0) fail("non-positive PGM dimensions in " + path.string());
  if (maxval != 255) fail("PGM maxval must be 255 in " + path.string());
  in.get();  // single whitespace after maxval

  if ((expected_width > 0 && w != expected_width) ||
      (expected_height > 0 && h != expected_height))
    fail("mask " + path.string() + " dimensions " + std::to_string(w) + "x" +
         std::to_string(h) + " do not match expected shape");

  Mask m;
  m.width = w;
  m.height = h;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (!in) fail("short read from mask " + path.string());
  m.values.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) m.values[i] = raw[i] >= 128 ? 1 : 0;
  return m;
}

void save_mask(const Mask& m, const std::filesystem::path& path) {
  if (m.width <= 0 || m.height <= 0) fail("cannot save mask with degenerate dimensions");
  if (m.values.size() != static_cast<std::size_t>(m.width) * m.height)
    fail("mask value count does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write mask " + path.string());
  out << "P5\n" << m.width << " " << m.height << "\n255\n";
  std::vector<std::uint8_t> raw(m.values.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = m.values[i] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) fail("I/O failure writing mask " + path.string());
}

}  // namespace hcd
