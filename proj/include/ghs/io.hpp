#pragma once

// Serialization: basis and moment CSV, the GHM1 binary moment format,
// consistency reports as JSON/CSV, and PGM (P2/P5, 8/16-bit) images.
//
// Floats are printed with 17 significant digits ("%.17g" semantics) through
// fmt, which never consults the C locale.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <locale>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"

#include "ghs/basis.hpp"
#include "ghs/error.hpp"
#include "ghs/harness.hpp"
#include "ghs/moments.hpp"

namespace ghs {

inline std::string format_real(double v) { return fmt::format("{:.17g}", v); }

inline std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_real(m(i, j));
    }
    out += '\n';
  }
  return out;
}

inline std::string basis_to_csv(const BasisMatrix& basis) { return matrix_to_csv(basis.values()); }
inline std::string moments_to_csv(const MomentMatrix& moments) { return matrix_to_csv(moments.coeffs); }

inline Matrix matrix_from_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      std::istringstream num(field);
      num.imbue(std::locale::classic());
      double v = 0.0;
      if (!(num >> v)) throw Error(ErrorKind::io, "bad CSV number '" + field + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorKind::io, "ragged CSV");
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

// GHM1 layout: "GHM1", u32 orders P, u32 source size M, u32 reserved (0),
// then P*P little-endian IEEE-754 doubles in row-major order.
inline constexpr std::string_view kMomentMagic = "GHM1";

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out += static_cast<char>((v >> (8 * b)) & 0xFFu);
}

inline std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  return v;
}

}  // namespace detail

inline std::string moments_to_binary(const MomentMatrix& moments) {
  std::string out(kMomentMagic);
  detail::put_u32(out, static_cast<std::uint32_t>(moments.orders()));
  detail::put_u32(out, static_cast<std::uint32_t>(moments.source_size));
  detail::put_u32(out, 0);
  for (Eigen::Index i = 0; i < moments.coeffs.rows(); ++i)
    for (Eigen::Index j = 0; j < moments.coeffs.cols(); ++j) {
      const auto bits = std::bit_cast<std::uint64_t>(moments.coeffs(i, j));
      for (int b = 0; b < 8; ++b) out += static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
  return out;
}

/// Decodes a GHM1 blob; sigma and pivot are not stored and come back defaulted.
inline MomentMatrix moments_from_binary(std::string_view in) {
  if (in.size() < 16 || in.substr(0, 4) != kMomentMagic)
    throw Error(ErrorKind::io, "not a GHM1 moment file");
  const std::uint32_t p = detail::get_u32(in, 4);
  const std::uint32_t m = detail::get_u32(in, 8);
  const std::size_t expected = 16 + std::size_t{8} * p * p;
  if (in.size() != expected) throw Error(ErrorKind::io, "GHM1 payload size mismatch");
  MomentMatrix out;
  out.coeffs.resize(p, p);
  out.source_size = m;
  std::size_t at = 16;
  for (std::uint32_t i = 0; i < p; ++i)
    for (std::uint32_t j = 0; j < p; ++j) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at++])) << (8 * b);
      out.coeffs(i, j) = std::bit_cast<double>(bits);
    }
  return out;
}

/// Serializes a JSON value with sorted object keys and 17-digit floats.
inline void write_canonical_json(const nlohmann::json& value, std::string& out, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (value.type()) {
    case nlohmann::json::value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::json(key).dump() + ": ";
        write_canonical_json(item, out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i > 0) out += ",\n";
        out += pad;
        write_canonical_json(value[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += format_real(value.get<double>());
      return;
    default:
      out += value.dump();
      return;
  }
}

inline std::string canonical_json(const nlohmann::json& value) {
  std::string out;
  write_canonical_json(value, out);
  out += '\n';
  return out;
}

inline nlohmann::json report_to_json(const ConsistencyReport& r) {
  nlohmann::json j;
  j["method"] = std::string(to_string(r.method));
  j["input_id"] = r.input_id;
  j["shifts_evaluated"] = r.shifts_evaluated;
  j["ad_sum_max"] = r.ad_sum_max;
  j["ad_sum_mean"] = r.ad_sum_mean;
  j["ad_mean_max"] = r.ad_mean_max;
  j["ad_mean_mean"] = r.ad_mean_mean;
  j["invariant_fraction"] = r.invariant_fraction;
  j["tolerance"] = r.tolerance;
  j["warnings"] = r.warnings;
  return j;
}

/// One row per evaluated shift.
inline std::string report_to_csv(const ConsistencyReport& r) {
  std::string out = "method,input_id,shift_cols,shift_rows,ad_sum,ad_mean,invariant\n";
  for (const auto& rec : r.per_shift)
    out += fmt::format("{},{},{},{},{},{},{}\n", to_string(r.method), r.input_id, rec.shift.cols,
                       rec.shift.rows, format_real(rec.ad.sum), format_real(rec.ad.mean),
                       rec.invariant ? 1 : 0);
  return out;
}

/// 64-bit FNV-1a, used to fingerprint decoded pixel data.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

enum class ImageFormat { pgm_ascii, pgm_binary };

struct ImageFile {
  std::string path;
  ImageFormat format = ImageFormat::pgm_binary;
  int bit_depth = 8;
  /// Single channel, values scaled to [0, 1].
  FeatureTensor decoded;
  /// Raw samples as stored, for fingerprinting.
  std::vector<std::uint16_t> samples;

  std::uint64_t pixel_hash() const {
    std::string bytes;
    bytes.reserve(samples.size() * 2);
    for (std::uint16_t s : samples) {
      bytes += static_cast<char>(s & 0xFFu);
      bytes += static_cast<char>(s >> 8);
    }
    return fnv1a64(bytes);
  }
};

namespace detail {

// Reads the next whitespace-delimited header token, skipping '#' comments.
inline std::string pnm_token(std::string_view data, std::size_t& pos) {
  for (;;) {
    while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos < data.size() && data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
  if (start == pos) throw Error(ErrorKind::io, "truncated PGM header");
  return std::string(data.substr(start, pos - start));
}

inline unsigned long pnm_number(std::string_view data, std::size_t& pos) {
  const std::string tok = pnm_token(data, pos);
  if (tok.find_first_not_of("0123456789") != std::string::npos)
    throw Error(ErrorKind::io, "bad PGM header field '" + tok + "'");
  return std::stoul(tok);
}

}  // namespace detail

inline ImageFile decode_pgm(std::string_view data, std::string path = {}) {
  std::size_t pos = 0;
  const std::string magic = detail::pnm_token(data, pos);
  if (magic != "P2" && magic != "P5") throw Error(ErrorKind::io, "not a PGM file (P2/P5)");
  const auto width = detail::pnm_number(data, pos);
  const auto height = detail::pnm_number(data, pos);
  const auto maxval = detail::pnm_number(data, pos);
  if (width == 0 || height == 0) throw Error(ErrorKind::io, "empty PGM");
  if (maxval == 0 || maxval > 65535) throw Error(ErrorKind::io, "PGM maxval out of range");
  if (width != height)
    throw Error(ErrorKind::non_square_input, fmt::format("image is {}x{}; only square images are "
                                                         "supported", width, height));
  ImageFile img;
  img.path = std::move(path);
  img.format = magic == "P2" ? ImageFormat::pgm_ascii : ImageFormat::pgm_binary;
  img.bit_depth = maxval > 255 ? 16 : 8;
  const std::size_t count = width * height;
  img.samples.resize(count);
  if (img.format == ImageFormat::pgm_binary) {
    ++pos;  // single whitespace after maxval
    const std::size_t bytes = img.bit_depth == 16 ? 2 : 1;
    if (data.size() < pos + count * bytes) throw Error(ErrorKind::io, "truncated PGM raster");
    for (std::size_t k = 0; k < count; ++k) {
      const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos + k * bytes);
      img.samples[k] = bytes == 2 ? static_cast<std::uint16_t>((p[0] << 8) | p[1]) : p[0];
    }
  } else {
    for (std::size_t k = 0; k < count; ++k)
      img.samples[k] = static_cast<std::uint16_t>(detail::pnm_number(data, pos));
  }
  const auto n = static_cast<Eigen::Index>(width);
  Matrix m(n, n);
  for (std::size_t k = 0; k < count; ++k) {
    if (img.samples[k] > maxval) throw Error(ErrorKind::io, "PGM sample exceeds maxval");
    m(static_cast<Eigen::Index>(k / width), static_cast<Eigen::Index>(k % width)) =
        static_cast<double>(img.samples[k]) / static_cast<double>(maxval);
  }
  img.decoded = FeatureTensor({std::move(m)});
  return img;
}

inline ImageFile read_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file(path), path.string());
}

/// Clamps to [0, 1] and quantizes with round-half-to-even.
inline std::uint16_t quantize(double v, int bit_depth) {
  const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::nearbyint(clamped * maxval));
}

/// Encodes one channel as PGM; 8 or 16 bit, binary (P5) or ASCII (P2).
inline std::string encode_pgm(const Matrix& image, int bit_depth = 8,
                              ImageFormat format = ImageFormat::pgm_binary) {
  if (bit_depth != 8 && bit_depth != 16) throw Error(ErrorKind::invalid_config, "bit depth 8 or 16");
  const int maxval = bit_depth == 16 ? 65535 : 255;
  const bool binary = format == ImageFormat::pgm_binary;
  std::string out = fmt::format("{}\n{} {}\n{}\n", binary ? "P5" : "P2", image.cols(), image.rows(),
                                maxval);
  for (Eigen::Index i = 0; i < image.rows(); ++i) {
    for (Eigen::Index j = 0; j < image.cols(); ++j) {
      const std::uint16_t q = quantize(image(i, j), bit_depth);
      if (binary) {
        if (bit_depth == 16) out += static_cast<char>(q >> 8);
        out += static_cast<char>(q & 0xFFu);
      } else {
        out += fmt::format("{}{}", j == 0 ? "" : " ", q);
      }
    }
    if (!binary) out += '\n';
  }
  return out;
}

inline void write_pgm(const std::filesystem::path& path, const Matrix& image, int bit_depth = 8,
                      ImageFormat format = ImageFormat::pgm_binary) {
  write_file(path, encode_pgm(image, bit_depth, format));
}

}  // namespace ghs
