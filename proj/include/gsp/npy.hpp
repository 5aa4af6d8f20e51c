#pragma once

// Minimal NPY v1.0 reader/writer: little-endian f4/f8 (plus b1/u1 for flag
// vectors), C order, rank 1 or 2. Everything else is rejected with a
// diagnostic naming the offending header field.

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsp/error.hpp"
#include "gsp/matrix.hpp"

namespace gsp::npy {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read by memcpy; a big-endian host needs byte swapping");

inline constexpr std::string_view kMagic = "\x93NUMPY";

/// Parsed header plus raw payload bytes.
struct RawArray {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
  std::vector<char> payload;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Cursor over the Python dict literal in the header.
class HeaderParser {
 public:
  HeaderParser(std::string_view text, std::string path) : text_(text), path_(std::move(path)) {}

  RawArray parse() {
    RawArray out;
    bool have_descr = false;
    bool have_order = false;
    bool have_shape = false;
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') break;
      const std::string key = parse_string();
      expect(':');
      if (key == "descr") {
        out.descr = parse_string();
        have_descr = true;
      } else if (key == "fortran_order") {
        out.fortran_order = parse_bool();
        have_order = true;
      } else if (key == "shape") {
        out.shape = parse_shape();
        have_shape = true;
      } else {
        fail("unexpected key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      skip_ws();
      if (peek() != '}') fail("expected ',' or '}'");
    }
    if (!have_descr) fail("missing field 'descr'");
    if (!have_order) fail("missing field 'fortran_order'");
    if (!have_shape) fail("missing field 'shape'");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("malformed NPY header in '" + path_ + "': " + what);
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string parse_string() {
    skip_ws();
    const char quote = peek();
    if (quote != '\'' && quote != '"') fail("expected quoted string");
    ++pos_;
    const auto end = text_.find(quote, pos_);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string s{text_.substr(pos_, end - pos_)};
    pos_ = end + 1;
    return s;
  }
  bool parse_bool() {
    skip_ws();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail("field 'fortran_order' is not True/False");
  }
  std::vector<std::size_t> parse_shape() {
    expect('(');
    std::vector<std::size_t> dims;
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        break;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("field 'shape' has a non-integer entry");
      std::size_t v = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        v = v * 10 + static_cast<std::size_t>(text_[pos_] - '0');
        ++pos_;
      }
      dims.push_back(v);
      skip_ws();
      if (peek() == ',') ++pos_;
    }
    return dims;
  }

  std::string_view text_;
  std::string path_;
  std::size_t pos_ = 0;
};

inline std::size_t item_size(const std::string& descr) {
  if (descr == "<f8") return 8;
  if (descr == "<f4") return 4;
  if (descr == "|b1" || descr == "|u1") return 1;
  return 0;
}

inline std::vector<double> widen(const RawArray& raw, std::size_t n) {
  std::vector<double> out(n);
  const char* p = raw.payload.data();
  if (raw.descr == "<f8") {
    std::memcpy(out.data(), p, n * sizeof(double));
  } else if (raw.descr == "<f4") {
    for (std::size_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, p + i * sizeof(float), sizeof(float));
      out[i] = static_cast<double>(f);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<unsigned char>(p[i]) != 0 ? 1.0 : 0.0;
  }
  return out;
}

inline std::string shape_literal(std::span<const std::size_t> shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

inline void write_array(const std::filesystem::path& path, std::span<const std::size_t> shape,
                        std::span<const double> values) {
  if (path.empty()) throw IoError("cannot write NPY: empty path");
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': " +
                       shape_literal(shape) + ", }";
  // magic(6) + version(2) + length(2) + header + '\n' aligned to 64 bytes
  const std::size_t unpadded = kMagic.size() + 4 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const auto len = static_cast<std::uint16_t>(header.size());
  const char version[2] = {1, 0};
  const char len_bytes[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  out.write(version, 2);
  out.write(len_bytes, 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace detail

/// Parse the header and slice out the payload. Validates magic, version,
/// dtype, layout and payload length; rank is left to the caller.
inline RawArray read_raw(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  const std::string where = path.string();
  if (bytes.size() < 10 || std::string_view(bytes).substr(0, 6) != kMagic) {
    throw FormatError("malformed NPY header in '" + where + "': bad magic string");
  }
  if (bytes[6] != 1 || bytes[7] != 0) {
    throw FormatError("unsupported NPY version " + std::to_string(int(bytes[6])) + "." +
                      std::to_string(int(bytes[7])) + " in '" + where + "' (only 1.0)");
  }
  const std::size_t header_len =
      static_cast<unsigned char>(bytes[8]) | (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < 10 + header_len) {
    throw FormatError("malformed NPY header in '" + where + "': truncated header");
  }
  RawArray raw = detail::HeaderParser(std::string_view(bytes).substr(10, header_len), where).parse();

  if (detail::item_size(raw.descr) == 0) {
    throw FormatError("unsupported dtype '" + raw.descr + "' in field 'descr' of '" + where + "'");
  }
  if (raw.fortran_order) {
    throw FormatError("unsupported layout in '" + where + "': fortran_order=True");
  }
  std::size_t n = 1;
  for (auto d : raw.shape) n *= d;
  const std::size_t expected = n * detail::item_size(raw.descr);
  const std::size_t available = bytes.size() - 10 - header_len;
  if (available != expected) {
    throw FormatError("payload of '" + where + "' has " + std::to_string(available) +
                      " bytes, field 'shape' implies " + std::to_string(expected));
  }
  raw.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(10 + header_len), bytes.end());
  return raw;
}

/// Load a 2-D float matrix, widened to double. No normalization.
inline EmbeddingMatrix load_matrix(const std::filesystem::path& path) {
  RawArray raw = read_raw(path);
  if (raw.descr != "<f8" && raw.descr != "<f4") {
    throw FormatError("unsupported dtype '" + raw.descr + "' in field 'descr' of '" + path.string() +
                      "' (matrices must be <f4 or <f8)");
  }
  if (raw.shape.size() != 2) {
    throw FormatError("unsupported rank " + std::to_string(raw.shape.size()) + " in field 'shape' of '" +
                      path.string() + "' (expected 2)");
  }
  const auto rows = raw.shape[0];
  const auto cols = raw.shape[1];
  if (rows == 0 || cols == 0) {
    throw FormatError("empty matrix in field 'shape' of '" + path.string() + "'");
  }
  EmbeddingMatrix m(rows, cols, detail::widen(raw, rows * cols));
  require_finite(m, path.string());
  return m;
}

inline void save_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  const std::size_t shape[2] = {m.count(), m.dim()};
  detail::write_array(path, shape, m.data());
}

/// Load a 1-D vector (shape (n,) or (n, 1)). Accepts f4/f8 and b1/u1.
inline std::vector<double> load_vector(const std::filesystem::path& path) {
  RawArray raw = read_raw(path);
  const bool column = raw.shape.size() == 2 && raw.shape[1] == 1;
  if (raw.shape.size() != 1 && !column) {
    throw FormatError("unsupported rank " + std::to_string(raw.shape.size()) + " in field 'shape' of '" +
                      path.string() + "' (expected a vector)");
  }
  auto v = detail::widen(raw, raw.shape[0]);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw FormatError(path.string() + ": non-finite value in row " + std::to_string(i));
    }
  }
  return v;
}

inline void save_vector(std::span<const double> v, const std::filesystem::path& path) {
  const std::size_t shape[1] = {v.size()};
  detail::write_array(path, shape, v);
}

}  // namespace gsp::npy
