#include "hdff/npy.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>

#include "hdff/errors.hpp"

namespace hdff {

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kPreambleLen = 10;  // magic + version + u16 header length
constexpr std::size_t kAlignment = 64;

[[noreturn]] void fail(const std::string& origin, std::size_t offset, const std::string& what) {
  throw FormatError(origin + ": at byte " + std::to_string(offset) + ": " + what);
}

/// Recursive-descent reader for the Python dict literal in an NPY header.
class DictParser {
 public:
  DictParser(std::string_view text, std::size_t base, const std::string& origin)
      : text_(text), base_(base), origin_(origin) {}

  NpyHeader parse() {
    NpyHeader header;
    std::optional<std::string> descr;
    std::optional<bool> fortran;
    std::optional<std::vector<std::size_t>> shape;

    expect('{');
    while (true) {
      skip_space();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::size_t key_at = pos_;
      const std::string key = parse_string();
      expect(':');
      if (key == "descr") {
        descr = parse_string();
      } else if (key == "fortran_order") {
        fortran = parse_bool();
      } else if (key == "shape") {
        shape = parse_tuple();
      } else {
        fail(origin_, base_ + key_at, "unexpected header key '" + key + "'");
      }
      skip_space();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        fail(origin_, base_ + pos_, "expected ',' or '}' in header dict");
      }
    }
    if (!descr || !fortran || !shape) {
      fail(origin_, base_, "header dict must define descr, fortran_order and shape");
    }
    if (*descr != "<f4") {
      fail(origin_, base_, "unsupported dtype '" + *descr + "', expected '<f4'");
    }
    if (*fortran) fail(origin_, base_, "fortran_order True is unsupported, expected False");
    header.descr = *descr;
    header.fortran_order = *fortran;
    header.shape = *shape;
    return header;
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) fail(origin_, base_ + pos_, std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string parse_string() {
    skip_space();
    const char quote = peek();
    if (quote != '\'' && quote != '"') fail(origin_, base_ + pos_, "expected a quoted string");
    const std::size_t end = text_.find(quote, pos_ + 1);
    if (end == std::string_view::npos) fail(origin_, base_ + pos_, "unterminated string");
    std::string out(text_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }

  bool parse_bool() {
    skip_space();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail(origin_, base_ + pos_, "expected True or False");
  }

  std::vector<std::size_t> parse_tuple() {
    expect('(');
    std::vector<std::size_t> dims;
    while (true) {
      skip_space();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) {
        fail(origin_, base_ + pos_, "expected a non-negative integer in shape");
      }
      std::size_t value = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        value = value * 10 + static_cast<std::size_t>(text_[pos_] - '0');
        ++pos_;
      }
      dims.push_back(value);
      skip_space();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        fail(origin_, base_ + pos_, "expected ',' or ')' in shape");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t base_;
  const std::string& origin_;
};

std::size_t product(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

std::size_t Tensor::element_count() const { return product(shape); }

NpyHeader parse_npy_header(std::span<const char> bytes, const std::string& origin) {
  if (bytes.size() < kPreambleLen) fail(origin, bytes.size(), "file too short for an NPY preamble");
  if (std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    fail(origin, 0, "bad magic, expected \\x93NUMPY");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0) {
    fail(origin, 6,
         "unsupported NPY version " + std::to_string(major) + "." + std::to_string(minor) +
             ", expected 1.0");
  }
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < kPreambleLen + header_len) {
    fail(origin, bytes.size(),
         "header truncated, expected " + std::to_string(header_len) + " header bytes");
  }
  const std::string_view text(bytes.data() + kPreambleLen, header_len);
  NpyHeader header = DictParser(text, kPreambleLen, origin).parse();
  header.data_offset = kPreambleLen + header_len;
  return header;
}

std::string make_npy_header(std::span<const std::size_t> shape) {
  std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': (";
  for (std::size_t k = 0; k < shape.size(); ++k) {
    dict += std::to_string(shape[k]);
    if (k + 1 < shape.size() || shape.size() == 1) dict += ",";
    if (k + 1 < shape.size()) dict += " ";
  }
  dict += "), }";
  const std::size_t unpadded = kPreambleLen + dict.size() + 1;  // trailing newline
  const std::size_t padding = (kAlignment - unpadded % kAlignment) % kAlignment;
  dict.append(padding, ' ');
  dict += '\n';
  const std::size_t header_len = dict.size();

  std::string out(kMagic, kMagicLen);
  out += static_cast<char>(1);
  out += static_cast<char>(0);
  out += static_cast<char>(header_len & 0xFF);
  out += static_cast<char>((header_len >> 8) & 0xFF);
  out += dict;
  return out;
}

NpyHeader read_npy_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> prefix(kPreambleLen);
  in.read(prefix.data(), static_cast<std::streamsize>(prefix.size()));
  prefix.resize(static_cast<std::size_t>(in.gcount()));
  if (prefix.size() == kPreambleLen && std::memcmp(prefix.data(), kMagic, kMagicLen) == 0) {
    const std::size_t header_len = static_cast<unsigned char>(prefix[8]) |
                                   (static_cast<std::size_t>(static_cast<unsigned char>(prefix[9])) << 8);
    prefix.resize(kPreambleLen + header_len);
    in.read(prefix.data() + kPreambleLen, static_cast<std::streamsize>(header_len));
    prefix.resize(kPreambleLen + static_cast<std::size_t>(in.gcount()));
  }
  return parse_npy_header(prefix, path.string());
}

Tensor read_tensor_file(const std::filesystem::path& path) {
  const NpyHeader header = read_npy_header(path);
  Tensor tensor;
  tensor.shape = header.shape;
  const std::size_t count = product(header.shape);
  const std::size_t expected = header.data_offset + count * sizeof(float);
  std::error_code ec;
  const auto actual = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
  if (actual != expected) {
    throw FormatError(path.string() + ": expected " + std::to_string(expected) +
                      " bytes for shape, file has " + std::to_string(actual));
  }
  tensor.data.resize(count);
  std::ifstream in(path, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(header.data_offset));
  in.read(reinterpret_cast<char*>(tensor.data.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw IoError("short read from " + path.string());
  return tensor;
}

void write_tensor_file(const std::filesystem::path& path, const Tensor& tensor) {
  if (tensor.shape.empty()) throw UsageError("write_tensor_file: rank-0 shape is not supported");
  if (tensor.element_count() != tensor.data.size()) {
    throw DimensionError("write_tensor_file: shape holds " + std::to_string(tensor.element_count()) +
                         " elements, data has " + std::to_string(tensor.data.size()));
  }
  for (std::size_t i = 0; i < tensor.data.size(); ++i) {
    if (!std::isfinite(tensor.data[i])) {
      throw UsageError("write_tensor_file: non-finite value at index " + std::to_string(i));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string header = make_npy_header(tensor.shape);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(tensor.data.data()),
            static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace hdff
