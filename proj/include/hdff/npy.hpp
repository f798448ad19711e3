#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hdff {

/// Dense float32 tensor, row-major.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  std::size_t element_count() const;
};

/// Parsed header of an NPY v1.0 file.
struct NpyHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
  std::size_t data_offset = 0;  // bytes from file start to the first element
};

/// Parses the header from a raw byte prefix (at least the full header).
/// Accepts only version 1.0, descr '<f4', fortran_order False. Throws
/// FormatError naming the byte offset and what was expected.
NpyHeader parse_npy_header(std::span<const char> bytes, const std::string& origin);

/// Header bytes for a little-endian float32 C-order array of `shape`, padded
/// with spaces so the data starts on a 64-byte boundary.
std::string make_npy_header(std::span<const std::size_t> shape);

/// Reads the header of a file without loading its data.
NpyHeader read_npy_header(const std::filesystem::path& path);

Tensor read_tensor_file(const std::filesystem::path& path);

/// Writes NPY v1.0. Rejects rank-0 shapes, size mismatches and non-finite values.
void write_tensor_file(const std::filesystem::path& path, const Tensor& tensor);

}  // namespace hdff
