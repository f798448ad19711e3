#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hdff/hd_vector.hpp"

namespace hdff {

/// An m x c matrix with orthonormal columns (P^T P = I_c), used to embed a
/// c-channel feature vector into the m-dimensional hyperspace while keeping
/// inner products intact. Column-major.
template <typename Scalar>
class BasicProjectionMatrix {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BasicProjectionMatrix(Matrix entries, int layer_id, std::uint64_t seed)
      : entries_(std::move(entries)), layer_id_(layer_id), seed_(seed) {}

  std::size_t rows() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(entries_.cols()); }
  int layer_id() const { return layer_id_; }
  std::uint64_t seed() const { return seed_; }
  const Matrix& entries() const { return entries_; }

  std::span<const Scalar> column(std::size_t j) const {
    return {entries_.data() + j * rows(), rows()};
  }

 private:
  Matrix entries_;
  int layer_id_;
  std::uint64_t seed_;
};

using ProjectionMatrix = BasicProjectionMatrix<float>;
using ProjectionMatrix64 = BasicProjectionMatrix<double>;

/// Gaussian m x c draw -> thin QR -> Q with each column multiplied by the sign
/// of the matching diagonal entry of R. Deterministic in (seed, m, c).
/// Throws DimensionError when m < c.
ProjectionMatrix64 generate_semi_orthogonal_f64(std::uint64_t seed, std::size_t m, std::size_t c,
                                                int layer_id = 0);

/// 32-bit storage of the same matrix.
ProjectionMatrix generate_semi_orthogonal(std::uint64_t seed, std::size_t m, std::size_t c,
                                          int layer_id = 0);

/// Rounds a 64-bit matrix to 32-bit storage, keeping layer id and seed.
ProjectionMatrix narrow(const ProjectionMatrix64& wide);

/// acc[i] = sum_j P(i, j) * v[j], accumulated in double. Overwrites acc.
void project_into(const ProjectionMatrix& p, std::span<const float> v, std::span<double> acc);

/// Projects several vectors in one pass over P, walking it in row blocks so
/// each block stays in cache while every input uses it. acc holds
/// vs.size() consecutive rows of length m. Bit-identical to calling
/// project_into on each vector.
void project_batch_into(const ProjectionMatrix& p, std::span<const std::span<const float>> vs,
                        std::span<double> acc);

/// h = P v.
HdVector project(const ProjectionMatrix& p, std::span<const float> v);

/// Per-layer projection seed.
std::uint64_t layer_seed(std::uint64_t master_seed, int layer_id);

struct LayerShape {
  int layer_id = 0;
  std::size_t channels = 0;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// One projection per layer, all into the same m-dimensional space. Only the
/// master seed and the layer shapes are needed to rebuild it.
class ProjectionSet {
 public:
  ProjectionSet() = default;

  /// Assembles a set from explicit matrices; all must have `hd_dim` rows.
  ProjectionSet(std::size_t hd_dim, std::uint64_t master_seed,
                std::vector<ProjectionMatrix> matrices);

  static ProjectionSet generate(std::uint64_t master_seed, std::size_t hd_dim,
                                std::span<const LayerShape> layers);

  std::size_t hd_dim() const { return hd_dim_; }
  std::uint64_t master_seed() const { return master_seed_; }
  const std::vector<ProjectionMatrix>& matrices() const { return matrices_; }

  /// Throws UsageError if the layer is not part of the set.
  const ProjectionMatrix& for_layer(int layer_id) const;

 private:
  std::size_t hd_dim_ = 0;
  std::uint64_t master_seed_ = 0;
  std::vector<ProjectionMatrix> matrices_;
};

}  // namespace hdff
