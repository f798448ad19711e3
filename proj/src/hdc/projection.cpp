#include "hdff/projection.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <string>

#include "hdff/errors.hpp"
#include "hdff/rng.hpp"

namespace hdff {

namespace {

// First c columns of Q. Reflector blocks are applied last to first, each only
// to the trailing submatrix it can change.
Eigen::MatrixXd thin_q(const Eigen::HouseholderQR<Eigen::MatrixXd>& qr) {
  constexpr Eigen::Index kBlock = 64;
  const auto& h = qr.matrixQR();
  const Eigen::Index m = h.rows(), c = h.cols();
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(m, c);
  for (Eigen::Index k0 = ((c - 1) / kBlock) * kBlock; k0 >= 0; k0 -= kBlock) {
    const Eigen::Index n = std::min(c, k0 + kBlock) - k0;
    const Eigen::HouseholderSequence<Eigen::MatrixXd::ConstBlockXpr,
                                     Eigen::VectorXd::ConstSegmentReturnType>
        seq(h.block(k0, k0, m - k0, n), qr.hCoeffs().segment(k0, n));
    q.block(k0, k0, m - k0, c - k0).applyOnTheLeft(seq);
  }
  return q;
}

}  // namespace

ProjectionMatrix64 generate_semi_orthogonal_f64(std::uint64_t seed, std::size_t m, std::size_t c,
                                                int layer_id) {
  if (m == 0 || c == 0) throw DimensionError("generate_semi_orthogonal: m and c must be >= 1");
  if (m < c) {
    throw DimensionError("generate_semi_orthogonal: cannot orthogonally embed " +
                         std::to_string(c) + " dims into fewer than " + std::to_string(c) +
                         " dims (m = " + std::to_string(m) + ")");
  }
  const auto rows = static_cast<Eigen::Index>(m);
  const auto cols = static_cast<Eigen::Index>(c);

  const CounterRng rng(seed);
  Eigen::MatrixXd gaussian(rows, cols);
  rng.gaussians(0, std::span<double>(gaussian.data(), m * c));

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = thin_q(qr);
  const auto diag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (diag(j) < 0.0) q.col(j) *= -1.0;
  }
  return ProjectionMatrix64(std::move(q), layer_id, seed);
}

ProjectionMatrix generate_semi_orthogonal(std::uint64_t seed, std::size_t m, std::size_t c,
                                          int layer_id) {
  return narrow(generate_semi_orthogonal_f64(seed, m, c, layer_id));
}

ProjectionMatrix narrow(const ProjectionMatrix64& wide) {
  return ProjectionMatrix(wide.entries().cast<float>(), wide.layer_id(), wide.seed());
}

void project_into(const ProjectionMatrix& p, std::span<const float> v, std::span<double> acc) {
  if (v.size() != p.cols()) {
    throw DimensionError("project: layer " + std::to_string(p.layer_id()) + " expects " +
                         std::to_string(p.cols()) + " channels, got " + std::to_string(v.size()));
  }
  if (acc.size() != p.rows()) {
    throw DimensionError("project: accumulator has length " + std::to_string(acc.size()) +
                         ", expected " + std::to_string(p.rows()));
  }
  std::fill(acc.begin(), acc.end(), 0.0);
  const std::size_t m = p.rows();
  double* out = acc.data();
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double vj = v[j];
    if (vj == 0.0) continue;
    const float* col = p.column(j).data();
    for (std::size_t i = 0; i < m; ++i) out[i] += static_cast<double>(col[i]) * vj;
  }
}

void project_batch_into(const ProjectionMatrix& p, std::span<const std::span<const float>> vs,
                        std::span<double> acc) {
  const std::size_t m = p.rows();
  if (acc.size() != vs.size() * m) {
    throw DimensionError("project: batch accumulator has length " + std::to_string(acc.size()) +
                         ", expected " + std::to_string(vs.size() * m));
  }
  for (const auto& v : vs) {
    if (v.size() != p.cols()) {
      throw DimensionError("project: layer " + std::to_string(p.layer_id()) + " expects " +
                           std::to_string(p.cols()) + " channels, got " + std::to_string(v.size()));
    }
  }
  std::fill(acc.begin(), acc.end(), 0.0);
  constexpr std::size_t kBlock = 512;
  for (std::size_t i0 = 0; i0 < m; i0 += kBlock) {
    const std::size_t i1 = std::min(m, i0 + kBlock);
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const float* col = p.column(j).data();
      for (std::size_t b = 0; b < vs.size(); ++b) {
        const double vj = vs[b][j];
        if (vj == 0.0) continue;
        double* out = acc.data() + b * m;
        for (std::size_t i = i0; i < i1; ++i) out[i] += static_cast<double>(col[i]) * vj;
      }
    }
  }
}

HdVector project(const ProjectionMatrix& p, std::span<const float> v) {
  std::vector<double> acc(p.rows());
  project_into(p, v, acc);
  return HdVector::from_accumulator(acc);
}

std::uint64_t layer_seed(std::uint64_t master_seed, int layer_id) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(layer_id)));
}

ProjectionSet::ProjectionSet(std::size_t hd_dim, std::uint64_t master_seed,
                             std::vector<ProjectionMatrix> matrices)
    : hd_dim_(hd_dim), master_seed_(master_seed), matrices_(std::move(matrices)) {
  for (const auto& p : matrices_) {
    if (p.rows() != hd_dim_) {
      throw DimensionError("ProjectionSet: layer " + std::to_string(p.layer_id()) + " has " +
                           std::to_string(p.rows()) + " rows, expected " +
                           std::to_string(hd_dim_));
    }
  }
}

ProjectionSet ProjectionSet::generate(std::uint64_t master_seed, std::size_t hd_dim,
                                      std::span<const LayerShape> layers) {
  ProjectionSet set;
  set.hd_dim_ = hd_dim;
  set.master_seed_ = master_seed;
  set.matrices_.reserve(layers.size());
  for (const auto& layer : layers) {
    set.matrices_.push_back(generate_semi_orthogonal(layer_seed(master_seed, layer.layer_id),
                                                     hd_dim, layer.channels, layer.layer_id));
  }
  return set;
}

const ProjectionMatrix& ProjectionSet::for_layer(int layer_id) const {
  for (const auto& p : matrices_) {
    if (p.layer_id() == layer_id) return p;
  }
  throw UsageError("ProjectionSet: no projection for layer " + std::to_string(layer_id));
}

}  // namespace hdff
