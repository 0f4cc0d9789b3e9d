// Copyright 2026 The fgmc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fgmc/funcmap.hpp"

#include <cmath>
#include <random>

#include "fgmc/random.hpp"

namespace fgmc {

FunctionalModel::FunctionalModel(Matrix c,
                                 std::shared_ptr<const SpectralBasis> rows,
                                 std::shared_ptr<const SpectralBasis> columns)
    : coefficients(std::move(c)),
      row_transform(Matrix::Identity(coefficients.rows(), coefficients.rows())),
      column_transform(Matrix::Identity(coefficients.rows(), coefficients.rows())),
      row_basis(std::move(rows)),
      column_basis(std::move(columns)) {
  validate();
}

Matrix FunctionalModel::effective_map() const {
  return row_transform * coefficients * column_transform.transpose();
}

void FunctionalModel::validate() const {
  if (!row_basis || !column_basis) {
    throw ValidationError("functional model needs both bases");
  }
  const Index k = coefficients.rows();
  const auto square_k = [k](const Matrix& a) {
    return a.rows() == k && a.cols() == k;
  };
  if (!square_k(coefficients) || !square_k(row_transform) ||
      !square_k(column_transform) || row_basis->k() != k ||
      column_basis->k() != k) {
    throw ValidationError("functional model requires C, P, Q and both bases "
                          "to share basis size k");
  }
}

Matrix encode(const Matrix& x, const Matrix& row_vectors,
              const Matrix& column_vectors) {
  if (x.rows() != row_vectors.rows() || x.cols() != column_vectors.rows()) {
    throw ValidationError("encode: matrix is " + std::to_string(x.rows()) + "x" +
                          std::to_string(x.cols()) + " but bases span " +
                          std::to_string(row_vectors.rows()) + "x" +
                          std::to_string(column_vectors.rows()));
  }
  return row_vectors.transpose() * x * column_vectors;
}

Matrix decode_map(const Matrix& map, const Matrix& row_vectors,
                  const Matrix& column_vectors) {
  if (map.rows() != row_vectors.cols() || map.cols() != column_vectors.cols()) {
    throw ValidationError("decode: map shape does not match the bases");
  }
  return (row_vectors * map) * column_vectors.transpose();
}

Matrix decode(const FunctionalModel& model) {
  return decode_map(model.effective_map(), model.row_basis->vectors,
                    model.column_basis->vectors);
}

Matrix synthesize_bandlimited(const SpectralBasis& rows,
                              const SpectralBasis& columns, Index rank,
                              std::uint64_t seed, double target_scale) {
  const Index k = std::min(rows.k(), columns.k());
  if (rank < 0 || rank > k) {
    throw ValidationError("band-limited rank " + std::to_string(rank) +
                          " exceeds basis size " + std::to_string(k));
  }
  if (!(target_scale > 0.0)) {
    throw ValidationError("target_scale must be positive");
  }
  if (rank == 0) return Matrix::Zero(rows.size(), columns.size());

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(rows.k(), rank);
  Matrix b(columns.k(), rank);
  for (Index j = 0; j < rank; ++j) {
    for (Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
  }
  for (Index j = 0; j < rank; ++j) {
    for (Index i = 0; i < b.rows(); ++i) b(i, j) = normal(rng);
  }
  Matrix m = (rows.vectors * a) * (columns.vectors * b).transpose();
  const double rms = std::sqrt(m.squaredNorm() / static_cast<double>(m.size()));
  if (rms > 0.0) m *= target_scale / rms;
  return m;
}

double basis_consistency_residual(const Matrix& m, const Matrix& row_vectors,
                                  const Matrix& column_vectors, Index rank) {
  if (m.rows() != row_vectors.rows() || m.cols() != column_vectors.rows()) {
    throw ValidationError("basis_consistency_residual: shape mismatch");
  }
  const Index limit = std::min({m.rows(), m.cols(), row_vectors.cols(),
                                column_vectors.cols()});
  if (rank < 0 || rank > limit) {
    throw ValidationError("rank must lie in [0, min(m, n, k)]");
  }
  if (rank == 0 || m.size() == 0) return 0.0;

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  if (sigma(0) == 0.0) return 0.0;

  const double floor = 1e-12 * sigma(0);
  Index r = rank;
  while (r > 0 && sigma(r - 1) <= floor) --r;
  const double tie = 1e-10 * sigma(0);
  while (r > 0 && r < sigma.size() && sigma(r) > floor &&
         std::abs(sigma(r - 1) - sigma(r)) <= tie) {
    ++r;
  }
  if (r == 0) return 0.0;

  const auto off_span = [](const Matrix& basis, const Matrix& u) {
    return (u - basis * (basis.transpose() * u)).norm();
  };
  return off_span(row_vectors, svd.matrixU().leftCols(r)) +
         off_span(column_vectors, svd.matrixV().leftCols(r));
}

}  // namespace fgmc
