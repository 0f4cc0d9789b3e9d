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

#ifndef FGMC_FUNCMAP_HPP_
#define FGMC_FUNCMAP_HPP_

#include <cstdint>
#include <memory>

#include "fgmc/common.hpp"
#include "fgmc/graph.hpp"

namespace fgmc {

// Trainable spectral model X = Phi (P C Q^T) Psi^T.
//
// C holds the functional-map coefficients; P and Q rotate the row and column
// bases. The bases are shared and immutable, so copying a model is cheap.
struct FunctionalModel {
  Matrix coefficients;     // C, k x k
  Matrix row_transform;    // P, k x k
  Matrix column_transform; // Q, k x k
  std::shared_ptr<const SpectralBasis> row_basis;
  std::shared_ptr<const SpectralBasis> column_basis;

  // Model with C = `coefficients`, P = Q = I.
  FunctionalModel(Matrix coefficients,
                  std::shared_ptr<const SpectralBasis> rows,
                  std::shared_ptr<const SpectralBasis> columns);

  Index k() const { return coefficients.rows(); }
  Index rows() const { return row_basis->size(); }
  Index cols() const { return column_basis->size(); }

  // B = P C Q^T.
  Matrix effective_map() const;

  // Throws ValidationError unless both bases and all three matrices share k.
  void validate() const;
};

// C = Phi^T X Psi.
Matrix encode(const Matrix& x, const Matrix& row_vectors,
              const Matrix& column_vectors);

// Phi P C Q^T Psi^T.
Matrix decode(const FunctionalModel& model);

// Phi B Psi^T for an explicit k x k map.
Matrix decode_map(const Matrix& map, const Matrix& row_vectors,
                  const Matrix& column_vectors);

// Random matrix of rank <= r supported on the product of the two bases:
// M = Phi (A B^T) Psi^T with A, B k x r standard normal. M is rescaled so the
// root-mean-square of its entries equals `target_scale`; r == 0 gives M = 0.
Matrix synthesize_bandlimited(const SpectralBasis& rows,
                              const SpectralBasis& columns, Index rank,
                              std::uint64_t seed, double target_scale = 1.0);

// Distance of the leading rank-r singular subspaces of M from span(Phi) and
// span(Psi):
//   ||U_r - Phi Phi^T U_r||_F + ||V_r - Psi Psi^T V_r||_F.
// When sigma_r is tied with sigma_{r+1} the whole tied cluster is used, and
// singular values below 1e-12 sigma_1 are never counted, so the result only
// depends on subspaces that M determines.
double basis_consistency_residual(const Matrix& m, const Matrix& row_vectors,
                                  const Matrix& column_vectors, Index rank);

}  // namespace fgmc

#endif  // FGMC_FUNCMAP_HPP_
