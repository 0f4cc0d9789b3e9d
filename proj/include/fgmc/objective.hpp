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

#ifndef FGMC_OBJECTIVE_HPP_
#define FGMC_OBJECTIVE_HPP_

#include <span>
#include <vector>

#include "fgmc/common.hpp"
#include "fgmc/funcmap.hpp"

namespace fgmc {

// Ground-truth values with their observation mask. Entries outside the mask
// are stored as 0; the constructor zeroes them.
class MaskedMatrix {
 public:
  MaskedMatrix(Matrix values, Mask mask);

  const Matrix& values() const { return values_; }
  const Mask& mask() const { return mask_; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  Index observed_count() const { return mask_.count(); }

  // Same values restricted to `subset` (which must lie inside the mask).
  MaskedMatrix restricted(const Mask& subset) const;

 private:
  Matrix values_;
  Mask mask_;
};

struct Entry {
  Index row;
  Index col;
  double value;
};

// Entries of `values` selected by `mask`, in column-major order.
std::vector<Entry> masked_entries(const Matrix& values, const Mask& mask);

struct EnergyBreakdown {
  double data = 0.0;
  double reg = 0.0;
  double total = 0.0;
  double mu = 0.0;
};

// Which map the commutativity penalty sees: the effective map P C Q^T or the
// raw coefficients C.
enum class RegTarget { kEffective, kRaw };

struct ModelGradients {
  Matrix coefficients;
  Matrix row_transform;
  Matrix column_transform;

  double squared_norm() const;
};

// ||(X - M) .* S||_F^2 with X = decode(model).
double data_term(const FunctionalModel& model, const MaskedMatrix& obs);

// ||B diag(row_values) - diag(column_values) B||_F^2.
double commutativity_energy(const Matrix& map, const Vector& row_values,
                            const Vector& column_values);
Matrix commutativity_gradient(const Matrix& map, const Vector& row_values,
                              const Vector& column_values);

// tr(X^T L_rows X) and tr(X L_cols X^T).
double dirichlet_rows(const Matrix& x, const Matrix& row_laplacian);
double dirichlet_cols(const Matrix& x, const Matrix& column_laplacian);

// Sum of squared off-diagonal entries of R^T diag(values) R.
double offdiag_penalty(const Matrix& r, const Vector& values);
Matrix offdiag_penalty_gradient(const Matrix& r, const Vector& values);

// data_term + mu * commutativity_energy of the chosen map.
EnergyBreakdown total_objective(const FunctionalModel& model,
                                const MaskedMatrix& obs, double mu,
                                RegTarget target = RegTarget::kEffective);

// With R = (X - M) .* S, D = 2 Phi^T R Psi, B = P C Q^T and G = D + mu G_B:
//   dC = P^T G Q,  dP = G Q C^T,  dQ = G^T P C.
// For RegTarget::kRaw the penalty gradient is added to dC only.
ModelGradients gradients(const FunctionalModel& model, const MaskedMatrix& obs,
                         double mu, RegTarget target = RegTarget::kEffective);

// Weights of the four-term spectral-geometric baseline loss.
struct SgmcWeights {
  double row_dirichlet = 1e-3;
  double column_dirichlet = 1e-3;
  double row_offdiag = 1e-5;
  double column_offdiag = 1e-5;
};

// Baseline loss: data term plus weighted row/column Dirichlet energies of X
// and off-diagonal penalties on P^T Lambda_rows P and Q^T Lambda_cols Q.
// `reg` holds the weighted sum of the four terms and `mu` is 1.
EnergyBreakdown sgmc_objective(const FunctionalModel& model,
                               const MaskedMatrix& obs,
                               const Matrix& row_laplacian,
                               const Matrix& column_laplacian,
                               const SgmcWeights& weights);
ModelGradients sgmc_gradients(const FunctionalModel& model,
                              const MaskedMatrix& obs,
                              const Matrix& row_laplacian,
                              const Matrix& column_laplacian,
                              const SgmcWeights& weights);

enum class LossKind { kCommutativity, kSgmc };

struct LossSpec {
  LossKind kind = LossKind::kCommutativity;
  double mu = 1e-5;
  RegTarget target = RegTarget::kEffective;
  SgmcWeights sgmc;
};

// Objective evaluated on an explicit list of training entries; this is the
// form the optimizer uses. All products stay k-dimensional except the sweeps
// over entries, so one evaluation costs O(|entries| k + (m + n) k^2).
class SparseObjective {
 public:
  // The SGMC loss needs both Laplacians; the commutativity loss ignores them.
  SparseObjective(std::shared_ptr<const SpectralBasis> rows,
                  std::shared_ptr<const SpectralBasis> columns,
                  std::vector<Entry> train, LossSpec spec,
                  const Matrix* row_laplacian = nullptr,
                  const Matrix* column_laplacian = nullptr);

  // Energy at `model`; fills `grads` when non-null.
  EnergyBreakdown evaluate(const FunctionalModel& model,
                           ModelGradients* grads) const;

  // Model values at the given entries.
  Vector predict(const FunctionalModel& model,
                 std::span<const Entry> entries) const;

  const LossSpec& spec() const { return spec_; }
  std::span<const Entry> train() const { return train_; }

 private:
  std::shared_ptr<const SpectralBasis> rows_;
  std::shared_ptr<const SpectralBasis> columns_;
  Matrix row_vectors_t_;     // k x m
  Matrix column_vectors_t_;  // k x n
  std::vector<Entry> train_;
  LossSpec spec_;
  // Projected Laplacians and Gram matrices for the Dirichlet terms.
  Matrix row_stiffness_, column_stiffness_, row_gram_, column_gram_;
};

}  // namespace fgmc

#endif  // FGMC_OBJECTIVE_HPP_
