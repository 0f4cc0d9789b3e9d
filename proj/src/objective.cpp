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

#include "fgmc/objective.hpp"

namespace fgmc {

MaskedMatrix::MaskedMatrix(Matrix values, Mask mask)
    : values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols()) {
    throw ValidationError("values and mask shapes differ");
  }
  values_ = mask_.select(values_, 0.0);
  if (!values_.allFinite()) {
    throw ValidationError("observed values must be finite");
  }
}

MaskedMatrix MaskedMatrix::restricted(const Mask& subset) const {
  if (subset.rows() != rows() || subset.cols() != cols()) {
    throw ValidationError("subset mask shape differs");
  }
  if ((subset && !mask_).any()) {
    throw ValidationError("subset mask selects unobserved entries");
  }
  return MaskedMatrix(values_, subset);
}

std::vector<Entry> masked_entries(const Matrix& values, const Mask& mask) {
  std::vector<Entry> out;
  out.reserve(mask.count());
  for (Index j = 0; j < mask.cols(); ++j) {
    for (Index i = 0; i < mask.rows(); ++i) {
      if (mask(i, j)) out.push_back({i, j, values(i, j)});
    }
  }
  return out;
}

double ModelGradients::squared_norm() const {
  return coefficients.squaredNorm() + row_transform.squaredNorm() +
         column_transform.squaredNorm();
}

namespace {

void check_shapes(const FunctionalModel& model, const MaskedMatrix& obs) {
  model.validate();
  if (model.rows() != obs.rows() || model.cols() != obs.cols()) {
    throw ValidationError("model decodes to " + std::to_string(model.rows()) +
                          "x" + std::to_string(model.cols()) +
                          " but observations are " + std::to_string(obs.rows()) +
                          "x" + std::to_string(obs.cols()));
  }
}

Matrix masked_residual(const FunctionalModel& model, const MaskedMatrix& obs) {
  return obs.mask().select(decode(model) - obs.values(), 0.0);
}

// Entry (i, j) of B diag(row) - diag(col) B is B_ij (row_j - col_i).
Matrix eigen_gap(const Vector& row_values, const Vector& column_values,
                 Index rows, Index cols) {
  if (row_values.size() != cols || column_values.size() != rows) {
    throw ValidationError("eigenvalue vectors do not match the map shape");
  }
  return row_values.transpose().replicate(rows, 1) -
         column_values.replicate(1, cols);
}

ModelGradients chain_rule(const FunctionalModel& model, const Matrix& g) {
  const Matrix& c = model.coefficients;
  const Matrix& p = model.row_transform;
  const Matrix& q = model.column_transform;
  return {p.transpose() * g * q, g * q * c.transpose(), g.transpose() * p * c};
}

}  // namespace

double data_term(const FunctionalModel& model, const MaskedMatrix& obs) {
  check_shapes(model, obs);
  return masked_residual(model, obs).squaredNorm();
}

double commutativity_energy(const Matrix& map, const Vector& row_values,
                            const Vector& column_values) {
  const Matrix gap = eigen_gap(row_values, column_values, map.rows(), map.cols());
  return map.cwiseProduct(gap).squaredNorm();
}

Matrix commutativity_gradient(const Matrix& map, const Vector& row_values,
                              const Vector& column_values) {
  const Matrix gap = eigen_gap(row_values, column_values, map.rows(), map.cols());
  return 2.0 * map.cwiseProduct(gap).cwiseProduct(gap);
}

double dirichlet_rows(const Matrix& x, const Matrix& row_laplacian) {
  if (row_laplacian.rows() != x.rows() || row_laplacian.cols() != x.rows()) {
    throw ValidationError("dirichlet_rows: Laplacian does not match row count");
  }
  return (x.transpose() * (row_laplacian * x)).trace();
}

double dirichlet_cols(const Matrix& x, const Matrix& column_laplacian) {
  if (column_laplacian.rows() != x.cols() ||
      column_laplacian.cols() != x.cols()) {
    throw ValidationError("dirichlet_cols: Laplacian does not match column count");
  }
  return ((x * column_laplacian) * x.transpose()).trace();
}

double offdiag_penalty(const Matrix& r, const Vector& values) {
  if (r.rows() != values.size()) {
    throw ValidationError("offdiag_penalty: shape mismatch");
  }
  Matrix t = r.transpose() * values.asDiagonal() * r;
  t.diagonal().setZero();
  return t.squaredNorm();
}

Matrix offdiag_penalty_gradient(const Matrix& r, const Vector& values) {
  if (r.rows() != values.size()) {
    throw ValidationError("offdiag_penalty_gradient: shape mismatch");
  }
  Matrix off = r.transpose() * values.asDiagonal() * r;
  off.diagonal().setZero();
  return 4.0 * values.asDiagonal() * r * off;
}

EnergyBreakdown total_objective(const FunctionalModel& model,
                                const MaskedMatrix& obs, double mu,
                                RegTarget target) {
  EnergyBreakdown e;
  e.mu = mu;
  e.data = data_term(model, obs);
  const Matrix map = target == RegTarget::kEffective ? model.effective_map()
                                                     : model.coefficients;
  e.reg = commutativity_energy(map, model.row_basis->values,
                               model.column_basis->values);
  e.total = e.data + mu * e.reg;
  return e;
}

ModelGradients gradients(const FunctionalModel& model, const MaskedMatrix& obs,
                         double mu, RegTarget target) {
  check_shapes(model, obs);
  const Matrix& phi = model.row_basis->vectors;
  const Matrix& psi = model.column_basis->vectors;
  const Vector& row_values = model.row_basis->values;
  const Vector& column_values = model.column_basis->values;
  const Matrix data_grad =
      2.0 * phi.transpose() * masked_residual(model, obs) * psi;

  if (target == RegTarget::kEffective) {
    const Matrix g = data_grad +
                     mu * commutativity_gradient(model.effective_map(),
                                                 row_values, column_values);
    return chain_rule(model, g);
  }
  ModelGradients out = chain_rule(model, data_grad);
  out.coefficients +=
      mu * commutativity_gradient(model.coefficients, row_values, column_values);
  return out;
}

EnergyBreakdown sgmc_objective(const FunctionalModel& model,
                               const MaskedMatrix& obs,
                               const Matrix& row_laplacian,
                               const Matrix& column_laplacian,
                               const SgmcWeights& w) {
  check_shapes(model, obs);
  const Matrix x = decode(model);
  EnergyBreakdown e;
  e.mu = 1.0;
  e.data = obs.mask().select(x - obs.values(), 0.0).matrix().squaredNorm();
  e.reg = w.row_dirichlet * dirichlet_rows(x, row_laplacian) +
          w.column_dirichlet * dirichlet_cols(x, column_laplacian) +
          w.row_offdiag *
              offdiag_penalty(model.row_transform, model.row_basis->values) +
          w.column_offdiag * offdiag_penalty(model.column_transform,
                                             model.column_basis->values);
  e.total = e.data + e.reg;
  return e;
}

ModelGradients sgmc_gradients(const FunctionalModel& model,
                              const MaskedMatrix& obs,
                              const Matrix& row_laplacian,
                              const Matrix& column_laplacian,
                              const SgmcWeights& w) {
  check_shapes(model, obs);
  const Matrix& phi = model.row_basis->vectors;
  const Matrix& psi = model.column_basis->vectors;
  const Matrix x = decode(model);
  const Matrix residual = obs.mask().select(x - obs.values(), 0.0);
  // d/dX of the two traces is 2 L_r X and 2 X L_c.
  const Matrix dx = 2.0 * residual +
                    2.0 * w.row_dirichlet * (row_laplacian * x) +
                    2.0 * w.column_dirichlet * (x * column_laplacian);
  ModelGradients out = chain_rule(model, phi.transpose() * dx * psi);
  out.row_transform += w.row_offdiag * offdiag_penalty_gradient(
                                           model.row_transform,
                                           model.row_basis->values);
  out.column_transform += w.column_offdiag * offdiag_penalty_gradient(
                                                 model.column_transform,
                                                 model.column_basis->values);
  return out;
}

SparseObjective::SparseObjective(std::shared_ptr<const SpectralBasis> rows,
                                 std::shared_ptr<const SpectralBasis> columns,
                                 std::vector<Entry> train, LossSpec spec,
                                 const Matrix* row_laplacian,
                                 const Matrix* column_laplacian)
    : rows_(std::move(rows)),
      columns_(std::move(columns)),
      row_vectors_t_(rows_->vectors.transpose()),
      column_vectors_t_(columns_->vectors.transpose()),
      train_(std::move(train)),
      spec_(spec) {
  for (const Entry& e : train_) {
    if (e.row < 0 || e.row >= rows_->size() || e.col < 0 ||
        e.col >= columns_->size()) {
      throw ValidationError("training entry outside the matrix");
    }
  }
  if (spec_.kind == LossKind::kSgmc) {
    if (row_laplacian == nullptr || column_laplacian == nullptr) {
      throw ValidationError("SGMC loss needs both Laplacians");
    }
    const Matrix& phi = rows_->vectors;
    const Matrix& psi = columns_->vectors;
    if (row_laplacian->rows() != phi.rows() ||
        column_laplacian->rows() != psi.rows()) {
      throw ValidationError("Laplacian size does not match the basis");
    }
    // tr(X^T L X) with X = Phi B Psi^T equals tr(B^T K_r B G_c) with
    // K_r = Phi^T L_r Phi and G_c = Psi^T Psi; likewise for the columns.
    row_stiffness_ = phi.transpose() * (*row_laplacian) * phi;
    column_stiffness_ = psi.transpose() * (*column_laplacian) * psi;
    row_gram_ = phi.transpose() * phi;
    column_gram_ = psi.transpose() * psi;
  }
}

Vector SparseObjective::predict(const FunctionalModel& model,
                                std::span<const Entry> entries) const {
  const Matrix projected_t = model.effective_map().transpose() * row_vectors_t_;
  Vector out(static_cast<Index>(entries.size()));
  for (std::size_t t = 0; t < entries.size(); ++t) {
    const Entry& e = entries[t];
    out(static_cast<Index>(t)) =
        projected_t.col(e.row).dot(column_vectors_t_.col(e.col));
  }
  return out;
}

EnergyBreakdown SparseObjective::evaluate(const FunctionalModel& model,
                                          ModelGradients* grads) const {
  const Matrix b = model.effective_map();
  const Index k = b.rows();
  // Column i holds row i of Phi B.
  const Matrix projected_t = b.transpose() * row_vectors_t_;
  Matrix weighted_t;
  if (grads != nullptr) weighted_t = Matrix::Zero(k, rows_->size());

  EnergyBreakdown e;
  double data = 0.0;
  for (const Entry& entry : train_) {
    const double r =
        projected_t.col(entry.row).dot(column_vectors_t_.col(entry.col)) -
        entry.value;
    data += r * r;
    if (grads != nullptr) {
      weighted_t.col(entry.row) += r * column_vectors_t_.col(entry.col);
    }
  }
  e.data = data;

  const Vector& row_values = rows_->values;
  const Vector& column_values = columns_->values;
  Matrix map_grad;
  if (grads != nullptr) {
    map_grad = 2.0 * (weighted_t * rows_->vectors).transpose();
  }

  if (spec_.kind == LossKind::kCommutativity) {
    e.mu = spec_.mu;
    const bool effective = spec_.target == RegTarget::kEffective;
    const Matrix& penalized = effective ? b : model.coefficients;
    e.reg = commutativity_energy(penalized, row_values, column_values);
    e.total = e.data + e.mu * e.reg;
    if (grads != nullptr) {
      const Matrix reg_grad =
          commutativity_gradient(penalized, row_values, column_values);
      if (effective) map_grad += e.mu * reg_grad;
      *grads = chain_rule(model, map_grad);
      if (!effective) grads->coefficients += e.mu * reg_grad;
    }
    return e;
  }

  const SgmcWeights& w = spec_.sgmc;
  const Matrix kr_b = row_stiffness_ * b;
  const Matrix b_kc = b * column_stiffness_;
  e.mu = 1.0;
  e.reg = w.row_dirichlet * (b.transpose() * kr_b * column_gram_).trace() +
          w.column_dirichlet * (b_kc * b.transpose() * row_gram_).trace() +
          w.row_offdiag * offdiag_penalty(model.row_transform, row_values) +
          w.column_offdiag *
              offdiag_penalty(model.column_transform, column_values);
  e.total = e.data + e.reg;
  if (grads != nullptr) {
    map_grad += 2.0 * w.row_dirichlet * kr_b * column_gram_ +
                2.0 * w.column_dirichlet * row_gram_ * b_kc;
    *grads = chain_rule(model, map_grad);
    grads->row_transform +=
        w.row_offdiag * offdiag_penalty_gradient(model.row_transform, row_values);
    grads->column_transform += w.column_offdiag * offdiag_penalty_gradient(
                                                      model.column_transform,
                                                      column_values);
  }
  return e;
}

}  // namespace fgmc
