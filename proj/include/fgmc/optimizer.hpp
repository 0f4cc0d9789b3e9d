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

#ifndef FGMC_OPTIMIZER_HPP_
#define FGMC_OPTIMIZER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fgmc/common.hpp"
#include "fgmc/funcmap.hpp"
#include "fgmc/objective.hpp"

namespace fgmc {

enum class OptimizerKind { kPlainGd, kAdaptive };
enum class Baseline { kNone, kSgmc };
enum class StopReason { kMaxIters, kPatience, kGradientNorm };

std::string to_string(OptimizerKind kind);
std::string to_string(Baseline baseline);
std::string to_string(RegTarget target);
std::string to_string(StopReason reason);
OptimizerKind parse_optimizer_kind(const std::string& text);
Baseline parse_baseline(const std::string& text);
RegTarget parse_reg_target(const std::string& text);

struct FitConfig {
  double mu = 1e-5;
  double learning_rate = 1e-6;
  // Unset means 200000 for plain GD and 20000 for the adaptive optimizer.
  std::optional<Index> max_iters;
  // Validation checks without an improvement of at least min_improvement.
  Index patience = 100;
  Index eval_interval = 10;
  double min_improvement = 1e-6;
  // Fraction of observed entries held out for validation. 0 disables the
  // split: no early stopping, and the last iterate is returned.
  double val_ratio = 0.05;
  Index k = 30;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kPlainGd;
  RegTarget reg_target = RegTarget::kEffective;
  Baseline baseline = Baseline::kNone;
  SgmcWeights sgmc;
  // false freezes P = Q = I and only C is trained.
  bool train_transforms = true;
  // Learning rate is multiplied by lr_decay after every iteration.
  double lr_decay = 1.0;

  Index resolved_max_iters() const;
  // Throws ValidationError on out-of-range fields.
  void validate() const;
};

struct HistoryEntry {
  double total = 0.0;
  double data = 0.0;
  double reg = 0.0;
  std::optional<double> val_rmse;  // set on validation checks only
};

struct FitResult {
  FunctionalModel model;
  std::vector<HistoryEntry> history;
  Index iterations_run = 0;
  StopReason stop_reason = StopReason::kMaxIters;
  // Validation RMSE of the returned model; NaN without a validation set.
  double best_val_rmse = 0.0;
  Index best_iteration = 0;
};

struct MaskSplit {
  Mask train;
  Mask validation;
};

// Random disjoint split of the observed entries with
// |validation| = round(val_ratio |S|). Both parts must be nonempty.
MaskSplit split_observed(const Mask& observed, double val_ratio,
                         std::uint64_t seed);

// P = Q = I and C = Phi^T (M .* S) Psi.
FunctionalModel init_model(const MaskedMatrix& obs,
                           std::shared_ptr<const SpectralBasis> rows,
                           std::shared_ptr<const SpectralBasis> columns);

// Laplacians are only read by the SGMC baseline.
struct FitGraphs {
  const Matrix* row_laplacian = nullptr;
  const Matrix* column_laplacian = nullptr;
};

// Full-batch descent on the entries of `split.train`, checkpointing the
// iterate with the lowest RMSE on `split.validation`. An empty validation mask
// disables checkpointing and early stopping; the last iterate is returned.
// Both masks must lie inside obs.mask(). Throws NumericError if the objective
// stops being finite.
FitResult fit(const MaskedMatrix& obs, const MaskSplit& split,
              std::shared_ptr<const SpectralBasis> rows,
              std::shared_ptr<const SpectralBasis> columns,
              const FitConfig& config, FitGraphs graphs = {});

// Splits with split_observed(obs.mask(), val_ratio, seed) (or keeps every
// entry for training when val_ratio == 0) and fits.
FitResult fit(const MaskedMatrix& obs,
              std::shared_ptr<const SpectralBasis> rows,
              std::shared_ptr<const SpectralBasis> columns,
              const FitConfig& config, FitGraphs graphs = {});

}  // namespace fgmc

#endif  // FGMC_OPTIMIZER_HPP_
