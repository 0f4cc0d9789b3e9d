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

#include "fgmc/optimizer.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fgmc/random.hpp"

namespace fgmc {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kPlainGd ? "plain" : "adaptive";
}

std::string to_string(Baseline baseline) {
  return baseline == Baseline::kNone ? "none" : "sgmc";
}

std::string to_string(RegTarget target) {
  return target == RegTarget::kEffective ? "effective" : "raw";
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kMaxIters:
      return "max_iters";
    case StopReason::kPatience:
      return "patience";
    case StopReason::kGradientNorm:
      return "gradient_norm";
  }
  return "unknown";
}

OptimizerKind parse_optimizer_kind(const std::string& text) {
  if (text == "plain") return OptimizerKind::kPlainGd;
  if (text == "adaptive") return OptimizerKind::kAdaptive;
  throw ValidationError("optimizer must be 'plain' or 'adaptive', got '" + text + "'");
}

Baseline parse_baseline(const std::string& text) {
  if (text == "none") return Baseline::kNone;
  if (text == "sgmc") return Baseline::kSgmc;
  throw ValidationError("baseline must be 'none' or 'sgmc', got '" + text + "'");
}

RegTarget parse_reg_target(const std::string& text) {
  if (text == "effective") return RegTarget::kEffective;
  if (text == "raw") return RegTarget::kRaw;
  throw ValidationError("reg-target must be 'effective' or 'raw', got '" + text + "'");
}

Index FitConfig::resolved_max_iters() const {
  if (max_iters) return *max_iters;
  return optimizer == OptimizerKind::kPlainGd ? 200000 : 20000;
}

void FitConfig::validate() const {
  if (!(val_ratio >= 0.0 && val_ratio < 1.0)) {
    throw ValidationError("val_ratio must lie in [0, 1)");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be finite and nonnegative");
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw ValidationError("mu must be finite and nonnegative");
  }
  if (resolved_max_iters() < 0) throw ValidationError("max_iters must be >= 0");
  if (patience < 1) throw ValidationError("patience must be >= 1");
  if (eval_interval < 1) throw ValidationError("eval_interval must be >= 1");
  if (!(min_improvement >= 0.0)) {
    throw ValidationError("min_improvement must be nonnegative");
  }
  if (k < 1) throw ValidationError("k must be >= 1");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw ValidationError("lr_decay must lie in (0, 1]");
  }
}

MaskSplit split_observed(const Mask& observed, double val_ratio,
                         std::uint64_t seed) {
  if (!(val_ratio > 0.0 && val_ratio < 1.0)) {
    throw ValidationError("val_ratio must lie in (0, 1)");
  }
  std::vector<Index> indices;
  indices.reserve(observed.count());
  for (Index t = 0; t < observed.size(); ++t) {
    if (observed(t)) indices.push_back(t);
  }
  const auto total = static_cast<Index>(indices.size());
  const auto n_val = static_cast<Index>(std::llround(val_ratio * total));
  if (n_val < 1 || n_val >= total) {
    throw ValidationError("cannot split " + std::to_string(total) +
                          " observed entries at ratio " + std::to_string(val_ratio) +
                          " into two nonempty parts");
  }
  Rng rng(seed);
  shuffle_in_place(indices, rng);

  MaskSplit split{observed, Mask::Constant(observed.rows(), observed.cols(), false)};
  for (Index t = 0; t < n_val; ++t) {
    split.train(indices[t]) = false;
    split.validation(indices[t]) = true;
  }
  return split;
}

FunctionalModel init_model(const MaskedMatrix& obs,
                           std::shared_ptr<const SpectralBasis> rows,
                           std::shared_ptr<const SpectralBasis> columns) {
  if (rows->k() != columns->k()) {
    throw ValidationError("row and column bases must share k");
  }
  Matrix c = encode(obs.values(), rows->vectors, columns->vectors);
  return FunctionalModel(std::move(c), std::move(rows), std::move(columns));
}

namespace {

// First and second moment estimates for one parameter block.
struct AdamState {
  Matrix first;
  Matrix second;

  void step(Matrix& param, const Matrix& grad, double lr, Index t) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEpsilon = 1e-8;
    if (first.size() == 0) {
      first = Matrix::Zero(grad.rows(), grad.cols());
      second = Matrix::Zero(grad.rows(), grad.cols());
    }
    first = kBeta1 * first + (1.0 - kBeta1) * grad;
    second = kBeta2 * second + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    param.array() -= lr * (first.array() / c1) /
                     ((second.array() / c2).sqrt() + kEpsilon);
  }
};

LossSpec loss_for(const FitConfig& config) {
  LossSpec spec;
  spec.mu = config.mu;
  spec.target = config.reg_target;
  spec.sgmc = config.sgmc;
  spec.kind = config.baseline == Baseline::kSgmc ? LossKind::kSgmc
                                                 : LossKind::kCommutativity;
  return spec;
}

double rmse_at(const SparseObjective& objective, const FunctionalModel& model,
               const std::vector<Entry>& entries) {
  const Vector pred = objective.predict(model, entries);
  double sum = 0.0;
  for (std::size_t t = 0; t < entries.size(); ++t) {
    const double d = pred(static_cast<Index>(t)) - entries[t].value;
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(entries.size()));
}

}  // namespace

FitResult fit(const MaskedMatrix& obs, const MaskSplit& split,
              std::shared_ptr<const SpectralBasis> rows,
              std::shared_ptr<const SpectralBasis> columns,
              const FitConfig& config, FitGraphs graphs) {
  config.validate();
  const auto same_shape = [&obs](const Mask& m) {
    return m.rows() == obs.rows() && m.cols() == obs.cols();
  };
  if (!same_shape(split.train) || !same_shape(split.validation)) {
    throw ValidationError("split masks do not match the observation shape");
  }
  if (rows->size() != obs.rows() || columns->size() != obs.cols()) {
    throw ValidationError("basis sizes do not match the observation matrix");
  }
  const MaskedMatrix train = obs.restricted(split.train);
  const std::vector<Entry> val_entries =
      masked_entries(obs.values(), obs.restricted(split.validation).mask());
  const bool checkpointing = !val_entries.empty();

  const SparseObjective objective(rows, columns,
                                  masked_entries(train.values(), train.mask()),
                                  loss_for(config), graphs.row_laplacian,
                                  graphs.column_laplacian);

  FunctionalModel model = init_model(train, rows, columns);
  FitResult result{model, {}, 0, StopReason::kMaxIters,
                   std::numeric_limits<double>::quiet_NaN(), 0};
  const Index max_iters = config.resolved_max_iters();
  result.history.reserve(static_cast<std::size_t>(std::min<Index>(max_iters, 1 << 20)));

  AdamState adam_c, adam_p, adam_q;
  double lr = config.learning_rate;
  Index stalled_checks = 0;
  Index last_checked = -1;
  const auto check = [&](Index iteration) {
    const double val = rmse_at(objective, model, val_entries);
    const bool first = last_checked < 0;
    last_checked = iteration;
    if (first || val < result.best_val_rmse - config.min_improvement) {
      stalled_checks = 0;
    } else {
      ++stalled_checks;
    }
    if (first || val < result.best_val_rmse) {
      result.best_val_rmse = val;
      result.best_iteration = iteration;
      result.model = model;
    }
    return val;
  };

  ModelGradients grads;
  Index iteration = 0;
  for (; iteration < max_iters; ++iteration) {
    const EnergyBreakdown energy = objective.evaluate(model, &grads);
    if (!std::isfinite(energy.total)) {
      std::ostringstream msg;
      msg << "objective became non-finite at iteration " << iteration
          << " (learning rate " << lr << ")";
      throw NumericError(msg.str());
    }
    HistoryEntry entry{energy.total, energy.data, energy.reg, std::nullopt};
    bool stop = false;
    if (checkpointing && iteration % config.eval_interval == 0) {
      entry.val_rmse = check(iteration);
      if (stalled_checks >= config.patience) {
        result.stop_reason = StopReason::kPatience;
        stop = true;
      }
    }
    result.history.push_back(entry);
    if (stop) break;

    const double grad_norm = std::sqrt(
        config.train_transforms ? grads.squared_norm()
                                : grads.coefficients.squaredNorm());
    if (grad_norm <= 1e-12) {
      result.stop_reason = StopReason::kGradientNorm;
      break;
    }

    if (config.optimizer == OptimizerKind::kPlainGd) {
      model.coefficients -= lr * grads.coefficients;
      if (config.train_transforms) {
        model.row_transform -= lr * grads.row_transform;
        model.column_transform -= lr * grads.column_transform;
      }
    } else {
      const Index t = iteration + 1;
      adam_c.step(model.coefficients, grads.coefficients, lr, t);
      if (config.train_transforms) {
        adam_p.step(model.row_transform, grads.row_transform, lr, t);
        adam_q.step(model.column_transform, grads.column_transform, lr, t);
      }
    }
    lr *= config.lr_decay;
  }
  result.iterations_run = static_cast<Index>(result.history.size());

  if (checkpointing) {
    // The final iterate may not have been checked yet.
    if (last_checked != iteration) check(iteration);
  } else {
    result.model = model;
    result.best_iteration = result.iterations_run;
  }
  return result;
}

FitResult fit(const MaskedMatrix& obs,
              std::shared_ptr<const SpectralBasis> rows,
              std::shared_ptr<const SpectralBasis> columns,
              const FitConfig& config, FitGraphs graphs) {
  config.validate();
  MaskSplit split{obs.mask(), Mask::Constant(obs.rows(), obs.cols(), false)};
  if (config.val_ratio > 0.0) {
    split = split_observed(obs.mask(), config.val_ratio, config.seed);
  }
  return fit(obs, split, std::move(rows), std::move(columns), config, graphs);
}

}  // namespace fgmc
