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

#ifndef FGMC_EXPERIMENTS_HPP_
#define FGMC_EXPERIMENTS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fgmc/common.hpp"
#include "fgmc/optimizer.hpp"
#include "json.hpp"

namespace fgmc {

enum class Method { kOurs, kOursFm, kSgmc };

// "ours", "ours-fm", "sgmc-baseline".
std::string to_string(Method method);
Method parse_method(const std::string& text);

struct Record {
  std::string protocol;
  double param = 0.0;
  Method method = Method::kOurs;
  std::uint64_t seed = 0;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  Index iters = 0;
  double seconds = 0.0;  // 0 unless timing was requested

  bool operator==(const Record&) const = default;
};

struct ExperimentReport {
  std::string protocol;
  std::vector<Record> records;
  nlohmann::json config = nlohmann::json::object();
  // Published reference values and run metadata; never asserted on.
  nlohmann::json reference = nlohmann::json::object();
};

// sqrt(sum over mask of (estimate - truth)^2 / |mask|). Throws
// ValidationError on an empty mask or mismatched shapes.
double rmse(const Matrix& estimate, const Matrix& truth, const Mask& mask);

// Median over records grouped by (param, method), ordered by param.
struct SummaryRow {
  double param = 0.0;
  Method method = Method::kOurs;
  double median_test_rmse = 0.0;
  double median_train_rmse = 0.0;
  Index seeds = 0;
};
std::vector<SummaryRow> summarize(const ExperimentReport& report);
double median(std::vector<double> values);

// Median test RMSE of `method` at `param`; NaN when there is no such record.
double median_test_rmse(const ExperimentReport& report, Method method,
                        double param);

struct SyntheticConfig {
  Index rows = 150;
  Index cols = 200;
  Index communities = 10;
  double p_in = 0.8;
  double p_out = 0.02;
  // Small edge weights keep mu * lambda^2 modest; see README.
  double edge_weight = 0.01;
  Index k = 30;
  std::vector<Index> ranks{5, 10, 12, 15, 20};
  std::vector<double> densities{0.01, 0.05, 0.10, 0.20};
  std::vector<double> noise_levels{0.0, 5e-6, 1e-5, 2e-5};
  // Fixed rank and density for the density and noise sweeps.
  Index rank = 10;
  double density = 0.10;
  Index n_seeds = 5;
  // Seed i of a sweep is seed + i.
  std::uint64_t seed = 0;
  std::vector<Method> methods{Method::kOurs, Method::kOursFm, Method::kSgmc};
  FitConfig fit = default_fit();
  bool timing = false;
  // 0 picks FGMC_THREADS or the hardware concurrency.
  Index threads = 0;

  static FitConfig default_fit();
  void validate() const;
};

struct Ml100kConfig {
  std::string data_dir = "data/ml-100k";
  // "random": hold out test_ratio of the ratings; "u1": u1.base / u1.test.
  std::string split = "random";
  double test_ratio = 0.05;
  Index k_nn = 10;
  // k for ours and the baseline is picked by validation RMSE among these.
  std::vector<Index> k_candidates{10, 20, 30, 50};
  Index fm_k = 30;
  // Optional adjacency files replacing the k-NN graphs.
  std::string user_graph;
  std::string item_graph;
  bool center = true;
  bool clamp = true;
  Index n_seeds = 1;
  std::uint64_t seed = 0;
  std::vector<Method> methods{Method::kOurs, Method::kOursFm, Method::kSgmc};
  FitConfig fit = default_fit();
  bool timing = false;
  Index threads = 0;

  static FitConfig default_fit();
  void validate() const;
};

nlohmann::json to_json(const FitConfig& config);
FitConfig fit_config_from_json(const nlohmann::json& j, FitConfig base = {});
nlohmann::json to_json(const SyntheticConfig& config);
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j,
                                           SyntheticConfig base = {});
nlohmann::json to_json(const Ml100kConfig& config);
Ml100kConfig ml100k_config_from_json(const nlohmann::json& j,
                                     Ml100kConfig base = {});

// Rank sweep: one graph pair and one mask per seed, shared across ranks.
ExperimentReport run_rank_sweep(const SyntheticConfig& config);
// Density sweep at config.rank.
ExperimentReport run_density_sweep(const SyntheticConfig& config);
// Noise sweep at config.rank and config.density. The matrix is synthesized on
// the clean graphs; the fit uses bases of the perturbed graphs. Sigma 0
// reproduces the clean rank-sweep point.
ExperimentReport run_noise_sweep(const SyntheticConfig& config);
ExperimentReport run_ml100k(const Ml100kConfig& config);

// Worker count: `requested` if positive, else FGMC_THREADS, else the
// hardware concurrency; capped by FGMC_THREADS when it is set.
Index resolve_threads(Index requested);

enum class ReportFormat { kCsv, kJson };
ReportFormat parse_report_format(const std::string& text);
// ".json" selects JSON, anything else CSV.
ReportFormat report_format_for(const std::string& path);

std::string report_to_csv(const ExperimentReport& report);
std::string report_to_json(const ExperimentReport& report);
// Written to a temporary file and renamed, so a failed run leaves no report.
void emit_report(const ExperimentReport& report, const std::string& path,
                 ReportFormat format);
// CSV carries no config; the protocol is taken from the first record.
ExperimentReport read_report(const std::string& path, ReportFormat format);

}  // namespace fgmc

#endif  // FGMC_EXPERIMENTS_HPP_
