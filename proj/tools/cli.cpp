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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fgmc/experiments.hpp"
#include "fgmc/funcmap.hpp"
#include "fgmc/graph.hpp"
#include "fgmc/io.hpp"
#include "fgmc/objective.hpp"
#include "fgmc/optimizer.hpp"
#include "fgmc/random.hpp"

namespace fgmc::cli {

namespace {

// ---------------------------------------------------------------------------
// Finite-difference gradient check

double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = a.norm() + b.norm();
  if (scale < 1e-12) return 0.0;
  return (a - b).norm() / scale;
}

// Central differences of f over every entry of the three parameter blocks.
ModelGradients numeric_gradients(const FunctionalModel& model,
                                 const std::function<double(const FunctionalModel&)>& f) {
  constexpr double h = 1e-6;
  FunctionalModel probe = model;
  const auto block = [&](Matrix FunctionalModel::*member) {
    Matrix& param = probe.*member;
    Matrix grad(param.rows(), param.cols());
    for (Index j = 0; j < param.cols(); ++j) {
      for (Index i = 0; i < param.rows(); ++i) {
        const double saved = param(i, j);
        param(i, j) = saved + h;
        const double up = f(probe);
        param(i, j) = saved - h;
        const double down = f(probe);
        param(i, j) = saved;
        grad(i, j) = (up - down) / (2.0 * h);
      }
    }
    return grad;
  };
  ModelGradients g;
  g.coefficients = block(&FunctionalModel::coefficients);
  g.row_transform = block(&FunctionalModel::row_transform);
  g.column_transform = block(&FunctionalModel::column_transform);
  return g;
}

double gradient_error(const ModelGradients& a, const ModelGradients& b) {
  return std::max({relative_error(a.coefficients, b.coefficients),
                   relative_error(a.row_transform, b.row_transform),
                   relative_error(a.column_transform, b.column_transform)});
}

Graph random_graph(Index n, Rng& rng) {
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (uniform01(rng) < 0.5) w(i, j) = w(j, i) = uniform01(rng);
    }
  }
  return Graph(std::move(w));
}

}  // namespace

GradientCheckResult check_gradients(Index instances, std::uint64_t seed) {
  GradientCheckResult out;
  out.instances = instances;
  for (Index t = 0; t < instances; ++t) {
    Rng rng(derive_seed(seed, "instance-" + std::to_string(t)));
    std::normal_distribution<double> normal;
    const auto m = static_cast<Index>(4 + uniform_index(rng, 9));
    const auto n = static_cast<Index>(4 + uniform_index(rng, 9));
    const auto k = static_cast<Index>(
        1 + uniform_index(rng, static_cast<std::uint64_t>(std::min<Index>({5, m, n}))));
    const Matrix row_laplacian = build_laplacian(random_graph(m, rng));
    const Matrix column_laplacian = build_laplacian(random_graph(n, rng));
    auto rows = std::make_shared<const SpectralBasis>(spectral_decompose(row_laplacian, k));
    auto cols = std::make_shared<const SpectralBasis>(spectral_decompose(column_laplacian, k));

    const auto random_matrix = [&](Index r, Index c) {
      Matrix a(r, c);
      for (Index j = 0; j < c; ++j) {
        for (Index i = 0; i < r; ++i) a(i, j) = normal(rng);
      }
      return a;
    };
    FunctionalModel model(random_matrix(k, k), rows, cols);
    model.row_transform = random_matrix(k, k);
    model.column_transform = random_matrix(k, k);
    Mask mask(m, n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < m; ++i) mask(i, j) = uniform01(rng) < 0.6;
    }
    mask(0, 0) = true;
    const MaskedMatrix obs(random_matrix(m, n), mask);
    const std::vector<Entry> entries = masked_entries(obs.values(), obs.mask());

    const double mu = 0.5;
    for (RegTarget target : {RegTarget::kEffective, RegTarget::kRaw}) {
      const ModelGradients fd = numeric_gradients(model, [&](const FunctionalModel& x) {
        return total_objective(x, obs, mu, target).total;
      });
      LossSpec spec;
      spec.mu = mu;
      spec.target = target;
      ModelGradients sparse;
      SparseObjective(rows, cols, entries, spec).evaluate(model, &sparse);
      out.ours_error = std::max({out.ours_error,
                                 gradient_error(gradients(model, obs, mu, target), fd),
                                 gradient_error(sparse, fd)});
    }

    const SgmcWeights weights{0.3, 0.2, 0.1, 0.05};
    const ModelGradients fd = numeric_gradients(model, [&](const FunctionalModel& x) {
      return sgmc_objective(x, obs, row_laplacian, column_laplacian, weights).total;
    });
    LossSpec spec;
    spec.kind = LossKind::kSgmc;
    spec.sgmc = weights;
    ModelGradients sparse;
    SparseObjective(rows, cols, entries, spec, &row_laplacian, &column_laplacian)
        .evaluate(model, &sparse);
    out.sgmc_error = std::max(
        {out.sgmc_error,
         gradient_error(
             sgmc_gradients(model, obs, row_laplacian, column_laplacian, weights), fd),
         gradient_error(sparse, fd)});
  }
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Option plumbing

struct FitFlags {
  std::optional<double> mu;
  std::optional<double> lr;
  std::optional<double> lr_decay;
  std::optional<Index> max_iters;
  std::optional<Index> k;
  std::optional<std::string> optimizer;
  std::optional<std::string> reg_target;
  std::optional<double> val_ratio;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--mu", mu, "Commutativity weight");
    app->add_option("--lr", lr, "Learning rate");
    app->add_option("--lr-decay", lr_decay, "Per-iteration learning-rate factor");
    app->add_option("--max-iters", max_iters, "Iteration budget");
    app->add_option("--k", k, "Spectral basis size");
    app->add_option("--optimizer", optimizer, "plain | adaptive")
        ->check(CLI::IsMember({"plain", "adaptive"}));
    app->add_option("--reg-target", reg_target, "effective | raw")
        ->check(CLI::IsMember({"effective", "raw"}));
    app->add_option("--val-ratio", val_ratio, "Validation fraction of observed entries");
    app->add_option("--seed", seed, "Random seed");
  }

  void apply(FitConfig& c) const {
    if (mu) c.mu = *mu;
    if (lr) c.learning_rate = *lr;
    if (lr_decay) c.lr_decay = *lr_decay;
    if (max_iters) c.max_iters = *max_iters;
    if (k) c.k = *k;
    if (optimizer) c.optimizer = parse_optimizer_kind(*optimizer);
    if (reg_target) c.reg_target = parse_reg_target(*reg_target);
    if (val_ratio) c.val_ratio = *val_ratio;
    if (seed) c.seed = *seed;
  }
};

struct ReportFlags {
  std::string config;
  std::string out;
  std::optional<std::string> format;
  std::optional<Index> seeds;
  std::optional<Index> threads;
  std::optional<std::string> baseline;
  std::vector<std::string> methods;
  bool timing = false;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--out", out, "Report path (stdout when omitted)");
    app->add_option("--format", format, "csv | json (default: from --out)")
        ->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--seeds", seeds, "Number of seeds");
    app->add_option("--threads", threads, "Worker threads");
    app->add_option("--baseline", baseline, "none | sgmc: drop or keep the baseline")
        ->check(CLI::IsMember({"none", "sgmc"}));
    app->add_option("--methods", methods, "Subset of ours, ours-fm, sgmc-baseline")
        ->delimiter(',')
        ->check(CLI::IsMember({"ours", "ours-fm", "sgmc-baseline"}));
    app->add_flag("--timing", timing, "Record wall-clock seconds in the report");
  }

  template <typename Config>
  void apply(Config& c) const {
    if (!methods.empty()) {
      c.methods.clear();
      for (const auto& m : methods) c.methods.push_back(parse_method(m));
    }
    if (baseline) {
      auto& ms = c.methods;
      ms.erase(std::remove(ms.begin(), ms.end(), Method::kSgmc), ms.end());
      if (*baseline == "sgmc") ms.push_back(Method::kSgmc);
    }
    if (seeds) c.n_seeds = *seeds;
    if (threads) c.threads = *threads;
    if (timing) c.timing = true;
  }
};

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_report(const ExperimentReport& report, const ReportFlags& flags,
                  std::ostream& out) {
  const ReportFormat format = flags.format ? parse_report_format(*flags.format)
                                           : report_format_for(flags.out);
  if (flags.out.empty()) {
    out << (format == ReportFormat::kCsv ? report_to_csv(report)
                                         : report_to_json(report));
  } else {
    emit_report(report, flags.out, format);
  }
}

void print_summary(const ExperimentReport& report, std::ostream& err) {
  err << report.protocol << ": median test RMSE over seeds\n";
  char line[160];
  for (const SummaryRow& row : summarize(report)) {
    std::snprintf(line, sizeof line, "  param=%-10g %-14s test=%.3e train=%.3e (n=%ld)\n",
                  row.param, to_string(row.method).c_str(), row.median_test_rmse,
                  row.median_train_rmse, static_cast<long>(row.seeds));
    err << line;
  }
}

int run_fit(const std::string& matrix_path, const std::string& row_graph_path,
            const std::string& col_graph_path, const std::string& out_path,
            const std::string& config_path, const std::string& baseline,
            const FitFlags& flags, std::ostream& err) {
  FitConfig config = fit_config_from_json(load_config(config_path));
  flags.apply(config);
  if (!baseline.empty()) config.baseline = parse_baseline(baseline);
  config.validate();

  Mask missing;
  const Matrix values = read_dense_csv(matrix_path, &missing);
  const MaskedMatrix obs(values, !missing);
  const Graph row_graph =
      load_adjacency(row_graph_path, adjacency_format_for(row_graph_path), obs.rows());
  const Graph col_graph =
      load_adjacency(col_graph_path, adjacency_format_for(col_graph_path), obs.cols());
  if (row_graph.size() != obs.rows() || col_graph.size() != obs.cols()) {
    throw ValidationError("graph sizes do not match the matrix shape");
  }
  const Matrix row_laplacian = build_laplacian(row_graph);
  const Matrix col_laplacian = build_laplacian(col_graph);
  auto rows = std::make_shared<const SpectralBasis>(graph_basis(row_graph, config.k));
  auto cols = std::make_shared<const SpectralBasis>(graph_basis(col_graph, config.k));

  const FitResult result = fit(obs, rows, cols, config, {&row_laplacian, &col_laplacian});
  const Matrix completed = decode(result.model);
  std::ostringstream csv;
  write_dense_csv(csv, completed);
  write_file_atomic(out_path, csv.str());

  err << "fit: " << result.iterations_run << " iterations, stop "
      << to_string(result.stop_reason) << ", observed RMSE "
      << format_double(rmse(completed, obs.values(), obs.mask())) << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometric matrix completion with functional maps"};
  app.require_subcommand(1);

  // Synthetic protocols.
  struct SynthCommand {
    CLI::App* app = nullptr;
    FitFlags fit;
    ReportFlags report;
    std::vector<Index> ranks;
    std::vector<double> densities;
    std::vector<double> sigmas;
  };
  SynthCommand rank_cmd, density_cmd, noise_cmd;
  rank_cmd.app = app.add_subcommand("synth-rank", "Rank sweep on synthetic data");
  density_cmd.app = app.add_subcommand("synth-density", "Density sweep on synthetic data");
  noise_cmd.app = app.add_subcommand("synth-noise", "Graph-noise sweep on synthetic data");
  for (SynthCommand* cmd : {&rank_cmd, &density_cmd, &noise_cmd}) {
    cmd->fit.add(cmd->app);
    cmd->report.add(cmd->app);
  }
  rank_cmd.app->add_option("--rank", rank_cmd.ranks, "Ranks to sweep")->delimiter(',');
  rank_cmd.app->add_option("--density", rank_cmd.densities, "Sampling density");
  density_cmd.app->add_option("--density", density_cmd.densities, "Densities to sweep")
      ->delimiter(',');
  density_cmd.app->add_option("--rank", density_cmd.ranks, "Matrix rank");
  noise_cmd.app->add_option("--noise-sigma", noise_cmd.sigmas, "Noise levels to sweep")
      ->delimiter(',');
  noise_cmd.app->add_option("--rank", noise_cmd.ranks, "Matrix rank");
  noise_cmd.app->add_option("--density", noise_cmd.densities, "Sampling density");

  // MovieLens-100K.
  CLI::App* ml_app = app.add_subcommand("ml100k", "MovieLens-100K evaluation");
  FitFlags ml_fit;
  ReportFlags ml_report;
  std::optional<std::string> ml_dir, ml_split, ml_user_graph, ml_item_graph;
  std::optional<double> ml_test_ratio;
  std::optional<Index> ml_knn;
  std::vector<Index> ml_k;
  bool ml_no_center = false;
  bool ml_no_clamp = false;
  ml_fit.add(ml_app);
  ml_report.add(ml_app);
  ml_app->get_option("--k")->description("Basis size (disables the k search)");
  ml_app->add_option("--k-candidates", ml_k, "Basis sizes searched by validation")
      ->delimiter(',');
  ml_app->add_option("--data-dir", ml_dir, "Directory holding u.data");
  ml_app->add_option("--split", ml_split, "random | u1")
      ->check(CLI::IsMember({"random", "u1"}));
  ml_app->add_option("--test-ratio", ml_test_ratio, "Held-out fraction for the random split");
  ml_app->add_option("--knn", ml_knn, "Neighbours per node in the rating graphs");
  ml_app->add_option("--user-graph", ml_user_graph, "Adjacency file for users");
  ml_app->add_option("--item-graph", ml_item_graph, "Adjacency file for items");
  ml_app->add_flag("--no-center", ml_no_center, "Do not subtract the training mean");
  ml_app->add_flag("--no-clamp", ml_no_clamp, "Do not clamp predictions to [1, 5]");

  // Arbitrary matrix completion.
  CLI::App* fit_app = app.add_subcommand("fit", "Complete a matrix given two graphs");
  FitFlags fit_flags;
  std::string fit_matrix, fit_rows, fit_cols, fit_out, fit_config, fit_baseline;
  fit_flags.add(fit_app);
  fit_app->add_option("--matrix", fit_matrix, "Dense CSV; empty or nan marks missing")
      ->required()
      ->check(CLI::ExistingFile);
  fit_app->add_option("--row-graph", fit_rows, "Row adjacency (.csv dense or triplets)")
      ->required()
      ->check(CLI::ExistingFile);
  fit_app->add_option("--col-graph", fit_cols, "Column adjacency (.csv dense or triplets)")
      ->required()
      ->check(CLI::ExistingFile);
  fit_app->add_option("--out", fit_out, "Completed matrix, dense CSV")->required();
  fit_app->add_option("--config", fit_config, "JSON fit config")->check(CLI::ExistingFile);
  fit_app->add_option("--baseline", fit_baseline, "none | sgmc")
      ->check(CLI::IsMember({"none", "sgmc"}));

  // Gradient check.
  CLI::App* grad_app =
      app.add_subcommand("check-gradients", "Finite-difference check of both objectives");
  Index grad_instances = 50;
  std::uint64_t grad_seed = 0;
  double grad_tolerance = 1e-5;
  grad_app->add_option("--instances", grad_instances, "Random instances")
      ->check(CLI::PositiveNumber);
  grad_app->add_option("--seed", grad_seed, "Random seed");
  grad_app->add_option("--tolerance", grad_tolerance, "Maximum relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    for (SynthCommand* cmd : {&rank_cmd, &density_cmd, &noise_cmd}) {
      if (!cmd->app->parsed()) continue;
      SyntheticConfig config =
          synthetic_config_from_json(load_config(cmd->report.config));
      cmd->fit.apply(config.fit);
      if (cmd->fit.k) config.k = *cmd->fit.k;
      if (cmd->fit.seed) config.seed = *cmd->fit.seed;
      cmd->report.apply(config);
      ExperimentReport report;
      if (cmd == &rank_cmd) {
        if (!cmd->ranks.empty()) config.ranks = cmd->ranks;
        if (!cmd->densities.empty()) config.density = cmd->densities.front();
        report = run_rank_sweep(config);
      } else if (cmd == &density_cmd) {
        if (!cmd->densities.empty()) config.densities = cmd->densities;
        if (!cmd->ranks.empty()) config.rank = cmd->ranks.front();
        report = run_density_sweep(config);
      } else {
        if (!cmd->sigmas.empty()) config.noise_levels = cmd->sigmas;
        if (!cmd->ranks.empty()) config.rank = cmd->ranks.front();
        if (!cmd->densities.empty()) config.density = cmd->densities.front();
        report = run_noise_sweep(config);
      }
      write_report(report, cmd->report, out);
      print_summary(report, err);
      return 0;
    }

    if (ml_app->parsed()) {
      Ml100kConfig config = ml100k_config_from_json(load_config(ml_report.config));
      ml_fit.apply(config.fit);
      if (ml_fit.k) {
        config.k_candidates = {*ml_fit.k};
      } else if (!ml_k.empty()) {
        config.k_candidates = ml_k;
      }
      if (ml_fit.seed) config.seed = *ml_fit.seed;
      ml_report.apply(config);
      if (ml_dir) config.data_dir = *ml_dir;
      if (ml_split) config.split = *ml_split;
      if (ml_test_ratio) config.test_ratio = *ml_test_ratio;
      if (ml_knn) config.k_nn = *ml_knn;
      if (ml_user_graph) config.user_graph = *ml_user_graph;
      if (ml_item_graph) config.item_graph = *ml_item_graph;
      if (ml_no_center) config.center = false;
      if (ml_no_clamp) config.clamp = false;
      const ExperimentReport report = run_ml100k(config);
      write_report(report, ml_report, out);
      print_summary(report, err);
      if (report.reference.contains("mean_predictor_rmse")) {
        err << "  mean predictor: " << report.reference["mean_predictor_rmse"].dump()
            << "\n";
      }
      return 0;
    }

    if (fit_app->parsed()) {
      return run_fit(fit_matrix, fit_rows, fit_cols, fit_out, fit_config, fit_baseline,
                     fit_flags, err);
    }

    if (grad_app->parsed()) {
      const GradientCheckResult r = check_gradients(grad_instances, grad_seed);
      const bool ok = r.ours_error <= grad_tolerance && r.sgmc_error <= grad_tolerance;
      out << "check-gradients: " << r.instances << " instances, max relative error ours "
          << format_double(r.ours_error) << ", sgmc " << format_double(r.sgmc_error)
          << " (tolerance " << format_double(grad_tolerance) << "): "
          << (ok ? "ok" : "FAILED") << "\n";
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace fgmc::cli
