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

#include <cmath>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "fgmc/experiments.hpp"
#include "fgmc/io.hpp"
#include "support.hpp"

namespace fgmc {
namespace {

SyntheticConfig small_config() {
  SyntheticConfig c;
  c.rows = 30;
  c.cols = 36;
  c.communities = 3;
  c.p_in = 0.6;
  c.p_out = 0.05;
  c.k = 8;
  c.ranks = {2, 4};
  c.densities = {0.3, 0.6};
  c.noise_levels = {0.0, 1e-3};
  c.rank = 4;
  c.density = 0.3;
  c.n_seeds = 2;
  c.seed = 11;
  c.fit.max_iters = 150;
  c.threads = 2;
  return c;
}

TEST_SUITE("experiments") {
  TEST_CASE("rmse examples") {
    const Matrix truth = test::normal_matrix(4, 4, 1);
    const Mask all = Mask::Constant(4, 4, true);
    CHECK(rmse(truth, truth, all) == 0.0);
    Mask one = Mask::Constant(4, 4, false);
    one(1, 2) = true;
    Matrix shifted = truth;
    shifted(1, 2) -= 0.75;
    CHECK(rmse(shifted, truth, one) == doctest::Approx(0.75).epsilon(1e-15));

    const Matrix est = test::normal_matrix(4, 4, 2);
    const Mask mask = test::random_mask(4, 4, 0.5, 3);
    double sum = 0.0;
    double n = 0.0;
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 4; ++j) {
        if (mask(i, j)) {
          sum += (est(i, j) - truth(i, j)) * (est(i, j) - truth(i, j));
          n += 1.0;
        }
      }
    }
    CHECK(std::abs(rmse(est, truth, mask) - std::sqrt(sum / n)) <= 1e-12);
    CHECK_THROWS_AS(rmse(est, truth, Mask::Constant(4, 4, false)), ValidationError);
    CHECK_THROWS_AS(rmse(est, Matrix::Zero(3, 4), mask), ValidationError);
  }

  TEST_CASE("median and summary") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    ExperimentReport report;
    report.protocol = "synth-rank";
    report.records = {{"synth-rank", 5, Method::kOurs, 0, 0.1, 1.0, 10, 0},
                      {"synth-rank", 5, Method::kOurs, 1, 0.2, 3.0, 10, 0},
                      {"synth-rank", 5, Method::kOurs, 2, 0.3, 2.0, 10, 0},
                      {"synth-rank", 2, Method::kSgmc, 0, 0.1, 7.0, 10, 0}};
    CHECK(median_test_rmse(report, Method::kOurs, 5) == 2.0);
    CHECK(std::isnan(median_test_rmse(report, Method::kOursFm, 5)));
    const auto rows = summarize(report);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].param == 2);
    CHECK(rows[1].seeds == 3);
    CHECK(rows[1].median_train_rmse == 0.2);
  }

  TEST_CASE("methods parse and print") {
    for (Method m : {Method::kOurs, Method::kOursFm, Method::kSgmc}) {
      CHECK(parse_method(to_string(m)) == m);
    }
    CHECK(parse_method("sgmc") == Method::kSgmc);
    CHECK_THROWS_AS(parse_method("svd"), ValidationError);
  }

  TEST_CASE("rank 0 is recovered exactly by every method") {
    SyntheticConfig c = small_config();
    c.ranks = {0};
    const ExperimentReport report = run_rank_sweep(c);
    CHECK(report.records.size() == 6);
    for (const Record& r : report.records) {
      CHECK(r.test_rmse <= 1e-10);
      CHECK(r.train_rmse <= 1e-10);
    }
  }

  TEST_CASE("full density with mu = 0 is exact on the holdout") {
    SyntheticConfig c = small_config();
    c.densities = {1.0};
    c.fit.mu = 0.0;
    c.fit.max_iters = 5000;
    c.methods = {Method::kOurs, Method::kOursFm};
    const ExperimentReport report = run_density_sweep(c);
    for (const Record& r : report.records) CHECK(r.test_rmse <= 1e-6);
  }

  TEST_CASE("noise sigma 0 reproduces the clean rank point bitwise") {
    SyntheticConfig c = small_config();
    c.ranks = {c.rank};
    const ExperimentReport clean = run_rank_sweep(c);
    const ExperimentReport noisy = run_noise_sweep(c);
    for (const Record& n : noisy.records) {
      if (n.param != 0.0) continue;
      bool matched = false;
      for (const Record& r : clean.records) {
        if (r.method != n.method || r.seed != n.seed) continue;
        matched = true;
        CHECK(r.test_rmse == n.test_rmse);
        CHECK(r.train_rmse == n.train_rmse);
        CHECK(r.iters == n.iters);
      }
      CHECK(matched);
    }
  }

  TEST_CASE("sweeps are deterministic across thread counts") {
    SyntheticConfig c = small_config();
    c.threads = 1;
    const ExperimentReport serial = run_density_sweep(c);
    c.threads = 4;
    const ExperimentReport parallel = run_density_sweep(c);
    CHECK(serial.records == parallel.records);
    CHECK(report_to_csv(serial) == report_to_csv(parallel));
    CHECK(serial.records.size() == 2 * 2 * 3);
  }

  TEST_CASE("report round trips") {
    test::TempDir dir("experiments");
    ExperimentReport empty;
    empty.protocol = "synth-rank";
    CHECK(report_to_csv(empty) ==
          "protocol,param,method,seed,train_rmse,test_rmse,iters,seconds\n");

    ExperimentReport report;
    report.protocol = "synth-density";
    report.config = to_json(small_config());
    report.reference = {{"note", "x"}};
    report.records = {
        {"synth-density", 0.05, Method::kOursFm, 3, 1.0 / 3.0, std::sqrt(2.0) * 1e-9, 1234, 0},
        {"synth-density", 0.2, Method::kSgmc, 4, 0.125, 3.14159265358979e-7, 7, 1.5}};
    const std::string csv = report_to_csv(report);
    CHECK(csv.find("0.33333333333333331") != std::string::npos);

    for (auto format : {ReportFormat::kCsv, ReportFormat::kJson}) {
      const std::string path =
          dir.file(format == ReportFormat::kCsv ? "r.csv" : "r.json");
      emit_report(report, path, format);
      const ExperimentReport back = read_report(path, format);
      CHECK(back.protocol == report.protocol);
      CHECK(back.records == report.records);
      if (format == ReportFormat::kJson) {
        CHECK(back.config == report.config);
        CHECK(back.reference == report.reference);
      }
    }
    emit_report(empty, dir.file("empty.csv"), ReportFormat::kCsv);
    CHECK(read_report(dir.file("empty.csv"), ReportFormat::kCsv).records.empty());

    std::ofstream(dir.file("bad.csv"))
        << "protocol,param,method,seed,train_rmse,test_rmse,iters,seconds\n"
        << "synth-rank,5,ours,0,0.1,0.2,10\n";
    try {
      read_report(dir.file("bad.csv"), ReportFormat::kCsv);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS(emit_report(report, dir.file("missing/dir/r.csv"), ReportFormat::kCsv));
    CHECK(report_format_for("a/b.json") == ReportFormat::kJson);
    CHECK(report_format_for("a/b.csv") == ReportFormat::kCsv);
  }

  TEST_CASE("config JSON round trip") {
    SyntheticConfig c = small_config();
    c.fit.reg_target = RegTarget::kRaw;
    c.fit.sgmc = {0.1, 0.2, 0.3, 0.4};
    c.methods = {Method::kSgmc, Method::kOurs};
    const nlohmann::json j = to_json(c);
    CHECK(to_json(synthetic_config_from_json(j)) == j);
    CHECK_THROWS_AS(synthetic_config_from_json({{"rowz", 3}}), ValidationError);
    CHECK_THROWS_AS(fit_config_from_json({{"lr", 3}}), ValidationError);

    Ml100kConfig m;
    m.k_candidates = {5, 7};
    m.split = "u1";
    m.center = false;
    const nlohmann::json mj = to_json(m);
    CHECK(to_json(ml100k_config_from_json(mj)) == mj);
  }

  TEST_CASE("config validation") {
    SyntheticConfig c = small_config();
    c.ranks = {9};
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(run_rank_sweep(c), ValidationError);
    c.ranks = {2};
    c.rank = 9;
    CHECK_THROWS_AS(run_density_sweep(c), ValidationError);
    c = small_config();
    c.densities = {0.0};
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = small_config();
    c.methods.clear();
    CHECK_THROWS_AS(c.validate(), ValidationError);
    Ml100kConfig m;
    m.split = "u9";
    CHECK_THROWS_AS(m.validate(), ValidationError);
    CHECK(resolve_threads(3) >= 1);
  }

  TEST_CASE("ml100k reports missing data clearly") {
    Ml100kConfig m;
    m.data_dir = "/nonexistent/ml-100k";
    CHECK_THROWS_AS(run_ml100k(m), ParseError);
  }
}

}  // namespace
}  // namespace fgmc
