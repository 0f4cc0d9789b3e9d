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

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "fgmc/funcmap.hpp"
#include "fgmc/graph.hpp"
#include "fgmc/io.hpp"
#include "json.hpp"
#include "support.hpp"

namespace fgmc {
namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fgmc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kSmallSynthetic = R"({
  "rows": 24, "cols": 30, "communities": 3, "p_in": 0.6, "p_out": 0.05,
  "k": 6, "rank": 4, "n_seeds": 2, "fit": {"max_iters": 60}
})";

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"bogus"}).code == 2);
    const CliResult r = run_cli({"synth-rank", "--no-such-flag"});
    CHECK(r.code == 2);
    CHECK(r.err.find("synth-rank") != std::string::npos);
    CHECK(run_cli({"synth-rank", "--optimizer", "newton"}).code == 2);
    CHECK(run_cli({"--help"}).code == 0);
  }

  TEST_CASE("runtime errors exit with 1") {
    test::TempDir dir("cli");
    std::ofstream(dir.file("c.json")) << kSmallSynthetic;
    const CliResult r = run_cli({"synth-rank", "--config", dir.file("c.json"), "--rank", "99"});
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
    std::ofstream(dir.file("bad.json")) << "{\"rows\": ";
    CHECK(run_cli({"synth-rank", "--config", dir.file("bad.json")}).code == 1);
    CHECK(run_cli({"ml100k", "--data-dir", dir.file("none")}).code == 1);
  }

  TEST_CASE("synth-rank output is reproducible") {
    test::TempDir dir("cli");
    std::ofstream(dir.file("c.json")) << kSmallSynthetic;
    const std::vector<std::string> base{"synth-rank", "--config", dir.file("c.json"),
                                        "--seed", "7", "--rank", "2,4"};
    auto first = base;
    first.insert(first.end(), {"--out", dir.file("r1.csv"), "--threads", "1"});
    auto second = base;
    second.insert(second.end(), {"--out", dir.file("r2.csv"), "--threads", "3"});
    REQUIRE(run_cli(first).code == 0);
    REQUIRE(run_cli(second).code == 0);
    const std::string a = read_file(dir.file("r1.csv"));
    CHECK(a == read_file(dir.file("r2.csv")));
    // Header plus 2 seeds x 2 ranks x 3 methods.
    CHECK(std::count(a.begin(), a.end(), '\n') == 13);

    const CliResult to_stdout = run_cli(base);
    CHECK(to_stdout.out == a);
    const CliResult json = run_cli({"synth-density", "--config", dir.file("c.json"),
                                    "--density", "0.5", "--methods", "ours",
                                    "--format", "json"});
    CHECK(json.code == 0);
    CHECK(nlohmann::json::parse(json.out).at("records").size() == 2);
  }

  TEST_CASE("check-gradients passes on the shipped defaults") {
    const CliResult r = run_cli({"check-gradients", "--instances", "10"});
    CHECK(r.code == 0);
    CHECK(r.out.find("ok") != std::string::npos);
  }

  TEST_CASE("fit on a fully observed matrix returns its band-limited projection") {
    test::TempDir dir("cli");
    const Graph gr = test::random_graph(9, 0.5, 1);
    const Graph gc = test::random_graph(11, 0.5, 2);
    save_adjacency(gr, dir.file("rows.txt"), AdjacencyFormat::kTriplet);
    save_adjacency(gc, dir.file("cols.csv"), AdjacencyFormat::kDenseCsv);
    const Matrix x = test::normal_matrix(9, 11, 3);
    std::ostringstream csv;
    write_dense_csv(csv, x);
    write_file_atomic(dir.file("m.csv"), csv.str());

    const CliResult r = run_cli({"fit", "--matrix", dir.file("m.csv"), "--row-graph",
                                 dir.file("rows.txt"), "--col-graph", dir.file("cols.csv"),
                                 "--out", dir.file("out.csv"), "--mu", "0", "--k", "4",
                                 "--val-ratio", "0", "--max-iters", "50"});
    REQUIRE(r.code == 0);
    const Matrix completed = read_dense_csv(dir.file("out.csv"));
    const SpectralBasis rows = graph_basis(gr, 4);
    const SpectralBasis cols = graph_basis(gc, 4);
    const Matrix oracle = rows.vectors * (rows.vectors.transpose() * x * cols.vectors) *
                          cols.vectors.transpose();
    CHECK((completed - oracle).cwiseAbs().maxCoeff() <= 1e-8);

    CHECK(run_cli({"fit", "--matrix", dir.file("m.csv"), "--row-graph", dir.file("cols.csv"),
                   "--col-graph", dir.file("cols.csv"), "--out", dir.file("o2.csv")})
              .code == 1);
  }
}

}  // namespace
}  // namespace fgmc
