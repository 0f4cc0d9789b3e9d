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

#ifndef FGMC_TESTS_SUPPORT_HPP_
#define FGMC_TESTS_SUPPORT_HPP_

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fgmc/common.hpp"
#include "fgmc/graph.hpp"
#include "fgmc/random.hpp"

namespace fgmc::test {

inline Matrix normal_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix a(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) a(i, j) = normal(rng);
  }
  return a;
}

inline Matrix normal_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return normal_matrix(rows, cols, rng);
}

// Erdos-Renyi graph with U(0, 1) weights.
inline Graph random_graph(Index n, double p, std::uint64_t seed) {
  Rng rng(seed);
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (uniform01(rng) < p) w(i, j) = w(j, i) = 0.1 + uniform01(rng);
    }
  }
  return Graph(std::move(w));
}

inline Graph path_graph(Index n, double weight = 1.0) {
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) w(i, i + 1) = w(i + 1, i) = weight;
  return Graph(std::move(w));
}

inline Mask random_mask(Index rows, Index cols, double p, std::uint64_t seed) {
  Rng rng(seed);
  Mask m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = uniform01(rng) < p;
  }
  return m;
}

inline bool is_connected(const Graph& g) {
  std::vector<bool> seen(static_cast<std::size_t>(g.size()), false);
  std::vector<Index> stack{0};
  seen[0] = true;
  Index count = 1;
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    for (Index u = 0; u < g.size(); ++u) {
      if (g.weights()(v, u) > 0.0 && !seen[u]) {
        seen[u] = true;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count == g.size();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fgmc-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fgmc::test

#endif  // FGMC_TESTS_SUPPORT_HPP_
