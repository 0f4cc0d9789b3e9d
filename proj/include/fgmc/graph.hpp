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

#ifndef FGMC_GRAPH_HPP_
#define FGMC_GRAPH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fgmc/common.hpp"

namespace fgmc {

// Weighted undirected graph stored as a dense adjacency matrix.
//
// The constructor enforces the graph invariants: square, symmetric within
// 1e-12, nonnegative, zero diagonal, finite. A Graph is immutable afterwards.
class Graph {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  explicit Graph(Matrix weights, std::vector<std::string> labels = {});

  Index size() const { return weights_.rows(); }
  const Matrix& weights() const { return weights_; }
  const std::vector<std::string>& labels() const { return labels_; }

  // Number of (unordered) node pairs with positive weight.
  Index edge_count() const;

 private:
  Matrix weights_;
  std::vector<std::string> labels_;
};

// Truncated eigendecomposition of a graph Laplacian: the k smallest
// eigenpairs in ascending order, one eigenvector per column.
struct SpectralBasis {
  Matrix vectors;  // n x k, orthonormal columns
  Vector values;   // k, nondecreasing

  Index size() const { return vectors.rows(); }
  Index k() const { return vectors.cols(); }
};

// L = D - W with D = diag(W 1).
Matrix build_laplacian(const Graph& g);

// The k smallest eigenpairs of a symmetric PSD matrix. Each eigenvector is
// sign-normalized so its first component with magnitude above 1e-10 is
// positive. Throws ValidationError for k outside [1, n] or a non-symmetric
// input and NumericError when the eigensolver fails.
SpectralBasis spectral_decompose(const Matrix& laplacian, Index k);

// Spectral basis of g with isolated nodes left out: the decomposition runs on
// the Laplacian of the remaining nodes and isolated nodes get zero rows, so
// they do not occupy the null space. Equals
// spectral_decompose(build_laplacian(g), k) when no node is isolated.
SpectralBasis graph_basis(const Graph& g, Index k);

struct CommunityGraphParams {
  Index n = 0;
  Index n_communities = 1;
  double p_in = 0.0;
  double p_out = 0.0;
  double weight_in = 1.0;
  double weight_out = 1.0;
  std::uint64_t seed = 0;
};

// Node i belongs to community floor(i * n_communities / n), so communities are
// contiguous and differ in size by at most one.
Index community_of(Index node, Index n, Index n_communities);

// Stochastic block model. Every intra-community pair is joined with
// probability p_in (weight weight_in) and every inter-community pair with
// probability p_out (weight weight_out). Pairs are visited in row-major upper
// triangular order, one Bernoulli draw each, so the result depends only on the
// parameters.
Graph generate_community_graph(const CommunityGraphParams& params);

// Adds i.i.d. N(0, sigma^2) noise to every upper-triangular adjacency entry
// (including absent edges), clips negatives to zero and mirrors the upper
// triangle. sigma == 0 returns the input unchanged.
Graph perturb_graph(const Graph& g, double sigma, std::uint64_t seed);

// Cosine k-nearest-neighbour graph over the rows of `points`. Each node links
// to its k_nn most similar other rows (ties go to the lower index); the union
// of both directions is kept and the edge weight is max(similarity, 0). Zero
// rows have similarity 0 to everything.
Graph knn_graph(const Matrix& points, Index k_nn);

enum class AdjacencyFormat {
  kDenseCsv,  // one comma-separated row per line
  kTriplet,   // whitespace-separated "i j w", 1-indexed
};

// Reads an adjacency file. Asymmetric input is symmetrized with
// max(W_ij, W_ji); the diagonal is dropped. Triplet files size the graph by
// the largest index seen unless `n_nodes` is given.
Graph load_adjacency(const std::string& path, AdjacencyFormat format,
                     Index n_nodes = 0);
void save_adjacency(const Graph& g, const std::string& path,
                    AdjacencyFormat format);

// Picks the format from the extension: ".csv" is dense, anything else is
// triplet text.
AdjacencyFormat adjacency_format_for(const std::string& path);

}  // namespace fgmc

#endif  // FGMC_GRAPH_HPP_
