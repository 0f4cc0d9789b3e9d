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

#include "fgmc/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fgmc/io.hpp"
#include "fgmc/random.hpp"

namespace fgmc {

Graph::Graph(Matrix weights, std::vector<std::string> labels)
    : weights_(std::move(weights)), labels_(std::move(labels)) {
  const Index n = weights_.rows();
  if (weights_.cols() != n) {
    throw ValidationError("adjacency matrix must be square");
  }
  if (!labels_.empty() && static_cast<Index>(labels_.size()) != n) {
    throw ValidationError("label count does not match node count");
  }
  if (!weights_.allFinite()) {
    throw ValidationError("adjacency matrix has non-finite entries");
  }
  for (Index j = 0; j < n; ++j) {
    if (weights_(j, j) != 0.0) {
      throw ValidationError("adjacency diagonal must be zero (node " +
                            std::to_string(j) + ")");
    }
    for (Index i = 0; i < n; ++i) {
      if (weights_(i, j) < 0.0) {
        throw ValidationError("negative edge weight at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
      if (std::abs(weights_(i, j) - weights_(j, i)) > kSymmetryTolerance) {
        throw ValidationError("adjacency matrix is not symmetric at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

Index Graph::edge_count() const {
  Index count = 0;
  for (Index j = 0; j < size(); ++j) {
    for (Index i = 0; i < j; ++i) {
      count += weights_(i, j) > 0.0 ? 1 : 0;
    }
  }
  return count;
}

Matrix build_laplacian(const Graph& g) {
  const Matrix& w = g.weights();
  Matrix laplacian = -w;
  laplacian.diagonal() = w.rowwise().sum();
  return laplacian;
}

SpectralBasis spectral_decompose(const Matrix& laplacian, Index k) {
  const Index n = laplacian.rows();
  if (laplacian.cols() != n) {
    throw ValidationError("Laplacian must be square");
  }
  if (k < 1 || k > n) {
    throw ValidationError("basis size k=" + std::to_string(k) +
                          " outside [1, " + std::to_string(n) + "]");
  }
  const double scale = std::max(1.0, laplacian.cwiseAbs().maxCoeff());
  if ((laplacian - laplacian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("Laplacian is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver did not converge (n=" +
                       std::to_string(n) + ")");
  }

  SpectralBasis basis;
  basis.values = solver.eigenvalues().head(k);
  basis.vectors = solver.eigenvectors().leftCols(k);
  for (Index c = 0; c < k; ++c) {
    auto column = basis.vectors.col(c);
    for (Index r = 0; r < n; ++r) {
      if (std::abs(column(r)) > 1e-10) {
        if (column(r) < 0.0) column *= -1.0;
        break;
      }
    }
  }
  return basis;
}

SpectralBasis graph_basis(const Graph& g, Index k) {
  const Matrix laplacian = build_laplacian(g);
  std::vector<Index> kept;
  for (Index i = 0; i < g.size(); ++i) {
    if (laplacian(i, i) > 0.0) kept.push_back(i);
  }
  if (static_cast<Index>(kept.size()) == g.size()) {
    return spectral_decompose(laplacian, k);
  }
  const auto n = static_cast<Index>(kept.size());
  if (k > n) {
    throw ValidationError("basis size k=" + std::to_string(k) + " exceeds the " +
                          std::to_string(n) + " non-isolated nodes");
  }
  Matrix sub(n, n);
  for (Index b = 0; b < n; ++b) {
    for (Index a = 0; a < n; ++a) sub(a, b) = laplacian(kept[a], kept[b]);
  }
  const SpectralBasis reduced = spectral_decompose(sub, k);
  SpectralBasis basis;
  basis.values = reduced.values;
  basis.vectors = Matrix::Zero(g.size(), k);
  for (Index a = 0; a < n; ++a) basis.vectors.row(kept[a]) = reduced.vectors.row(a);
  return basis;
}

Index community_of(Index node, Index n, Index n_communities) {
  return node * n_communities / n;
}

Graph generate_community_graph(const CommunityGraphParams& p) {
  if (p.n < 1) throw ValidationError("community graph needs n >= 1");
  if (p.n_communities < 1 || p.n_communities > p.n) {
    throw ValidationError("n_communities must lie in [1, n]");
  }
  if (!(p.p_out >= 0.0 && p.p_out <= p.p_in && p.p_in <= 1.0)) {
    throw ValidationError("community graph needs 0 <= p_out <= p_in <= 1");
  }
  if (!(p.weight_in >= 0.0) || !(p.weight_out >= 0.0)) {
    throw ValidationError("community graph weights must be nonnegative");
  }

  Rng rng(p.seed);
  Matrix w = Matrix::Zero(p.n, p.n);
  for (Index i = 0; i < p.n; ++i) {
    const Index ci = community_of(i, p.n, p.n_communities);
    for (Index j = i + 1; j < p.n; ++j) {
      const bool same = ci == community_of(j, p.n, p.n_communities);
      const double u = uniform01(rng);
      if (u < (same ? p.p_in : p.p_out)) {
        w(i, j) = w(j, i) = same ? p.weight_in : p.weight_out;
      }
    }
  }
  return Graph(std::move(w));
}

Graph perturb_graph(const Graph& g, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ValidationError("noise sigma must be finite and nonnegative");
  }
  if (sigma == 0.0) return g;

  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  Matrix w = g.weights();
  const Index n = g.size();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double value = std::max(0.0, w(i, j) + noise(rng));
      w(i, j) = w(j, i) = value;
    }
  }
  return Graph(std::move(w), g.labels());
}

Graph knn_graph(const Matrix& points, Index k_nn) {
  const Index m = points.rows();
  if (k_nn < 1 || k_nn >= m) {
    throw ValidationError("knn_graph needs 1 <= k_nn < number of rows");
  }
  const Vector norms = points.rowwise().norm();
  Matrix similarity = points * points.transpose();
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      const double denom = norms(i) * norms(j);
      similarity(i, j) = denom > 0.0 ? similarity(i, j) / denom : 0.0;
    }
  }

  Matrix w = Matrix::Zero(m, m);
  std::vector<Index> order(m - 1);
  for (Index i = 0; i < m; ++i) {
    Index pos = 0;
    for (Index j = 0; j < m; ++j) {
      if (j != i) order[pos++] = j;
    }
    std::partial_sort(order.begin(), order.begin() + k_nn, order.end(),
                      [&](Index a, Index b) {
                        if (similarity(i, a) != similarity(i, b)) {
                          return similarity(i, a) > similarity(i, b);
                        }
                        return a < b;
                      });
    for (Index t = 0; t < k_nn; ++t) {
      const Index j = order[t];
      // Cosine similarity can exceed 1 by rounding.
      const double weight = std::clamp(similarity(i, j), 0.0, 1.0);
      w(i, j) = w(j, i) = weight;
    }
  }
  return Graph(std::move(w));
}

namespace {

double parse_weight(std::string_view token, std::size_t line_no) {
  const double value = parse_double(token, line_no);
  if (value < 0.0) {
    throw ParseError("negative edge weight " + std::string(token), line_no);
  }
  return value;
}

Index parse_node(std::string_view token, std::size_t line_no) {
  long long value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("invalid node index '" + std::string(token) + "'", line_no);
  }
  if (value < 1) {
    throw ParseError("node indices are 1-based, got " + std::string(token),
                     line_no);
  }
  return static_cast<Index>(value - 1);
}

Graph symmetrized(Matrix w) {
  const Index n = w.rows();
  for (Index i = 0; i < n; ++i) {
    w(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      w(i, j) = w(j, i) = std::max(w(i, j), w(j, i));
    }
  }
  return Graph(std::move(w));
}

}  // namespace

Graph load_adjacency(const std::string& path, AdjacencyFormat format,
                     Index n_nodes) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open adjacency file " + path);

  std::string line;
  std::size_t line_no = 0;
  if (format == AdjacencyFormat::kDenseCsv) {
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_blank(line)) continue;
      std::vector<double> row;
      for (std::string_view field : split(line, ',')) {
        row.push_back(parse_weight(trim(field), line_no));
      }
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw ParseError("expected " + std::to_string(rows.front().size()) +
                             " columns, found " + std::to_string(row.size()),
                         line_no);
      }
      rows.push_back(std::move(row));
    }
    const Index n = static_cast<Index>(rows.size());
    if (n > 0 && static_cast<Index>(rows.front().size()) != n) {
      throw ParseError("dense adjacency must be square, got " +
                       std::to_string(n) + " rows of " +
                       std::to_string(rows.front().size()));
    }
    Matrix w(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) w(i, j) = rows[i][j];
    }
    return symmetrized(std::move(w));
  }

  struct Triplet {
    Index i, j;
    double w;
  };
  std::vector<Triplet> triplets;
  Index max_index = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty() || content.front() == '#' || content.front() == '%') {
      continue;
    }
    const auto fields = split_whitespace(content);
    if (fields.size() != 3) {
      throw ParseError("expected 'i j w', found " +
                           std::to_string(fields.size()) + " fields",
                       line_no);
    }
    Triplet t{parse_node(fields[0], line_no), parse_node(fields[1], line_no),
              parse_weight(fields[2], line_no)};
    if (n_nodes > 0 && (t.i >= n_nodes || t.j >= n_nodes)) {
      throw ParseError("node index exceeds graph size " + std::to_string(n_nodes),
                       line_no);
    }
    max_index = std::max({max_index, t.i, t.j});
    triplets.push_back(t);
  }
  const Index n = n_nodes > 0 ? n_nodes : max_index + 1;
  Matrix w = Matrix::Zero(n, n);
  for (const Triplet& t : triplets) {
    w(t.i, t.j) = std::max(w(t.i, t.j), t.w);
  }
  return symmetrized(std::move(w));
}

void save_adjacency(const Graph& g, const std::string& path,
                    AdjacencyFormat format) {
  std::ostringstream out;
  const Matrix& w = g.weights();
  if (format == AdjacencyFormat::kDenseCsv) {
    write_dense_csv(out, w);
  } else {
    for (Index i = 0; i < g.size(); ++i) {
      for (Index j = i + 1; j < g.size(); ++j) {
        if (w(i, j) > 0.0) {
          out << i + 1 << ' ' << j + 1 << ' ' << format_double(w(i, j)) << '\n';
        }
      }
    }
  }
  write_file_atomic(path, out.str());
}

AdjacencyFormat adjacency_format_for(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".csv") {
    return AdjacencyFormat::kDenseCsv;
  }
  return AdjacencyFormat::kTriplet;
}

}  // namespace fgmc
