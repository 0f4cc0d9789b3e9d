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
#include <memory>

#include "doctest.h"
#include "fgmc/funcmap.hpp"
#include "fgmc/graph.hpp"
#include "support.hpp"

namespace fgmc {
namespace {

std::shared_ptr<const SpectralBasis> basis_of(Index n, Index k, std::uint64_t seed) {
  return std::make_shared<const SpectralBasis>(
      spectral_decompose(build_laplacian(test::random_graph(n, 0.5, seed)), k));
}

// Dense triple product with explicit loops.
Matrix triple_product(const Matrix& a, const Matrix& x, const Matrix& b) {
  Matrix out = Matrix::Zero(a.cols(), b.cols());
  for (Index p = 0; p < a.cols(); ++p) {
    for (Index q = 0; q < b.cols(); ++q) {
      for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) out(p, q) += a(i, p) * x(i, j) * b(j, q);
      }
    }
  }
  return out;
}

Index numerical_rank(const Matrix& m, double rel) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  Index r = 0;
  while (r < s.size() && s(r) > rel * s(0)) ++r;
  return r;
}

TEST_SUITE("funcmap") {
  TEST_CASE("encode examples") {
    const auto rows = basis_of(6, 3, 1);
    const auto cols = basis_of(7, 3, 2);
    const Matrix outer = rows->vectors.col(0) * cols->vectors.col(0).transpose();
    Matrix e11 = Matrix::Zero(3, 3);
    e11(0, 0) = 1.0;
    CHECK((encode(outer, rows->vectors, cols->vectors) - e11).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(encode(Matrix::Zero(6, 7), rows->vectors, cols->vectors) == Matrix::Zero(3, 3));
    const Matrix x = test::normal_matrix(6, 7, 3);
    const Matrix oracle = triple_product(rows->vectors, x, cols->vectors);
    CHECK((encode(x, rows->vectors, cols->vectors) - oracle).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(encode(Matrix::Zero(7, 6), rows->vectors, cols->vectors), ValidationError);
  }

  TEST_CASE("decode of encode is an idempotent projection") {
    const auto rows = basis_of(10, 4, 5);
    const auto cols = basis_of(12, 4, 6);
    const Matrix x = test::normal_matrix(10, 12, 7);
    const auto project = [&](const Matrix& a) {
      return decode(FunctionalModel(encode(a, rows->vectors, cols->vectors), rows, cols));
    };
    const Matrix once = project(x);
    CHECK((project(once) - once).norm() <= 1e-10 * std::max(1.0, once.norm()));
    CHECK(numerical_rank(once, 1e-9) <= 4);
  }

  TEST_CASE("band-limited matrices are reproduced exactly") {
    const auto rows = basis_of(15, 5, 8);
    const auto cols = basis_of(18, 5, 9);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Matrix m = synthesize_bandlimited(*rows, *cols, 3, seed);
      const Matrix back =
          decode(FunctionalModel(encode(m, rows->vectors, cols->vectors), rows, cols));
      CHECK((back - m).norm() <= 1e-10 * m.norm());
    }
  }

  TEST_CASE("projection loss equals the energy outside the basis") {
    const Index m = 9, n = 11, k = 4;
    const Graph gr = test::random_graph(m, 0.5, 10);
    const Graph gc = test::random_graph(n, 0.5, 11);
    const SpectralBasis full_r = spectral_decompose(build_laplacian(gr), m);
    const SpectralBasis full_c = spectral_decompose(build_laplacian(gc), n);
    const auto rows = std::make_shared<const SpectralBasis>(spectral_decompose(build_laplacian(gr), k));
    const auto cols = std::make_shared<const SpectralBasis>(spectral_decompose(build_laplacian(gc), k));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Matrix x = test::normal_matrix(m, n, seed + 20);
      const Matrix all = full_r.vectors.transpose() * x * full_c.vectors;
      const double outside = all.squaredNorm() - all.topLeftCorner(k, k).squaredNorm();
      const Matrix back =
          decode(FunctionalModel(encode(x, rows->vectors, cols->vectors), rows, cols));
      CHECK(std::abs((x - back).squaredNorm() - outside) <= 1e-8);
    }
  }

  TEST_CASE("decode applies the transforms") {
    const auto rows = basis_of(8, 3, 12);
    const auto cols = basis_of(9, 3, 13);
    FunctionalModel model(test::normal_matrix(3, 3, 14), rows, cols);
    model.row_transform = test::normal_matrix(3, 3, 15);
    model.column_transform = test::normal_matrix(3, 3, 16);
    const Matrix expected = rows->vectors * model.row_transform * model.coefficients *
                            model.column_transform.transpose() * cols->vectors.transpose();
    CHECK((decode(model) - expected).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(numerical_rank(decode(model), 1e-9) <= 3);

    // Linear in C.
    FunctionalModel a = model, b = model, sum = model;
    a.coefficients = test::normal_matrix(3, 3, 17);
    b.coefficients = test::normal_matrix(3, 3, 18);
    sum.coefficients = 2.0 * a.coefficients - b.coefficients;
    CHECK((decode(sum) - (2.0 * decode(a) - decode(b))).norm() <= 1e-12);

    FunctionalModel bad = model;
    bad.row_transform = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_THROWS_AS(FunctionalModel(Matrix::Zero(2, 2), rows, cols), ValidationError);
  }

  TEST_CASE("synthesize_bandlimited") {
    const auto rows = basis_of(20, 8, 21);
    const auto cols = basis_of(25, 8, 22);
    CHECK(synthesize_bandlimited(*rows, *cols, 0, 1) == Matrix::Zero(20, 25));
    CHECK_THROWS_AS(synthesize_bandlimited(*rows, *cols, 9, 1), ValidationError);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Index r = 1 + static_cast<Index>(seed % 8);
      const Matrix m = synthesize_bandlimited(*rows, *cols, r, seed);
      CHECK(numerical_rank(m, 1e-9) == r);
      CHECK(basis_consistency_residual(m, rows->vectors, cols->vectors, r) <= 1e-9);
      CHECK(std::sqrt(m.squaredNorm() / static_cast<double>(m.size())) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
    const Matrix scaled = synthesize_bandlimited(*rows, *cols, 3, 4, 0.25);
    CHECK(std::sqrt(scaled.squaredNorm() / 500.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(synthesize_bandlimited(*rows, *cols, 3, 4) == synthesize_bandlimited(*rows, *cols, 3, 4));
  }

  TEST_CASE("basis_consistency_residual") {
    const Index m = 10, n = 8;
    const Graph gr = test::random_graph(m, 0.6, 30);
    const SpectralBasis rows = spectral_decompose(build_laplacian(gr), 4);
    const SpectralBasis cols = spectral_decompose(build_laplacian(test::random_graph(n, 0.6, 31)), 4);

    // u orthogonal to span(Phi): take an eigenvector outside the first k.
    const SpectralBasis full = spectral_decompose(build_laplacian(gr), m);
    const Vector u = full.vectors.col(m - 1);
    const Vector v = cols.vectors.col(0);
    CHECK(basis_consistency_residual(u * v.transpose(), rows.vectors, cols.vectors, 1) ==
          doctest::Approx(1.0).epsilon(1e-9));

    const SpectralBasis full_c = spectral_decompose(build_laplacian(test::random_graph(n, 0.6, 31)), n);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Matrix x = test::normal_matrix(m, n, seed);
      CHECK(basis_consistency_residual(x, full.vectors, full_c.vectors, 5) <= 1e-9);
    }
    CHECK(basis_consistency_residual(Matrix::Zero(m, n), rows.vectors, cols.vectors, 2) == 0.0);
    CHECK_THROWS_AS(basis_consistency_residual(Matrix::Zero(m, n), rows.vectors, cols.vectors, 5),
                    ValidationError);
  }
}

}  // namespace
}  // namespace fgmc
