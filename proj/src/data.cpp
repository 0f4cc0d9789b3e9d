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

#include "fgmc/data.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "fgmc/io.hpp"
#include "fgmc/random.hpp"

namespace fgmc {

namespace {

long long parse_integer(std::string_view token, const char* what,
                        std::size_t line_no) {
  long long value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(std::string(what) + " is not an integer: '" +
                         std::string(token) + "'",
                     line_no);
  }
  return value;
}

}  // namespace

MaskedMatrix read_ratings(const std::string& path, const Ml100kOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ratings file " + path);

  Matrix values = Matrix::Zero(options.users, options.items);
  Mask mask = Mask::Constant(options.users, options.items, false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError("expected 4 tab-separated fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const long long user = parse_integer(trim(fields[0]), "user id", line_no);
    const long long item = parse_integer(trim(fields[1]), "item id", line_no);
    const long long rating = parse_integer(trim(fields[2]), "rating", line_no);
    parse_integer(trim(fields[3]), "timestamp", line_no);
    if (user < 1 || user > options.users) {
      throw ParseError("user id " + std::to_string(user) + " outside [1, " +
                           std::to_string(options.users) + "]",
                       line_no);
    }
    if (item < 1 || item > options.items) {
      throw ParseError("item id " + std::to_string(item) + " outside [1, " +
                           std::to_string(options.items) + "]",
                       line_no);
    }
    if (rating < options.min_rating || rating > options.max_rating) {
      throw ParseError("rating " + std::to_string(rating) + " outside the scale",
                       line_no);
    }
    if (mask(user - 1, item - 1)) {
      throw ParseError("duplicate rating for user " + std::to_string(user) +
                           ", item " + std::to_string(item),
                       line_no);
    }
    mask(user - 1, item - 1) = true;
    values(user - 1, item - 1) = static_cast<double>(rating);
  }
  return MaskedMatrix(std::move(values), std::move(mask));
}

std::pair<Graph, Graph> rating_graphs(const MaskedMatrix& ratings, Index k_nn) {
  return {knn_graph(ratings.values(), k_nn),
          knn_graph(ratings.values().transpose(), k_nn)};
}

RatingsDataset load_ml100k(const std::string& dir, const Ml100kOptions& options) {
  const std::string path = (std::filesystem::path(dir) / "u.data").string();
  if (!std::filesystem::exists(path)) {
    throw ParseError("MovieLens-100K ratings not found at " + path);
  }
  MaskedMatrix obs = read_ratings(path, options);
  auto [users, items] = rating_graphs(obs, options.k_nn);
  return RatingsDataset{std::move(obs), std::move(users), std::move(items),
                        options.min_rating, options.max_rating};
}

Mask sample_mask(Index m, Index n, double density, std::uint64_t seed) {
  if (m < 1 || n < 1) throw ValidationError("sample_mask needs m, n >= 1");
  if (!(density > 0.0 && density <= 1.0)) {
    throw ValidationError("density must lie in (0, 1]");
  }
  const Index total = m * n;
  const auto count = static_cast<Index>(std::llround(density * static_cast<double>(total)));
  if (count < 1) {
    throw ValidationError("density " + std::to_string(density) +
                          " selects no entries of a " + std::to_string(m) + "x" +
                          std::to_string(n) + " matrix");
  }
  std::vector<Index> indices(static_cast<std::size_t>(total));
  for (Index t = 0; t < total; ++t) indices[t] = t;
  Rng rng(seed);
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (Index t = 0; t < count; ++t) {
    const auto j = t + static_cast<Index>(
                           uniform_index(rng, static_cast<std::uint64_t>(total - t)));
    std::swap(indices[t], indices[j]);
  }
  Mask mask = Mask::Constant(m, n, false);
  for (Index t = 0; t < count; ++t) mask(indices[t]) = true;
  return mask;
}

}  // namespace fgmc
