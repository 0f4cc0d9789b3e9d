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

#ifndef FGMC_DATA_HPP_
#define FGMC_DATA_HPP_

#include <cstdint>
#include <string>
#include <utility>

#include "fgmc/common.hpp"
#include "fgmc/graph.hpp"
#include "fgmc/objective.hpp"

namespace fgmc {

struct RatingsDataset {
  MaskedMatrix obs;  // users x items
  Graph user_graph;
  Graph item_graph;
  double min_rating = 1.0;
  double max_rating = 5.0;
};

struct Ml100kOptions {
  Index users = 943;
  Index items = 1682;
  Index k_nn = 10;
  double min_rating = 1.0;
  double max_rating = 5.0;
};

// Reads a MovieLens ratings file: "user \t item \t rating \t timestamp" per
// line, 1-based ids, integer ratings within [min_rating, max_rating].
// Duplicate (user, item) pairs are rejected.
MaskedMatrix read_ratings(const std::string& path, const Ml100kOptions& options);

// Cosine k-NN graphs over the zero-filled rows (users) and columns (items).
std::pair<Graph, Graph> rating_graphs(const MaskedMatrix& ratings, Index k_nn);

// Loads <dir>/u.data and builds the user and item graphs from it.
RatingsDataset load_ml100k(const std::string& dir,
                           const Ml100kOptions& options = {});

// Exactly round(density m n) entries chosen uniformly without replacement.
Mask sample_mask(Index m, Index n, double density, std::uint64_t seed);

}  // namespace fgmc

#endif  // FGMC_DATA_HPP_
