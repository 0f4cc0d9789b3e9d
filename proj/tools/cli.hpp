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

#ifndef FGMC_TOOLS_CLI_HPP_
#define FGMC_TOOLS_CLI_HPP_

#include <cstdint>
#include <ostream>

#include "fgmc/common.hpp"

namespace fgmc::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct GradientCheckResult {
  Index instances = 0;
  // Largest norm-wise relative error ||g - g_fd|| / (||g|| + ||g_fd||) over
  // all instances and parameter blocks.
  double ours_error = 0.0;
  double sgmc_error = 0.0;
};

// Central differences against the dense and the entry-list gradients of both
// objectives on random instances with m, n <= 12 and k <= 5.
GradientCheckResult check_gradients(Index instances, std::uint64_t seed);

}  // namespace fgmc::cli

#endif  // FGMC_TOOLS_CLI_HPP_
