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

#ifndef FGMC_IO_HPP_
#define FGMC_IO_HPP_

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fgmc/common.hpp"

namespace fgmc {

std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_whitespace(std::string_view s);

// Full-token double parse; throws ParseError tagged with `line_no`.
double parse_double(std::string_view token, std::size_t line_no);

// Round-trip decimal form ("%.17g").
std::string format_double(double value);

// Comma-separated rows, every value in round-trip precision.
void write_dense_csv(std::ostream& out, const Matrix& values);

// Dense CSV reader. Empty fields and "nan" (any case) are reported through
// `missing`, with the value stored as 0.
Matrix read_dense_csv(const std::string& path, Mask* missing = nullptr);

// Writes to "<path>.tmp.<pid>" and renames over `path`, so a failed write
// never leaves a partial file. Throws std::runtime_error on I/O failure.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace fgmc

#endif  // FGMC_IO_HPP_
