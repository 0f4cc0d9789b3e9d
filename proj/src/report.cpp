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

#include <charconv>
#include <sstream>

#include "fgmc/experiments.hpp"
#include "fgmc/io.hpp"

namespace fgmc {

namespace {

constexpr const char* kCsvHeader =
    "protocol,param,method,seed,train_rmse,test_rmse,iters,seconds";

template <typename T>
T parse_integer(std::string_view token, std::size_t line_no) {
  token = trim(token);
  T value{};
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("expected an integer, got '" + std::string(token) + "'",
                     line_no);
  }
  return value;
}

nlohmann::json record_json(const Record& r) {
  return {{"protocol", r.protocol},     {"param", r.param},
          {"method", to_string(r.method)}, {"seed", r.seed},
          {"train_rmse", r.train_rmse}, {"test_rmse", r.test_rmse},
          {"iters", r.iters},           {"seconds", r.seconds}};
}

Record record_from_json(const nlohmann::json& j) {
  Record r;
  r.protocol = j.at("protocol").get<std::string>();
  r.param = j.at("param").get<double>();
  r.method = parse_method(j.at("method").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.train_rmse = j.at("train_rmse").get<double>();
  r.test_rmse = j.at("test_rmse").get<double>();
  r.iters = j.at("iters").get<Index>();
  r.seconds = j.at("seconds").get<double>();
  return r;
}

ExperimentReport read_csv_report(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  ExperimentReport report;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (!header) {
      if (trim(line) != kCsvHeader) throw ParseError("unexpected CSV header", line_no);
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 8) throw ParseError("expected 8 fields", line_no);
    Record r;
    r.protocol = std::string(trim(f[0]));
    r.param = parse_double(f[1], line_no);
    try {
      r.method = parse_method(std::string(trim(f[2])));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
    r.seed = parse_integer<std::uint64_t>(f[3], line_no);
    r.train_rmse = parse_double(f[4], line_no);
    r.test_rmse = parse_double(f[5], line_no);
    r.iters = parse_integer<Index>(f[6], line_no);
    r.seconds = parse_double(f[7], line_no);
    report.records.push_back(std::move(r));
  }
  if (!header) throw ParseError("missing CSV header");
  if (!report.records.empty()) report.protocol = report.records.front().protocol;
  return report;
}

}  // namespace

ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  throw ValidationError("unknown report format '" + text + "'");
}

ReportFormat report_format_for(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".json") {
    return ReportFormat::kJson;
  }
  return ReportFormat::kCsv;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const Record& r : report.records) {
    out << r.protocol << ',' << format_double(r.param) << ',' << to_string(r.method)
        << ',' << r.seed << ',' << format_double(r.train_rmse) << ','
        << format_double(r.test_rmse) << ',' << r.iters << ','
        << format_double(r.seconds) << '\n';
  }
  return out.str();
}

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const Record& r : report.records) records.push_back(record_json(r));
  const nlohmann::json j = {{"protocol", report.protocol},
                            {"config", report.config},
                            {"reference", report.reference},
                            {"records", records}};
  return j.dump(2) + "\n";
}

void emit_report(const ExperimentReport& report, const std::string& path,
                 ReportFormat format) {
  write_file_atomic(path, format == ReportFormat::kCsv ? report_to_csv(report)
                                                       : report_to_json(report));
}

ExperimentReport read_report(const std::string& path, ReportFormat format) {
  if (format == ReportFormat::kCsv) return read_csv_report(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON report: ") + e.what());
  }
  ExperimentReport report;
  report.protocol = j.at("protocol").get<std::string>();
  report.config = j.value("config", nlohmann::json::object());
  report.reference = j.value("reference", nlohmann::json::object());
  for (const auto& r : j.at("records")) report.records.push_back(record_from_json(r));
  return report;
}

}  // namespace fgmc
