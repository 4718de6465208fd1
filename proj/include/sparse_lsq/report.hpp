#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparse_lsq/bounds.hpp"

namespace sparse_lsq {

inline constexpr const char* kSchemaVersion = "1";

// Everything the CLI writes for one run. Only `timings_ms` varies between
// two executions of the same RunSpec.
struct RunReport {
  std::string schema_version = kSchemaVersion;
  nlohmann::json config = nlohmann::json::object();
  Index m = 0;
  Index n = 0;
  Index rank = 0;
  double baseline_residual = 0.0;   // ||A x* - b||
  double truncated_residual = 0.0;  // ||A x_k* - b||
  double sparse_residual = 0.0;     // ||A x_r - b||
  Index nonzero_count = 0;
  Index budget_r = 0;
  std::vector<Index> support;
  std::vector<double> values;
  std::vector<BoundReport> reports;
  std::map<std::string, double> timings_ms;
  bool ok = true;

  bool operator==(const RunReport&) const = default;
};

void to_json(nlohmann::json& j, const ProofTrace& t);
void from_json(const nlohmann::json& j, ProofTrace& t);
void to_json(nlohmann::json& j, const BoundReport& r);
void from_json(const nlohmann::json& j, BoundReport& r);
void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

// Pretty-printed UTF-8 JSON with a trailing newline.
std::string emit(const RunReport& report);
RunReport parse_report(const std::string& text);

}  // namespace sparse_lsq
