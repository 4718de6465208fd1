#include "sparse_lsq/report.hpp"

namespace sparse_lsq {

using nlohmann::json;

void to_json(json& j, const ProofTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"label", s.label}, {"value", s.value}, {"asserted", s.asserted}});
  }
  j = {{"name", t.name}, {"steps", std::move(steps)}, {"dominance_holds", t.dominance_holds()}};
}

void from_json(const json& j, ProofTrace& t) {
  t.name = j.at("name").get<std::string>();
  t.steps.clear();
  for (const auto& s : j.at("steps")) {
    t.steps.push_back({s.at("label").get<std::string>(), s.at("value").get<double>(),
                       s.at("asserted").get<bool>()});
  }
}

void to_json(json& j, const BoundReport& r) {
  j = {{"name", r.name},         {"lhs", r.lhs},
       {"rhs", r.rhs},           {"margin", r.margin},
       {"holds", r.holds},       {"status", to_string(r.status)},
       {"passed", r.passed()},   {"terms", r.terms},
       {"context", r.context},   {"traces", r.traces},
       {"details", r.details}};
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  if (!r.note.empty()) j["note"] = r.note;
}

void from_json(const json& j, BoundReport& r) {
  r.name = j.at("name").get<std::string>();
  r.lhs = j.at("lhs").get<double>();
  r.rhs = j.at("rhs").get<double>();
  r.margin = j.at("margin").get<double>();
  r.holds = j.at("holds").get<bool>();
  r.status = bound_status_from_string(j.at("status").get<std::string>());
  r.terms = j.at("terms").get<std::map<std::string, double>>();
  r.context = j.at("context").get<std::map<std::string, double>>();
  r.traces = j.at("traces").get<std::vector<ProofTrace>>();
  r.details = j.at("details").get<std::vector<BoundReport>>();
  r.seed.reset();
  if (j.contains("seed") && !j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
  r.note = j.value("note", std::string{});
}

void to_json(json& j, const RunReport& r) {
  j = {{"schema_version", r.schema_version},
       {"config", r.config},
       {"problem", {{"m", r.m}, {"n", r.n}, {"rank", r.rank}}},
       {"residuals",
        {{"minimum_norm", r.baseline_residual},
         {"truncated_svd", r.truncated_residual},
         {"sparse", r.sparse_residual}}},
       {"solution",
        {{"nonzero_count", r.nonzero_count},
         {"budget_r", r.budget_r},
         {"support", r.support},
         {"values", r.values}}},
       {"reports", r.reports},
       {"timings_ms", r.timings_ms},
       {"ok", r.ok}};
}

void from_json(const json& j, RunReport& r) {
  r.schema_version = j.at("schema_version").get<std::string>();
  r.config = j.at("config");
  const auto& p = j.at("problem");
  r.m = p.at("m").get<Index>();
  r.n = p.at("n").get<Index>();
  r.rank = p.at("rank").get<Index>();
  const auto& res = j.at("residuals");
  r.baseline_residual = res.at("minimum_norm").get<double>();
  r.truncated_residual = res.at("truncated_svd").get<double>();
  r.sparse_residual = res.at("sparse").get<double>();
  const auto& s = j.at("solution");
  r.nonzero_count = s.at("nonzero_count").get<Index>();
  r.budget_r = s.at("budget_r").get<Index>();
  r.support = s.at("support").get<std::vector<Index>>();
  r.values = s.at("values").get<std::vector<double>>();
  r.reports = j.at("reports").get<std::vector<BoundReport>>();
  r.timings_ms = j.at("timings_ms").get<std::map<std::string, double>>();
  r.ok = j.at("ok").get<bool>();
}

std::string emit(const RunReport& report) {
  return json(report).dump(2) + "\n";
}

RunReport parse_report(const std::string& text) {
  return json::parse(text).get<RunReport>();
}

}  // namespace sparse_lsq
