// Copyright 2026 The Ecoscape Authors.
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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecoscape/config.hpp"
#include "ecoscape/slo.hpp"

namespace ecoscape {

/// SLO definitions for standalone scoring: either a bare {"slos": [...]}
/// document or a full scenario, whose phases then bound the scoring window.
struct SloDocument {
  std::vector<SloSpec> slos;
  std::optional<PhasePlan> phases;
};

inline SloDocument parse_slo_document(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("$", std::string("not valid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("system")) {
    ScenarioConfig cfg = parse_scenario(text);
    return SloDocument{cfg.slos, cfg.phases};
  }
  detail::ObjReader r(j, "$");
  SloDocument doc;
  const ojson& arr = detail::as_array(r.require("slos"), "slos");
  for (std::size_t i = 0; i < arr.size(); ++i)
    doc.slos.push_back(detail::parse_slo(arr[i], "slos[" + std::to_string(i) + "]"));
  r.finish();

  double weight_sum = 0.0;
  std::set<std::string> names;
  for (std::size_t i = 0; i < doc.slos.size(); ++i) {
    const SloSpec& s = doc.slos[i];
    std::string p = "slos[" + std::to_string(i) + "]";
    if (!names.insert(s.name).second) throw ConfigError(p + ".name", "duplicate SLO '" + s.name + "'");
    if (s.threshold <= 0) throw ConfigError(p + ".threshold", "must be positive");
    if (s.weight < 0 || s.weight > 1) throw ConfigError(p + ".weight", "must be in [0, 1]");
    weight_sum += s.weight;
  }
  if (doc.slos.empty()) throw ConfigError("slos", "must define at least one SLO");
  if (std::abs(weight_sum - 1.0) > 1e-9)
    throw ConfigError("slos.weight", "weights must sum to 1");
  return doc;
}

struct ExternalScore {
  std::vector<SloScore> scores;
  double v_total = 0.0;
  std::size_t rows_used = 0;
};

/// Scores an SLI CSV against SLO definitions with the same code path the
/// simulator uses internally, so a round trip through the export format
/// reproduces a run's V_total exactly. The window is (from_ms, to_ms].
inline ExternalScore score_rows(const std::vector<SliCsvRow>& rows,
                                const std::vector<SloSpec>& slos,
                                std::optional<double> from_ms, std::optional<double> to_ms) {
  ExternalScore result;
  std::vector<double> v_hats;
  std::vector<double> weights;
  for (const SloSpec& slo : slos) {
    std::vector<double> values;
    double last_t = -1.0;
    for (const SliCsvRow& row : rows) {
      if (row.name != slo.name) continue;
      if (from_ms && row.t_ms <= *from_ms) continue;
      if (to_ms && row.t_ms > *to_ms) continue;
      if (row.t_ms <= last_t)
        throw ConfigError("sli_csv", "timestamps for '" + slo.name + "' are not strictly increasing");
      last_t = row.t_ms;
      values.push_back(row.value);
    }
    result.rows_used += values.size();
    result.scores.push_back(violation_score(values, slo.threshold, slo.name));
    v_hats.push_back(result.scores.back().v_hat);
    weights.push_back(slo.weight);
  }
  result.v_total = total_score(v_hats, weights);
  return result;
}

}  // namespace ecoscape
