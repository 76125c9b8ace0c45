#pragma once

#include <string>

#include "json.hpp"
#include "pwe/eval.hpp"

namespace pwe {

/// One JSON object per dataset. Only the fields meaningful for the report's
/// kind are present.
inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["dataset"] = r.dataset;
  j["total"] = r.total;
  switch (r.kind) {
    case EvalReport::Kind::analogy:
      j["task"] = "analogy";
      j["skipped_oov"] = r.skipped_oov;
      j["attempted"] = r.attempted;
      j["correct"] = r.correct;
      j["accuracy"] = r.accuracy;
      break;
    case EvalReport::Kind::similarity:
      j["task"] = "similarity";
      j["skipped_oov"] = r.skipped_oov;
      j["attempted"] = r.attempted;
      j["spearman_x100"] = r.spearman_x100;
      break;
    case EvalReport::Kind::purity:
      j["task"] = "purity";
      j["attempted"] = r.attempted;
      j["purity_pct"] = r.purity_pct;
      break;
  }
  return j;
}

}  // namespace pwe
