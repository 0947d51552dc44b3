#pragma once

#include <json.hpp>

#include "flexq/aggregator.hpp"
#include "flexq/knowledge_base.hpp"

namespace flexq {

// Fields: batch, n, m, estimate, error_rate, confidence, fraction, done,
// diagnosis. Undefined numbers and an empty diagnosis encode as null.
nlohmann::json to_json(const ProgressEvent& e);
nlohmann::json to_json(const SubQuery& s);

// {m, labels, ranges} summary of a built KB.
nlohmann::json kb_summary(const KnowledgeBase& kb);

}  // namespace flexq
