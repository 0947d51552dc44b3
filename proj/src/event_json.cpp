#include "flexq/event_json.hpp"

namespace flexq {

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const SubQuery& s) {
  return {{"intent", s.labels}, {"extent", s.extent_size}};
}

nlohmann::json to_json(const ProgressEvent& e) {
  nlohmann::json diagnosis = nullptr;
  if (!e.diagnosis.empty()) {
    diagnosis = nlohmann::json::array();
    for (const auto& s : e.diagnosis) diagnosis.push_back(to_json(s));
  }
  return {{"batch", e.batch},
          {"n", e.n},
          {"m", e.m},
          {"estimate", optional_number(e.estimate)},
          {"error_rate", optional_number(e.error_rate)},
          {"confidence", e.confidence},
          {"fraction", e.fraction},
          {"done", e.done},
          {"diagnosis", diagnosis}};
}

nlohmann::json kb_summary(const KnowledgeBase& kb) {
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& l : kb.labels()) labels.push_back(l.key());
  nlohmann::json ranges = nlohmann::json::object();
  for (const auto& r : kb.ranges()) ranges[r.attribute] = {r.range.min, r.range.max};
  return {{"source", kb.source()},
          {"m", kb.size()},
          {"threshold", kb.threshold()},
          {"labels", labels},
          {"stored_degrees", kb.stored_degrees()},
          {"ranges", ranges}};
}

}  // namespace flexq
