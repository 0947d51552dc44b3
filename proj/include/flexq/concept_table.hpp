#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "flexq/knowledge_base.hpp"
#include "flexq/query.hpp"
#include "flexq/relation.hpp"
#include "flexq/sampler.hpp"

namespace flexq {

// A validated query resolved against one KB and its source relation.
struct BoundQuery {
  Aggregate aggregate = Aggregate::avg;
  std::vector<std::uint32_t> labels;  // KB label index per predicate
  std::vector<std::string> keys;      // "Attribute-Label" per predicate
  std::span<const double> values;     // target column by KB position; empty for COUNT(*)
};

// Throws SchemaError / TypeError when q does not fit kb, or when kb and rel
// are not aligned row for row.
BoundQuery bind_query(const FlexibleQuery& q, const KnowledgeBase& kb, const Relation& rel);

struct ContextObject {
  RowId id = 0;
  std::size_t position = 0;  // KB position
  std::uint32_t mask = 0;    // bit i: predicate i has a stored degree
  double degree = 0.0;       // min over the stored predicate degrees
  double value = 0.0;        // target value (1 for COUNT(*))
};

// Objects of one batch incident to at least one query label, in batch order.
struct FormalContext {
  std::size_t context_id = 1;
  std::vector<std::string> attributes;
  std::vector<ContextObject> objects;

  std::uint32_t full_mask() const { return attributes.size() >= 32 ? ~0u : (1u << attributes.size()) - 1; }
  bool incident(std::size_t object, std::size_t attribute) const {
    return (objects[object].mask >> attribute) & 1u;
  }
};

FormalContext build_context(const SampleBatch& batch, const KnowledgeBase& kb, const BoundQuery& q);
FormalContext build_context(const SampleBatch& batch, const KnowledgeBase& kb, const Relation& rel,
                            const FlexibleQuery& q);

struct ConceptRef {
  std::size_t context = 0;
  std::size_t level = 0;
  std::size_t node = 0;

  auto operator<=>(const ConceptRef&) const = default;
};

struct ExtentEntry {
  RowId id = 0;
  double degree = 0.0;
  double value = 0.0;

  bool operator==(const ExtentEntry&) const = default;
};

struct ConceptRow {
  std::size_t context_id = 1;
  std::size_t level = 1;  // k - |intent| + 1
  std::size_t node = 1;   // 1-based position within the level
  std::uint32_t intent = 0;
  std::vector<std::string> intent_labels;
  std::vector<ExtentEntry> extent;
  std::vector<ConceptRef> successors;    // lower covers (smaller intent)
  std::vector<ConceptRef> predecessors;  // upper covers (larger intent)

  ConceptRef ref() const { return {context_id, level, node}; }
  std::size_t intent_size() const { return intent_labels.size(); }
  std::size_t extent_size() const { return extent.size(); }
};

// Rows sorted by (level, node). Always has a top row (full intent, possibly
// empty extent) and a bottom row (empty intent, every object); for an empty
// context the two collapse into the single top row.
struct ConceptsTable {
  std::size_t context_id = 1;
  std::vector<std::string> attributes;
  std::vector<ConceptRow> rows;

  std::size_t k() const { return attributes.size(); }
  const ConceptRow& top() const { return rows.front(); }
  const ConceptRow* bottom() const;
  const ConceptRow* find(ConceptRef ref) const;
};

ConceptsTable build_concepts_table(const FormalContext& ctx);

// Every context object once: the bottom row's extent.
std::vector<ExtentEntry> qualifying_tuples(const ConceptsTable& table);

struct SubQuery {
  std::uint32_t intent = 0;
  std::vector<std::string> labels;
  std::size_t extent_size = 0;

  bool operator==(const SubQuery&) const = default;
};

// When the full-intent concept has no objects: the maximal proper
// sub-intents that do, by |intent| then extent size, both descending.
std::vector<SubQuery> diagnose_empty(const ConceptsTable& table);

// Same diagnosis over a multiset of object masks accumulated across
// batches (mask -> object count).
std::vector<SubQuery> diagnose_empty(std::span<const std::string> attributes,
                                     const std::map<std::uint32_t, std::size_t>& mask_counts);

// Tab-delimited dump with columns C#, Niv#, N#, Int#, Ext#, L_s#, L_p#,
// T_i, T_e.
std::string to_text(const ConceptsTable& table);

}  // namespace flexq
