#include "flexq/concept_table.hpp"

#include <algorithm>
#include <bit>
#include <map>

#include "flexq/error.hpp"
#include "flexq/kernels.hpp"
#include "flexq/text.hpp"

namespace flexq {

BoundQuery bind_query(const FlexibleQuery& q, const KnowledgeBase& kb, const Relation& rel) {
  if (q.predicates.empty()) throw SchemaError("query has no predicates");
  if (q.predicates.size() > kMaxPredicates) {
    throw SchemaError("at most " + std::to_string(kMaxPredicates) + " predicates are supported");
  }
  if (kb.size() != rel.size() || kb.ids_digest() != rel.ids_digest()) {
    throw SchemaError("knowledge base is not aligned with relation '" + rel.name() + "'; rebuild it");
  }
  BoundQuery b;
  b.aggregate = q.aggregate;
  for (const auto& p : q.predicates) {
    auto idx = kb.label_index(p.attribute, p.label);
    if (!idx) throw SchemaError("unknown label " + p.attribute + "-" + p.label);
    b.labels.push_back(*idx);
    b.keys.push_back(kb.labels()[*idx].key());
  }
  if (q.target) {
    b.values = rel.numeric_column(*q.target).values;
  } else if (q.aggregate != Aggregate::count) {
    throw SchemaError(std::string(to_string(q.aggregate)) + " needs a target attribute");
  }
  return b;
}

FormalContext build_context(const SampleBatch& batch, const KnowledgeBase& kb, const BoundQuery& q) {
  FormalContext ctx;
  ctx.context_id = batch.index;
  ctx.attributes = q.keys;
  ctx.objects.reserve(batch.ids.size());
  const bool have_positions = batch.positions.size() == batch.ids.size();
  for (std::size_t i = 0; i < batch.ids.size(); ++i) {
    std::size_t pos = 0;
    if (have_positions) {
      pos = batch.positions[i];
    } else {
      auto found = kb.position_of(batch.ids[i]);
      if (!found) throw SchemaError("row " + std::to_string(batch.ids[i]) + " is not in the knowledge base");
      pos = *found;
    }
    std::uint32_t mask = 0;
    double degree = kernels::query_degree(kb.row(pos), q.labels, &mask);
    if (mask == 0) continue;
    ctx.objects.push_back({batch.ids[i], pos, mask, degree, q.values.empty() ? 1.0 : q.values[pos]});
  }
  return ctx;
}

FormalContext build_context(const SampleBatch& batch, const KnowledgeBase& kb, const Relation& rel,
                            const FlexibleQuery& q) {
  return build_context(batch, kb, bind_query(q, kb, rel));
}

namespace {

// Same-level tie-break: the intent holding the earlier predicate first.
bool intent_before(std::uint32_t x, std::uint32_t y) {
  std::uint32_t diff = x ^ y;
  return diff != 0 && (x & (diff & (~diff + 1))) != 0;
}

std::vector<std::string> labels_of(std::uint32_t intent, std::span<const std::string> attributes) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(std::popcount(intent)));
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if ((intent >> i) & 1u) out.push_back(attributes[i]);
  }
  return out;
}

bool strict_subset(std::uint32_t sub, std::uint32_t super) { return sub != super && (sub & super) == sub; }

// Intersection closure of the given masks together with `full`.
std::vector<std::uint32_t> closed_intents(std::span<const std::uint32_t> masks, std::uint32_t full) {
  std::vector<std::uint32_t> closed;
  closed.reserve(8);
  closed.push_back(full);
  for (std::uint32_t m : masks) {
    std::size_t n = closed.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t meet = closed[i] & m;
      if (std::find(closed.begin(), closed.end(), meet) == closed.end()) closed.push_back(meet);
    }
  }
  return closed;
}

// Distinct object masks with their multiplicities. Usually only a few, so a
// linear scan; falls back to sorting when there are many.
std::pair<std::vector<std::uint32_t>, std::vector<std::size_t>> mask_histogram(
    std::span<const ContextObject> objects) {
  constexpr std::size_t kLinearLimit = 32;
  std::vector<std::uint32_t> masks;
  std::vector<std::size_t> counts;
  masks.reserve(8);
  counts.reserve(8);
  for (const auto& o : objects) {
    auto it = std::find(masks.begin(), masks.end(), o.mask);
    if (it != masks.end()) {
      ++counts[static_cast<std::size_t>(it - masks.begin())];
      continue;
    }
    if (masks.size() == kLinearLimit) {
      std::map<std::uint32_t, std::size_t> sorted;
      for (const auto& x : objects) ++sorted[x.mask];
      masks.clear();
      counts.clear();
      for (const auto& [mask, count] : sorted) {
        masks.push_back(mask);
        counts.push_back(count);
      }
      break;
    }
    masks.push_back(o.mask);
    counts.push_back(1);
  }
  return {std::move(masks), std::move(counts)};
}

}  // namespace

ConceptsTable build_concepts_table(const FormalContext& ctx) {
  const std::size_t k = ctx.attributes.size();
  if (k == 0 || k > kMaxPredicates) {
    throw ParameterError("concepts table needs 1.." + std::to_string(kMaxPredicates) + " attributes");
  }
  const std::uint32_t full = ctx.full_mask();

  auto [masks, counts] = mask_histogram(ctx.objects);

  std::vector<std::uint32_t> intents = closed_intents(masks, full);
  if (!ctx.objects.empty() && std::find(intents.begin(), intents.end(), 0u) == intents.end()) {
    intents.push_back(0u);
  }

  // Order by level, then extent size descending, then predicate order;
  // extent sizes come from the histogram, so rows are built in place.
  struct Slot {
    std::uint32_t intent;
    std::size_t level, size;
    ExtentEntry* cursor = nullptr;
  };
  std::vector<Slot> order;
  order.reserve(intents.size());
  for (std::uint32_t intent : intents) {
    std::size_t size = 0;
    for (std::size_t i = 0; i < masks.size(); ++i) size += (masks[i] & intent) == intent ? counts[i] : 0;
    order.push_back({intent, k - static_cast<std::size_t>(std::popcount(intent)) + 1, size});
  }
  std::sort(order.begin(), order.end(), [](const Slot& x, const Slot& y) {
    if (x.level != y.level) return x.level < y.level;
    if (x.size != y.size) return x.size > y.size;
    return intent_before(x.intent, y.intent);
  });

  ConceptsTable table;
  table.context_id = ctx.context_id;
  table.attributes = ctx.attributes;
  table.rows.resize(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    ConceptRow& row = table.rows[r];
    row.context_id = ctx.context_id;
    row.intent = order[r].intent;
    row.intent_labels = labels_of(row.intent, ctx.attributes);
    row.level = order[r].level;
    row.node = (r > 0 && order[r - 1].level == row.level) ? table.rows[r - 1].node + 1 : 1;
    row.extent.resize(order[r].size);
  }
  // Sizes are exact, so fill through per-row cursors.
  for (std::size_t r = 0; r < order.size(); ++r) order[r].cursor = table.rows[r].extent.data();
  for (const auto& o : ctx.objects) {
    for (auto& slot : order) {
      if ((o.mask & slot.intent) == slot.intent) *slot.cursor++ = {o.id, o.degree, o.value};
    }
  }

  // Lower covers of X: candidates Y < X taken by decreasing |Y|; Y covers
  // unless it lies below a cover already accepted.
  std::vector<std::uint32_t> covers;
  covers.reserve(8);
  for (auto& row : table.rows) {
    row.successors.reserve(4);
    row.predecessors.reserve(4);
  }
  for (auto& upper : table.rows) {
    covers.clear();
    for (auto& lower : table.rows) {
      if (!strict_subset(lower.intent, upper.intent)) continue;
      bool blocked = std::any_of(covers.begin(), covers.end(),
                                 [&](std::uint32_t c) { return strict_subset(lower.intent, c); });
      if (blocked) continue;
      covers.push_back(lower.intent);
      upper.successors.push_back(lower.ref());
      lower.predecessors.push_back(upper.ref());
    }
  }
  for (auto& row : table.rows) {
    std::sort(row.successors.begin(), row.successors.end());
    std::sort(row.predecessors.begin(), row.predecessors.end());
  }
  return table;
}

const ConceptRow* ConceptsTable::bottom() const {
  for (const auto& row : rows) {
    if (row.intent == 0) return &row;
  }
  return nullptr;
}

const ConceptRow* ConceptsTable::find(ConceptRef ref) const {
  for (const auto& row : rows) {
    if (row.ref() == ref) return &row;
  }
  return nullptr;
}

std::vector<ExtentEntry> qualifying_tuples(const ConceptsTable& table) {
  const ConceptRow* bottom = table.bottom();
  return bottom == nullptr ? std::vector<ExtentEntry>{} : bottom->extent;
}

namespace {

std::vector<SubQuery> maximal_subqueries(std::vector<SubQuery> candidates) {
  std::vector<SubQuery> out;
  for (const auto& c : candidates) {
    bool dominated = std::any_of(candidates.begin(), candidates.end(),
                                 [&](const SubQuery& o) { return strict_subset(c.intent, o.intent); });
    if (!dominated) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const SubQuery& x, const SubQuery& y) {
    if (x.labels.size() != y.labels.size()) return x.labels.size() > y.labels.size();
    if (x.extent_size != y.extent_size) return x.extent_size > y.extent_size;
    return intent_before(x.intent, y.intent);
  });
  return out;
}

}  // namespace

std::vector<SubQuery> diagnose_empty(const ConceptsTable& table) {
  if (table.rows.empty() || !table.top().extent.empty()) return {};
  const std::uint32_t full = table.top().intent;
  std::vector<SubQuery> candidates;
  for (const auto& row : table.rows) {
    if (row.intent == full || row.intent == 0 || row.extent.empty()) continue;
    candidates.push_back({row.intent, row.intent_labels, row.extent.size()});
  }
  return maximal_subqueries(std::move(candidates));
}

std::vector<SubQuery> diagnose_empty(std::span<const std::string> attributes,
                                     const std::map<std::uint32_t, std::size_t>& mask_counts) {
  const std::uint32_t full = attributes.size() >= 32 ? ~0u : (1u << attributes.size()) - 1;
  if (auto it = mask_counts.find(full); it != mask_counts.end() && it->second > 0) return {};
  std::vector<std::uint32_t> masks;
  for (const auto& [mask, count] : mask_counts) {
    if (count == 0 || mask == 0) continue;
    if (mask == full) return {};
    masks.push_back(mask);
  }
  std::vector<SubQuery> candidates;
  for (std::uint32_t intent : closed_intents(masks, full)) {
    if (intent == full || intent == 0) continue;
    std::size_t extent = 0;
    for (const auto& [mask, count] : mask_counts) {
      if ((mask & intent) == intent) extent += count;
    }
    candidates.push_back({intent, labels_of(intent, attributes), extent});
  }
  return maximal_subqueries(std::move(candidates));
}

namespace {

std::string refs_text(const std::vector<ConceptRef>& refs) {
  if (refs.empty()) return "0";
  std::string out;
  for (const auto& r : refs) {
    if (!out.empty()) out += ' ';
    out += "(" + std::to_string(r.context) + "," + std::to_string(r.level) + "," + std::to_string(r.node) + ")";
  }
  return out;
}

}  // namespace

std::string to_text(const ConceptsTable& table) {
  std::string out = "C#\tNiv#\tN#\tInt#\tExt#\tL_s#\tL_p#\tT_i\tT_e\n";
  for (const auto& row : table.rows) {
    std::string intent;
    for (const auto& l : row.intent_labels) intent += (intent.empty() ? "" : " ") + l;
    std::string extent;
    for (const auto& e : row.extent) {
      if (!extent.empty()) extent += ' ';
      extent += std::to_string(e.id) + "(" + format_double(e.degree) + ";" + format_double(e.value) + ")";
    }
    out += std::to_string(row.context_id) + "\t" + std::to_string(row.level) + "\t" +
           std::to_string(row.node) + "\t" + (intent.empty() ? "∅" : intent) + "\t" +
           (extent.empty() ? "∅" : extent) + "\t" + refs_text(row.successors) + "\t" +
           refs_text(row.predecessors) + "\t" + std::to_string(row.intent_size()) + "\t" +
           std::to_string(row.extent_size()) + "\n";
  }
  return out;
}

}  // namespace flexq
