#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flexq/membership.hpp"
#include "flexq/relation.hpp"

namespace flexq {

class LabelCatalog;

// One stored membership degree of a row. Degrees below the threshold (and
// zeros) are never stored.
struct KbEntry {
  std::uint32_t label = 0;
  double degree = 0.0;

  bool operator==(const KbEntry&) const = default;
};

struct KbLabel {
  std::string attribute;
  std::string name;

  std::string key() const { return attribute + "-" + name; }
  bool operator==(const KbLabel&) const = default;
};

struct AttributeRange {
  std::string attribute;
  ValueRange range;

  bool operator==(const AttributeRange&) const = default;
};

enum class Execution { serial, parallel };

// Sparse per-row membership degrees of every relaxing attribute, aligned
// with the source relation: position i of the KB is row i of the relation.
// Immutable after construction.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  // Compressed-row layout: entries of row i are
  // entries[offsets[i] .. offsets[i+1]), sorted by label index. Throws
  // SchemaError / ParameterError if any invariant is violated.
  KnowledgeBase(std::string source, double threshold, std::vector<KbLabel> labels,
                std::vector<RowId> row_ids, std::vector<std::size_t> offsets,
                std::vector<KbEntry> entries, std::vector<AttributeRange> ranges,
                std::vector<std::string> attributes = {});

  // Row-wise convenience constructor; each row's entries may be unsorted.
  static KnowledgeBase from_rows(std::string source, double threshold, std::vector<KbLabel> labels,
                                 std::vector<std::pair<RowId, std::vector<KbEntry>>> rows,
                                 std::vector<AttributeRange> ranges,
                                 std::vector<std::string> attributes = {});

  const std::string& source() const { return source_; }
  double threshold() const { return threshold_; }
  std::size_t size() const { return row_ids_.size(); }
  const std::vector<KbLabel>& labels() const { return labels_; }
  std::span<const RowId> row_ids() const { return row_ids_; }
  std::uint64_t ids_digest() const { return ids_digest_; }
  const std::vector<AttributeRange>& ranges() const { return ranges_; }
  // Numeric attributes of the source relation; a superset of the ranged
  // ones, so that an empty source still knows its schema.
  const std::vector<std::string>& attributes() const { return attributes_; }
  bool has_attribute(std::string_view attribute) const;
  std::size_t stored_degrees() const { return entries_.size(); }

  std::span<const KbEntry> row(std::size_t position) const {
    return {entries_.data() + offsets_[position], entries_.data() + offsets_[position + 1]};
  }
  std::optional<double> degree(std::size_t position, std::uint32_t label) const;
  std::optional<std::size_t> position_of(RowId id) const;

  // Case-insensitive on both parts.
  std::optional<std::uint32_t> label_index(std::string_view attribute,
                                           std::string_view name) const;
  std::optional<ValueRange> range_of(std::string_view attribute) const;

  bool operator==(const KnowledgeBase& other) const;

 private:
  void build_index();

  std::string source_;
  double threshold_ = 0.0;
  std::vector<KbLabel> labels_;
  std::vector<RowId> row_ids_;
  std::uint64_t ids_digest_ = digest_ids({});
  std::vector<std::size_t> offsets_{0};
  std::vector<KbEntry> entries_;
  std::vector<AttributeRange> ranges_;
  std::vector<std::string> attributes_;
  std::unordered_map<RowId, std::size_t> position_;
};

// Observed (min, max) of every numeric column; empty for an empty relation.
std::vector<AttributeRange> observed_ranges(const Relation& rel);

// Evaluates every label on every row and keeps degrees >= threshold
// (degree 0 is never kept). Throws ParameterError for a threshold outside
// [0, 1], SchemaError / TypeError for labels on missing or non-numeric
// attributes.
KnowledgeBase build_kb(const Relation& rel, const LabelCatalog& catalog, double threshold,
                       Execution exec = Execution::parallel);

// Line-delimited text: '#'-prefixed header lines (source, threshold, m,
// labels, ranges), then one `row_id<TAB>key=degree;key=degree` line per row.
void save_kb(const KnowledgeBase& kb, std::ostream& out);
void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path);
// Throws ParseError with line and field context.
KnowledgeBase load_kb(std::istream& in);
KnowledgeBase load_kb(const std::filesystem::path& path);

}  // namespace flexq
