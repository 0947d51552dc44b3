#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "flexq/membership.hpp"

namespace flexq {

class Relation;

// Expert-defined linguistic labels. (attribute, name) is unique, compared
// case-insensitively.
//
// Text format, one label per line, '#' starts a comment:
//
//   # attribute  label   shape      parameters
//   Age          Young   trapezoid  0 0 25 35
//   Salary       High    L          600 750
class LabelCatalog {
 public:
  LabelCatalog() = default;
  explicit LabelCatalog(std::vector<LinguisticLabel> labels);

  const std::vector<LinguisticLabel>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  // Throws SchemaError on a duplicate (attribute, name).
  void add(LinguisticLabel label);
  const LinguisticLabel* find(std::string_view attribute, std::string_view name) const;

  // Every label's attribute must exist in rel (SchemaError) and be numeric
  // (TypeError).
  void check_against(const Relation& rel) const;

  bool operator==(const LabelCatalog&) const = default;

 private:
  std::vector<LinguisticLabel> labels_;
};

// Throws ParseError naming the line and offending field.
LabelCatalog parse_catalog(std::string_view text);
LabelCatalog read_catalog_file(const std::filesystem::path& path);
std::string format_catalog(const LabelCatalog& catalog);

}  // namespace flexq
