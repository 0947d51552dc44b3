#include "flexq/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "flexq/error.hpp"
#include "flexq/kernels.hpp"
#include "flexq/label_catalog.hpp"
#include "flexq/text.hpp"

namespace flexq {

namespace {

void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ParameterError("threshold must be in [0, 1], got " + format_double(threshold));
  }
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::string source, double threshold, std::vector<KbLabel> labels,
                             std::vector<RowId> row_ids, std::vector<std::size_t> offsets,
                             std::vector<KbEntry> entries, std::vector<AttributeRange> ranges,
                             std::vector<std::string> attributes)
    : source_(std::move(source)),
      threshold_(threshold),
      labels_(std::move(labels)),
      row_ids_(std::move(row_ids)),
      offsets_(std::move(offsets)),
      entries_(std::move(entries)),
      ranges_(std::move(ranges)),
      attributes_(std::move(attributes)) {
  check_threshold(threshold_);
  for (const auto& r : ranges_) {
    if (!has_attribute(r.attribute)) attributes_.push_back(r.attribute);
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (iequals(labels_[i].key(), labels_[j].key())) {
        throw SchemaError("duplicate label " + labels_[i].key());
      }
    }
  }
  if (offsets_.size() != row_ids_.size() + 1 || offsets_.front() != 0 ||
      offsets_.back() != entries_.size()) {
    throw SchemaError("row offsets do not match the entry list");
  }
  for (std::size_t r = 0; r < row_ids_.size(); ++r) {
    if (offsets_[r] > offsets_[r + 1]) throw SchemaError("row offsets are not monotone");
    auto row_entries = row(r);
    for (std::size_t i = 0; i < row_entries.size(); ++i) {
      const auto& e = row_entries[i];
      if (e.label >= labels_.size()) {
        throw SchemaError("row " + std::to_string(row_ids_[r]) + " references unknown label");
      }
      if (i > 0 && row_entries[i - 1].label >= e.label) {
        throw SchemaError("row " + std::to_string(row_ids_[r]) + " has unsorted or repeated labels");
      }
      if (!(e.degree > 0.0 && e.degree <= 1.0) || e.degree < threshold_) {
        throw ParameterError("row " + std::to_string(row_ids_[r]) + " stores degree " +
                             format_double(e.degree) + " outside [threshold, 1]");
      }
    }
  }
  for (const auto& r : ranges_) {
    if (!(r.range.min <= r.range.max)) {
      throw ParameterError("range of '" + r.attribute + "' has min > max");
    }
  }
  build_index();
}

KnowledgeBase KnowledgeBase::from_rows(std::string source, double threshold,
                                       std::vector<KbLabel> labels,
                                       std::vector<std::pair<RowId, std::vector<KbEntry>>> rows,
                                       std::vector<AttributeRange> ranges,
                                       std::vector<std::string> attributes) {
  std::vector<RowId> ids;
  std::vector<std::size_t> offsets{0};
  std::vector<KbEntry> entries;
  ids.reserve(rows.size());
  for (auto& [id, row_entries] : rows) {
    std::sort(row_entries.begin(), row_entries.end(),
              [](const KbEntry& x, const KbEntry& y) { return x.label < y.label; });
    ids.push_back(id);
    entries.insert(entries.end(), row_entries.begin(), row_entries.end());
    offsets.push_back(entries.size());
  }
  return KnowledgeBase(std::move(source), threshold, std::move(labels), std::move(ids),
                       std::move(offsets), std::move(entries), std::move(ranges),
                       std::move(attributes));
}

bool KnowledgeBase::has_attribute(std::string_view attribute) const {
  return std::any_of(attributes_.begin(), attributes_.end(),
                     [&](const std::string& a) { return iequals(a, attribute); });
}

void KnowledgeBase::build_index() {
  ids_digest_ = digest_ids(row_ids_);
  position_.clear();
  position_.reserve(row_ids_.size());
  for (std::size_t i = 0; i < row_ids_.size(); ++i) {
    if (!position_.emplace(row_ids_[i], i).second) {
      throw SchemaError("duplicate row id " + std::to_string(row_ids_[i]));
    }
  }
}

std::optional<double> KnowledgeBase::degree(std::size_t position, std::uint32_t label) const {
  for (const auto& e : row(position)) {
    if (e.label == label) return e.degree;
  }
  return std::nullopt;
}

std::optional<std::size_t> KnowledgeBase::position_of(RowId id) const {
  auto it = position_.find(id);
  if (it == position_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> KnowledgeBase::label_index(std::string_view attribute,
                                                        std::string_view name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (iequals(labels_[i].attribute, attribute) && iequals(labels_[i].name, name)) {
      return static_cast<std::uint32_t>(i);
    }
  }
  return std::nullopt;
}

std::optional<ValueRange> KnowledgeBase::range_of(std::string_view attribute) const {
  for (const auto& r : ranges_) {
    if (iequals(r.attribute, attribute)) return r.range;
  }
  return std::nullopt;
}

bool KnowledgeBase::operator==(const KnowledgeBase& other) const {
  return source_ == other.source_ && threshold_ == other.threshold_ && labels_ == other.labels_ &&
         row_ids_ == other.row_ids_ && offsets_ == other.offsets_ && entries_ == other.entries_ &&
         ranges_ == other.ranges_ && attributes_ == other.attributes_;
}

std::vector<AttributeRange> observed_ranges(const Relation& rel) {
  std::vector<AttributeRange> out;
  if (rel.size() == 0) return out;
  for (const auto& col : rel.columns()) {
    if (!col.numeric) continue;
    auto [lo, hi] = std::minmax_element(col.values.begin(), col.values.end());
    out.push_back({col.name, {*lo, *hi}});
  }
  return out;
}

KnowledgeBase build_kb(const Relation& rel, const LabelCatalog& catalog, double threshold,
                       Execution exec) {
  check_threshold(threshold);
  catalog.check_against(rel);
  auto ranges = observed_ranges(rel);

  std::vector<KbLabel> labels;
  std::vector<kernels::LabelColumn> columns;
  for (const auto& label : catalog.labels()) {
    const Column& col = rel.numeric_column(label.attribute);
    std::optional<ValueRange> range;
    for (const auto& r : ranges) {
      if (r.attribute == col.name) range = r.range;
    }
    labels.push_back({col.name, label.name});
    columns.push_back({col.values, label.fn.to_trapezoid(range)});
  }

  auto degrees = exec == Execution::parallel
                     ? kernels::membership_matrix_parallel(columns, rel.size(), threshold)
                     : kernels::membership_matrix_serial(columns, rel.size(), threshold);
  std::vector<std::string> attributes;
  for (const auto& col : rel.columns()) {
    if (col.numeric) attributes.push_back(col.name);
  }
  auto ids = rel.row_ids();
  return KnowledgeBase(rel.name(), threshold, std::move(labels), {ids.begin(), ids.end()},
                       std::move(degrees.offsets), std::move(degrees.entries), std::move(ranges),
                       std::move(attributes));
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr std::string_view kMagic = "#flexq-kb\t1";

}  // namespace

void save_kb(const KnowledgeBase& kb, std::ostream& out) {
  out << kMagic << '\n';
  out << "#source\t" << kb.source() << '\n';
  out << "#threshold\t" << format_double(kb.threshold()) << '\n';
  out << "#m\t" << kb.size() << '\n';
  for (const auto& label : kb.labels()) {
    out << "#label\t" << label.attribute << '\t' << label.name << '\n';
  }
  for (const auto& a : kb.attributes()) out << "#attribute\t" << a << '\n';
  for (const auto& r : kb.ranges()) {
    out << "#range\t" << r.attribute << '\t' << format_double(r.range.min) << '\t'
        << format_double(r.range.max) << '\n';
  }
  std::vector<std::string> keys;
  for (const auto& label : kb.labels()) keys.push_back(label.key());
  for (std::size_t pos = 0; pos < kb.size(); ++pos) {
    out << kb.row_ids()[pos] << '\t';
    bool first = true;
    for (const auto& e : kb.row(pos)) {
      if (!first) out << ';';
      first = false;
      out << keys[e.label] << '=' << format_double(e.degree);
    }
    out << '\n';
  }
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  save_kb(kb, out);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

KnowledgeBase load_kb(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::string source;
  std::optional<double> threshold;
  std::optional<long long> m;
  std::vector<KbLabel> labels;
  std::vector<AttributeRange> ranges;
  std::vector<std::string> attributes;
  std::vector<std::pair<RowId, std::vector<KbEntry>>> rows;
  std::unordered_map<std::string, std::uint32_t> key_index;

  if (!std::getline(in, line) || trim(line) != kMagic) {
    throw ParseError("missing '#flexq-kb' header", 1);
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (line.front() == '#') {
      auto tag = fields[0];
      auto need = [&](std::size_t count) {
        if (fields.size() != count) {
          throw ParseError("expected " + std::to_string(count - 1) + " values", line_no,
                           std::string(tag.substr(1)));
        }
      };
      if (tag == "#source") {
        need(2);
        source = std::string(fields[1]);
      } else if (tag == "#threshold") {
        need(2);
        threshold = parse_double(fields[1]);
        if (!threshold) throw ParseError("threshold is not a number", line_no, "threshold");
      } else if (tag == "#m") {
        need(2);
        m = parse_int(fields[1]);
        if (!m || *m < 0) throw ParseError("m is not a non-negative integer", line_no, "m");
      } else if (tag == "#label") {
        need(3);
        KbLabel label{std::string(fields[1]), std::string(fields[2])};
        if (!key_index.emplace(label.key(), labels.size()).second) {
          throw ParseError("duplicate label " + label.key(), line_no, "label");
        }
        labels.push_back(std::move(label));
      } else if (tag == "#attribute") {
        need(2);
        attributes.emplace_back(fields[1]);
      } else if (tag == "#range") {
        need(4);
        auto lo = parse_double(fields[2]);
        auto hi = parse_double(fields[3]);
        if (!lo || !hi) throw ParseError("range bound is not a number", line_no, "range");
        ranges.push_back({std::string(fields[1]), {*lo, *hi}});
      } else {
        throw ParseError("unknown header '" + std::string(tag) + "'", line_no);
      }
      continue;
    }
    if (fields.size() != 2) throw ParseError("expected 'row_id<TAB>degrees'", line_no);
    auto id = parse_int(fields[0]);
    if (!id) throw ParseError("row id is not an integer", line_no, "row_id");
    std::vector<KbEntry> entries;
    if (!fields[1].empty()) {
      for (auto cell : split(fields[1], ';')) {
        auto eq = cell.rfind('=');
        if (eq == std::string_view::npos) throw ParseError("expected label=degree", line_no, std::string(cell));
        auto key = std::string(cell.substr(0, eq));
        auto it = key_index.find(key);
        if (it == key_index.end()) throw ParseError("unknown label", line_no, key);
        auto g = parse_double(cell.substr(eq + 1));
        if (!g) throw ParseError("degree is not a number", line_no, key);
        if (!(*g > 0.0 && *g <= 1.0)) throw ParseError("degree outside (0, 1]", line_no, key);
        entries.push_back({it->second, *g});
      }
    }
    rows.emplace_back(*id, std::move(entries));
  }
  if (!threshold) throw ParseError("missing #threshold header", line_no);
  if (!m) throw ParseError("missing #m header", line_no);
  if (static_cast<std::size_t>(*m) != rows.size()) {
    throw ParseError("header says m = " + std::to_string(*m) + " but file has " +
                         std::to_string(rows.size()) + " rows",
                     line_no, "m");
  }
  try {
    return KnowledgeBase::from_rows(std::move(source), *threshold, std::move(labels),
                                    std::move(rows), std::move(ranges), std::move(attributes));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), line_no);
  }
}

KnowledgeBase load_kb(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  return load_kb(in);
}

}  // namespace flexq
