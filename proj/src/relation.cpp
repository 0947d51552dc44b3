#include "flexq/relation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "flexq/error.hpp"
#include "flexq/text.hpp"

namespace flexq {

std::uint64_t digest_ids(std::span<const RowId> ids) {
  // splitmix64 finaliser over a running state.
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ ids.size();
  for (RowId id : ids) {
    std::uint64_t z = h + 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(id);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    h = z ^ (z >> 31);
  }
  return h;
}

Relation::Relation(std::string name, std::vector<RowId> ids, std::vector<Column> columns)
    : name_(std::move(name)), ids_(std::move(ids)), columns_(std::move(columns)) {
  ids_digest_ = digest_ids(ids_);
  position_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!position_.emplace(ids_[i], i).second) {
      throw SchemaError("duplicate row id " + std::to_string(ids_[i]));
    }
  }
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].values.size() != ids_.size()) {
      throw SchemaError("column '" + columns_[i].name + "' has " +
                        std::to_string(columns_[i].values.size()) + " values for " +
                        std::to_string(ids_.size()) + " rows");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (iequals(columns_[i].name, columns_[j].name)) {
        throw SchemaError("duplicate column '" + columns_[i].name + "'");
      }
    }
  }
}

const Column* Relation::find_column(std::string_view name) const {
  for (const auto& col : columns_) {
    if (iequals(col.name, name)) return &col;
  }
  return nullptr;
}

const Column& Relation::numeric_column(std::string_view name) const {
  const Column* col = find_column(name);
  if (col == nullptr) {
    throw SchemaError("table '" + name_ + "' has no attribute '" + std::string(name) + "'");
  }
  if (!col->numeric) throw TypeError("attribute '" + col->name + "' is not numeric");
  return *col;
}

std::optional<std::size_t> Relation::position_of(RowId id) const {
  auto it = position_.find(id);
  if (it == position_.end()) return std::nullopt;
  return it->second;
}

namespace {

// Splits one CSV record, honouring double-quoted fields with "" escapes.
// Quoted fields may not span lines.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"' && cur.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else if (ch == ',') {
      fields.push_back(field_was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      field_was_quoted = false;
    } else {
      cur += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(field_was_quoted ? cur : std::string(trim(cur)));
  return fields;
}

}  // namespace

Relation read_csv(std::istream& in, std::string table, std::optional<std::string> id_column) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    header = split_record(line, line_no);
    break;
  }
  if (header.empty()) throw ParseError("empty CSV input, expected a header row", line_no + 1);

  std::size_t id_index = 0;
  if (id_column) {
    bool found = false;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (iequals(header[i], *id_column)) {
        id_index = i;
        found = true;
      }
    }
    if (!found) throw ParseError("no id column named '" + *id_column + "'", line_no);
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].empty()) throw ParseError("empty column name", line_no, std::to_string(i + 1));
  }

  std::vector<RowId> ids;
  std::vector<Column> columns;
  std::vector<std::size_t> source_index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i == id_index) continue;
    columns.push_back(Column{header[i], true, {}});
    source_index.push_back(i);
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_record(line, line_no);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    auto id = parse_int(fields[id_index]);
    if (!id) throw ParseError("row id is not an integer: '" + fields[id_index] + "'", line_no,
                              header[id_index]);
    ids.push_back(*id);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      auto v = parse_double(fields[source_index[c]]);
      if (!v) columns[c].numeric = false;
      columns[c].values.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
    }
  }
  for (auto& col : columns) {
    if (!col.numeric) {
      std::fill(col.values.begin(), col.values.end(), std::numeric_limits<double>::quiet_NaN());
    }
  }
  try {
    return Relation(std::move(table), std::move(ids), std::move(columns));
  } catch (const SchemaError& e) {
    throw ParseError(e.what(), line_no);
  }
}

Relation read_csv(std::string_view text, std::string table, std::optional<std::string> id_column) {
  std::istringstream in{std::string(text)};
  return read_csv(in, std::move(table), std::move(id_column));
}

Relation read_csv_file(const std::filesystem::path& path, std::string table,
                       std::optional<std::string> id_column) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  return read_csv(in, std::move(table), std::move(id_column));
}

}  // namespace flexq
