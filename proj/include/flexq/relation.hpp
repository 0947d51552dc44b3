#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace flexq {

using RowId = std::int64_t;

// Order-sensitive 64-bit digest of an id sequence, used for cheap
// alignment checks between a relation and a KB built from it.
std::uint64_t digest_ids(std::span<const RowId> ids);

struct Column {
  std::string name;
  // False when any cell failed to parse as a number; values are then NaN
  // and the column cannot carry labels or be aggregated.
  bool numeric = true;
  std::vector<double> values;
};

// Column-major numeric table with unique integer row ids.
class Relation {
 public:
  Relation() = default;
  // Throws SchemaError on duplicate ids, duplicate column names or ragged
  // columns.
  Relation(std::string name, std::vector<RowId> ids, std::vector<Column> columns);

  const std::string& name() const { return name_; }
  std::size_t size() const { return ids_.size(); }
  std::span<const RowId> row_ids() const { return ids_; }
  std::uint64_t ids_digest() const { return ids_digest_; }
  const std::vector<Column>& columns() const { return columns_; }

  // Case-insensitive lookup; nullptr when absent.
  const Column* find_column(std::string_view name) const;
  // Throws SchemaError when absent, TypeError when not numeric.
  const Column& numeric_column(std::string_view name) const;

  std::optional<std::size_t> position_of(RowId id) const;

 private:
  std::string name_;
  std::vector<RowId> ids_;
  std::uint64_t ids_digest_ = digest_ids({});
  std::vector<Column> columns_;
  std::unordered_map<RowId, std::size_t> position_;
};

// CSV with a header row. The id column is the first column unless
// id_column names another one. Throws ParseError with line/field context.
Relation read_csv(std::istream& in, std::string table,
                  std::optional<std::string> id_column = std::nullopt);
Relation read_csv(std::string_view text, std::string table,
                  std::optional<std::string> id_column = std::nullopt);
Relation read_csv_file(const std::filesystem::path& path, std::string table,
                       std::optional<std::string> id_column = std::nullopt);

}  // namespace flexq
