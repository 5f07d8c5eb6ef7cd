#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dbtalk/schema.hpp"
#include "dbtalk/value.hpp"

namespace dbtalk {

using Row = std::map<std::string, Value>;

struct LoadWarning {
  std::string table;
  int row = -1;
  std::string field;
  std::string message;
};

struct TableData {
  std::vector<Row> rows;  // KB insertion order; sort stability is defined on it
  /// Lowercased entity name -> row indices, for lookup resolution.
  std::map<std::string, std::vector<int>> name_index;
};

/// In-memory instance data. Immutable after load; execute() only reads it.
struct KnowledgeBase {
  std::map<std::string, TableData> tables;

  const TableData* table(const std::string& name) const;

  void add_row(const std::string& table, Row row);  // maintains the name index

  /// The unique id whose `name` matches case-insensitively.
  /// Throws RuntimeError(lookup_not_found / lookup_ambiguous).
  EntityId resolve_lookup(const std::string& name, const std::string& table) const;

  /// Loads `<Table>.json` files (one JSON array of row objects per table)
  /// from a directory. Cells are validated against the schema; offending
  /// cells are nulled and reported. `id` is required, duplicate ids are
  /// dropped. Nested objects are flattened to dotted field names.
  static KnowledgeBase load_dir(const std::filesystem::path& dir, const NlSchema& schema,
                                std::vector<LoadWarning>* warnings = nullptr);

  void save_dir(const std::filesystem::path& dir, const NlSchema& schema) const;
};

}  // namespace dbtalk
