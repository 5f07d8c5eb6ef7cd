#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dbtalk/types.hpp"

namespace dbtalk {

/// Part-of-speech category of a natural-language annotation phrase.
enum class Pos {
  base,
  has_a_noun,
  is_a_noun,
  active_verb,
  passive_verb,
  adjective,
  preposition,
};

constexpr int kPosCount = 7;
const char* to_string(Pos pos);
std::optional<Pos> pos_from_string(const std::string& s);

/// Phrases per POS category. A phrase is lowercase and contains at most one
/// `#`, marking where the value goes ("serves # cuisine").
struct AnnotationSet {
  std::map<Pos, std::vector<std::string>> phrases;

  bool empty() const;
  const std::vector<std::string>& get(Pos pos) const;
  void add(Pos pos, std::string phrase);
  bool operator==(const AnnotationSet&) const = default;
};

/// Union per category; `first` phrases keep their position ahead of `second`,
/// duplicates dropped.
AnnotationSet merge_annotations(const AnnotationSet& first, const AnnotationSet& second);

struct FieldDef {
  TypeTag type;  // element type when is_array
  bool is_array = false;
  AnnotationSet annotations;
  /// Phrases describing the relationship from the value's point of view
  /// (doctor/patient, employer/employee); they swap selection and projection
  /// roles during synthesis.
  AnnotationSet reverse_annotations;
  std::string source_property;

  TypeTag row_tag() const;  // Array(type) or type
};

struct TableDef {
  /// Singular noun phrases for the table ("restaurant"); plural forms are
  /// stored separately because English pluralization is irregular.
  std::vector<std::string> canonical;
  std::vector<std::string> canonical_plural;
  /// Entity root this table descends from (Person, Place, ...), when known.
  std::string root;
  std::map<std::string, FieldDef> fields;
};

/// Relational schema with POS-tagged natural-language annotations.
struct NlSchema {
  std::map<std::string, TableDef> tables;

  bool has_table(const std::string& name) const;
  const TableDef* table(const std::string& name) const;
  const FieldDef* field(const std::string& table, const std::string& field) const;

  /// Row type of a table: its fields plus "id": entity_ref(table).
  RowType row_type(const std::string& table) const;  // throws Error on unknown table

  /// First location-typed field of a table (usually "geo"), if any.
  std::optional<std::string> location_field(const std::string& table) const;

  static NlSchema load(const std::filesystem::path& path);  // throws Error
  static NlSchema from_json_text(const std::string& text);
  void save(const std::filesystem::path& path) const;
  std::string to_json_text() const;

  /// Deep-merges a manual annotation overlay (same JSON shape) into this
  /// schema: overlay phrases come first, new fields/tables are added.
  void merge_overlay_file(const std::filesystem::path& path);
  void merge_overlay_text(const std::string& text);
};

}  // namespace dbtalk
