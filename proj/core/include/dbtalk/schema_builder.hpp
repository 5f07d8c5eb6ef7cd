#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "dbtalk/knowledge_base.hpp"
#include "dbtalk/schema.hpp"
#include "dbtalk/schema_graph.hpp"

namespace dbtalk {

struct BuilderConfig {
  /// Classes descending from these are entities (their instances have names
  /// users recognize); everything else flattens into its referrer.
  std::vector<std::string> entity_roots = {"Person", "Organization", "Place", "Event",
                                           "CreativeWork"};
  /// Per-class overrides: force a class to be (or not be) an entity.
  std::map<std::string, bool> entity_overrides;
  /// Properties that sound plural in their documentation but hold one value
  /// per object in practice.
  std::set<std::string> singular_overrides = {"image", "description", "name", "url"};
  /// Extra leading/trailing words stripped from auto-generated annotations.
  std::vector<std::string> annotation_stopwords;
};

struct BuildResult {
  NlSchema schema;
  KnowledgeBase kb;
  std::vector<std::string> warnings;
};

/// Entity classes per the configured roots and overrides.
/// Throws ConfigError when an override names a class missing from the graph.
std::set<std::string> classify_entities(const SchemaGraph& graph, const BuilderConfig& config);

/// Picks one type for a property from its declared ranges, highest priority
/// first: record types, primitives, entity references, strings. Record-typed
/// results come back as an empty record tag; the builder flattens them along
/// the observed paths. Promoted (recursive non-entity) classes resolve to
/// entity references.
TypeTag resolve_type(const std::vector<std::string>& ranges, const SchemaGraph& graph,
                     const std::set<std::string>& entities, const std::set<std::string>& promoted);

/// Array-ness of a property: ItemList-typed, plural-sounding documentation,
/// or arrays observed in the data — except for the singular-override list.
bool infer_cardinality(const std::string& property, const std::string& range_hint,
                       const std::string& comment, bool observed_array,
                       const BuilderConfig& config);

/// Annotation generated from the property name alone: camel-case split,
/// table/parent and value/content words stripped, has-/is- prefixes and a
/// small verb lexicon routed to their POS categories. Always returns at
/// least one phrase.
AnnotationSet auto_annotate(const std::string& field_path, const TypeTag& type,
                            const std::string& table_name);

/// Converts a class graph plus JSON-LD instance documents into an NlSchema
/// and a normalized knowledge base. Only properties observed in the data
/// survive; dirty cells are coerced or nulled with a warning, never fatal.
BuildResult build_schema(const SchemaGraph& graph,
                         const std::vector<std::filesystem::path>& data_files,
                         const BuilderConfig& config);

/// Convenience: every *.json file under the directory, sorted by name.
std::vector<std::filesystem::path> list_data_files(const std::filesystem::path& dir);

}  // namespace dbtalk
