#pragma once

#include <map>
#include <string>
#include <vector>

#include "dbtalk/schema.hpp"
#include "dbtalk/template_engine.hpp"

namespace dbtalk {

struct LibraryOptions {
  /// "or more" / "both" refinement templates.
  bool include_refinements = false;
};

struct ComparativeWord {
  std::string word;
  bool descending = false;  // "heavier": true, "lighter": false
};

/// Comparison words per measurement kind; Date and Time fields use the
/// "time" row.
struct ComparativeLexicon {
  std::map<std::string, std::vector<ComparativeWord>> comparatives;
  std::map<std::string, std::vector<ComparativeWord>> superlatives;

  static const ComparativeLexicon& get();
};

/// Lexicon key for an ordered field type: the measure dimension, "time" for
/// dates and times, "currency" for money; empty for plain numbers.
std::string lexicon_key(const TypeTag& type);

/// Interrogative pronoun for a projected value type: where for locations,
/// when for dates and times, who for references to person-rooted tables.
std::string pronoun_for(const TypeTag& type, const NlSchema& schema);

/// Pronoun used when asking for rows of a table.
std::string pronoun_for_table(const std::string& table, const NlSchema& schema);

/// The built-in corpus of canonical and generic query templates,
/// instantiated per table, field, and annotation phrase of the schema.
/// Templates reference the schema; it must outlive them.
std::vector<Template> builtin_templates(const NlSchema& schema, const LibraryOptions& options = {});

}  // namespace dbtalk
