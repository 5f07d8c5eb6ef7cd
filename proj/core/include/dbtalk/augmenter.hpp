#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dbtalk/knowledge_base.hpp"
#include "dbtalk/schema.hpp"
#include "dbtalk/template_engine.hpp"

namespace dbtalk {

/// One training pair. The TSV form is `id<TAB>sentence<TAB>code`, tokens
/// joined by single spaces; placeholder-form records carry VALUE_k tokens in
/// both columns.
struct DatasetRecord {
  enum class Origin { synthesized, paraphrase };

  std::string id;
  std::vector<std::string> sentence;
  std::vector<std::string> code;
  Origin origin = Origin::synthesized;
  int augmentation = 0;

  std::string sentence_text() const;
  std::string code_text() const;
};

DatasetRecord to_placeholder_record(const Derivation& derivation, std::string id);

/// Distinct observed values and ranges per (table, field), used to fill
/// placeholders with values that keep the query satisfiable.
struct ValuePool {
  struct FieldPool {
    std::vector<Value> values;  // distinct scalars, insertion order
    double min = 0, max = 0;    // magnitude range of ordered values
    bool has_range = false;
    std::string min_date, max_date;
    int max_array_len = 0;
  };

  std::map<std::pair<std::string, std::string>, FieldPool> fields;
  std::map<std::string, int> max_link_count;  // table -> widest array cell

  static ValuePool from_kb(const KnowledgeBase& kb, const NlSchema& schema);
  const FieldPool* find(const std::string& table, const std::string& field) const;
};

struct AugmentStats {
  int input = 0;
  int emitted = 0;
  int dropped = 0;  // records whose pools were empty or whose code failed to parse
  std::vector<std::string> warnings;
};

/// Replaces VALUE_k holes with concrete values: strings and entity names come
/// from the field's pool, numeric comparisons draw within the observed range
/// so they stay satisfiable. Each input yields up to `multiplier` records
/// with independently sampled values; output is deduplicated by
/// (sentence, code) and sorted, deterministically for a fixed seed.
std::vector<DatasetRecord> augment(const std::vector<DatasetRecord>& placeholder_records,
                                   const KnowledgeBase& kb, const NlSchema& schema,
                                   int multiplier, std::uint64_t seed,
                                   AugmentStats* stats = nullptr);

std::string emit_tsv_text(const std::vector<DatasetRecord>& records);
void emit_tsv(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);

/// Strict TSV reader; throws Error naming the first malformed line.
std::vector<DatasetRecord> load_tsv_text(const std::string& text);
std::vector<DatasetRecord> load_tsv(const std::filesystem::path& path);

/// Seeded shuffle + ratio split (train/dev/test).
std::vector<std::vector<DatasetRecord>> split_dataset(const std::vector<DatasetRecord>& records,
                                                      const std::vector<double>& ratios,
                                                      std::uint64_t seed);

}  // namespace dbtalk
