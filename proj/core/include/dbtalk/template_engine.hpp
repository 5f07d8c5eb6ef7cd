#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dbtalk/ast.hpp"
#include "dbtalk/schema.hpp"

namespace dbtalk {

/// How the augmenter should fill a slot.
enum class SlotKind {
  field_value,   // draw from the field's observed values / range
  entity_name,   // draw from the target table's name column
  small_number,  // ranks and counts: small positive integers
};

struct SlotInfo {
  TypeTag type;
  std::string table;
  std::string field;
  SlotKind kind = SlotKind::field_value;
  bool exact = true;  // false: any in-range value keeps the query satisfiable
};

/// One sentence token: a word, or a typed value slot (rendered VALUE_<k>).
struct SentenceToken {
  std::string text;
  int slot = -1;

  bool is_slot() const { return slot >= 0; }
};

/// A partially built sentence paired with the typed fragment it denotes.
struct Derivation {
  std::string nonterminal;
  std::vector<SentenceToken> sentence;
  std::variant<std::monostate, AstPtr, FilterPtr, Value, std::string> value;
  std::string base_table;   // root table for table/question/fref derivations
  TypeTag result_type;      // type of the denoted value, when meaningful
  std::vector<SlotInfo> slots;
  int depth = 1;
  std::vector<std::string> provenance;  // template ids, root first
  std::set<std::string> eq_fields;      // scalar fields already pinned by ==

  AstPtr ast() const;        // throws Error unless the value is a query
  FilterPtr filter() const;  // throws Error unless the value is a filter
  std::string sentence_text() const;
};

struct RhsItem {
  std::string literal;      // set for literal tokens
  std::string var;          // set for bound nonterminals
  std::string nonterminal;  // set for bound nonterminals
  int slot = -1;            // index into Template::slot_infos for slot items

  bool is_literal() const { return slot < 0 && nonterminal.empty(); }
  bool is_nonterminal() const { return !nonterminal.empty(); }
  bool is_slot() const { return slot >= 0; }

  static RhsItem lit(std::string text);
  static RhsItem nt(std::string var, std::string nonterminal);
  static RhsItem slot_item(int index);
};

struct Template;

/// Everything a semantic function needs: the children in rhs order and the
/// final placeholder indices after sentence concatenation.
struct SemContext {
  const Template* tmpl = nullptr;
  std::vector<const Derivation*> children;
  std::vector<int> child_offsets;  // slot offset applied to each child
  std::vector<int> own_slots;      // final index of each template-owned slot

  const Derivation& child(size_t k) const { return *children.at(k); }
  AstPtr ast(size_t k) const;        // child value, placeholder-shifted
  FilterPtr filter(size_t k) const;  // child value, placeholder-shifted
  Value value(size_t k) const;
  Value own_placeholder(size_t j) const { return Value(Placeholder{own_slots.at(j)}); }
};

/// Builds the composed value; returns nothing to reject the combination.
/// The engine assembles sentence, slots, depth, and provenance around it.
using SemFn = std::function<std::optional<Derivation>(const SemContext&)>;

/// Production rule `lhs := [v : nt | literal]+ => semfn`.
struct Template {
  std::string id;      // unique, stable across runs
  std::string family;  // TemplateFamily name, for stats and coverage checks
  std::string lhs;
  std::vector<RhsItem> rhs;
  std::vector<SlotInfo> slot_infos;  // owned slots, in rhs order
  SemFn semfn;
  std::string semfn_name;  // printable form for the DSL dump
};

struct ExpansionConfig {
  int max_depth = 6;
  /// Per-(template, depth) stratum quota; entry d-1 applies at depth d.
  /// Missing entries fall back to default_target.
  std::vector<int> target_sizes;
  int default_target = 160;
  std::uint64_t seed = 1;
  bool exhaustive = false;  // enumerate every combination, ignore quotas
  /// Nonterminal kinds (prefix before ':') or full names to expand;
  /// empty means everything.
  std::set<std::string> enabled;
  std::string root = "question";
};

/// Runs guards and the semantic function for one combination and assembles
/// the resulting derivation. Rejection is a normal outcome.
std::optional<Derivation> apply_semfn(const Template& tmpl,
                                      const std::vector<const Derivation*>& children);

/// Bottom-up, depth-synchronous expansion. Combinations beyond the stratum
/// quota are sampled with an RNG seeded per (template, depth); output is
/// deduplicated by sentence and ordered lexicographically by sentence.
/// Throws ConfigError for rules over unknown nonterminals.
std::vector<Derivation> expand(const std::vector<Template>& templates, const NlSchema& schema,
                               const ExpansionConfig& config);

/// Line-oriented template DSL:
///   rule question := "search for" t:table => imperative(t)
/// with `#[pos=active_verb]` attributes for annotation-driven rules.
std::vector<Template> parse_template_dsl(const std::string& text, const NlSchema& schema);
std::string dump_template_dsl(const std::vector<Template>& templates);

}  // namespace dbtalk
