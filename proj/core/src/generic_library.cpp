#include "dbtalk/generic_library.hpp"

#include <sstream>

#include "dbtalk/errors.hpp"

namespace dbtalk {

const ComparativeLexicon& ComparativeLexicon::get() {
  static const ComparativeLexicon lexicon = [] {
    ComparativeLexicon lex;
    auto row = [&lex](const std::string& key,
                      std::vector<ComparativeWord> cmp, std::vector<ComparativeWord> sup) {
      lex.comparatives[key] = std::move(cmp);
      lex.superlatives[key] = std::move(sup);
    };
    row("time",
        {{"earlier", false}, {"before", false}, {"later", true}, {"after", true}},
        {{"earliest", false}, {"latest", true}});
    row("duration", {{"shorter", false}, {"longer", true}},
        {{"shortest", false}, {"longest", true}});
    row("distance",
        {{"closer", false}, {"nearer", false}, {"farther", true}, {"more distant", true}},
        {{"closest", false}, {"nearest", false}, {"farthest", true}});
    row("length", {{"shorter", false}, {"longer", true}},
        {{"shortest", false}, {"longest", true}});
    row("currency", {{"cheaper", false}, {"more expensive", true}},
        {{"cheapest", false}, {"most expensive", true}});
    row("weight",
        {{"lighter", false}, {"smaller", false}, {"heavier", true}, {"larger", true}},
        {{"lightest", false}, {"smallest", false}, {"heaviest", true}, {"largest", true}});
    row("speed", {{"slower", false}, {"faster", true}}, {{"slowest", false}, {"fastest", true}});
    row("temperature", {{"colder", false}, {"hotter", true}},
        {{"coldest", false}, {"hottest", true}});
    return lex;
  }();
  return lexicon;
}

std::string lexicon_key(const TypeTag& type) {
  switch (type.kind) {
    case TypeTag::Kind::measure: return to_string(type.dimension);
    case TypeTag::Kind::currency: return "currency";
    case TypeTag::Kind::date:
    case TypeTag::Kind::time: return "time";
    default: return "";
  }
}

std::string pronoun_for_table(const std::string& table, const NlSchema& schema) {
  const TableDef* t = schema.table(table);
  return t && t->root == "Person" ? "who" : "what";
}

std::string pronoun_for(const TypeTag& type, const NlSchema& schema) {
  switch (type.kind) {
    case TypeTag::Kind::location: return "where";
    case TypeTag::Kind::date:
    case TypeTag::Kind::time: return "when";
    case TypeTag::Kind::entity_ref: return pronoun_for_table(type.table, schema);
    default: return "what";
  }
}

namespace {

/// Field facts baked into semantic-function closures at instantiation time,
/// so templates never dangle into the schema.
struct FieldBits {
  std::string name;
  bool is_array = false;
  bool is_entity = false;
  std::string ref_table;
};

FieldBits bits_of(const std::string& fname, const FieldDef& def) {
  FieldBits b;
  b.name = fname;
  b.is_array = def.is_array;
  b.is_entity = def.type.kind == TypeTag::Kind::entity_ref;
  if (b.is_entity) b.ref_table = def.type.table;
  return b;
}

/// Wraps a raw placeholder as a lookup for entity-valued fields.
Value field_rhs(const FieldBits& f, Value v) {
  if (!f.is_entity) return v;
  LookupRef ref;
  ref.table = f.ref_table;
  if (const auto* p = std::get_if<Placeholder>(&v.v)) {
    ref.placeholder = p->index;
  } else if (const auto* s = std::get_if<std::string>(&v.v)) {
    ref.name = *s;
  }
  return Value(std::move(ref));
}

FilterPtr field_cmp(const FieldBits& f, Value v) {
  return build::cmp(Value::field(f.name), f.is_array ? CmpOp::contains : CmpOp::eq,
                    field_rhs(f, std::move(v)));
}

bool eq_overlap(const Derivation& a, const Derivation& b) {
  for (const auto& f : b.eq_fields)
    if (a.eq_fields.count(f)) return true;
  return false;
}

/// Ranked tables already read "the ..."; stacking determiners or more
/// modifiers in front of them garbles the sentence.
bool starts_with_the(const Derivation& d) {
  return !d.sentence.empty() && !d.sentence.front().is_slot() &&
         d.sentence.front().text == "the";
}

struct Lib {
  const NlSchema& schema;
  LibraryOptions options;
  std::vector<Template> out;
  std::vector<std::string>* warnings;
  std::set<std::string> produced;  // nonterminals some template derives

  void warn(const std::string& message) {
    if (warnings) warnings->push_back(message);
  }

  bool has_nt(const std::string& nonterminal) const { return produced.count(nonterminal) > 0; }

  /// True when every nonterminal on the rhs is derivable; templates over
  /// annotation categories a field does not carry are simply not emitted.
  bool feasible(const std::vector<RhsItem>& rhs) const {
    for (const auto& item : rhs)
      if (item.is_nonterminal() && !has_nt(item.nonterminal)) return false;
    return true;
  }

  void add(std::string id, std::string family, std::string lhs, std::vector<RhsItem> rhs,
           SemFn fn, std::string fn_name, std::vector<SlotInfo> slots = {}) {
    if (!feasible(rhs)) return;
    Template t;
    t.id = std::move(id);
    t.family = std::move(family);
    t.lhs = std::move(lhs);
    t.rhs = std::move(rhs);
    t.slot_infos = std::move(slots);
    t.semfn = std::move(fn);
    t.semfn_name = std::move(fn_name);
    produced.insert(t.lhs);
    out.push_back(std::move(t));
  }

  /// Splits an annotation phrase around its `#` into rhs items with the
  /// bound value child at the slot; returns false when the phrase has no #.
  static bool phrase_items(const std::string& phrase, const std::string& value_nt,
                           std::vector<RhsItem>& items) {
    const auto hash = phrase.find('#');
    if (hash == std::string::npos) return false;
    const std::string pre = phrase.substr(0, hash);
    const std::string post = phrase.substr(hash + 1);
    if (!pre.empty() && pre.find_first_not_of(' ') != std::string::npos)
      items.push_back(RhsItem::lit(pre));
    items.push_back(RhsItem::nt("v", value_nt));
    if (!post.empty() && post.find_first_not_of(' ') != std::string::npos)
      items.push_back(RhsItem::lit(post));
    return true;
  }

  // --- semantic-function factories -----------------------------------------

  static SemFn sem_pass(std::string base_table) {
    return [base_table](const SemContext& ctx) -> std::optional<Derivation> {
      Derivation d;
      d.value = ctx.ast(0);
      d.base_table = base_table;
      return d;
    };
  }

  /// table + filter modifier; `table_first` tells which child is which.
  static SemFn sem_modify(bool table_first) {
    return [table_first](const SemContext& ctx) -> std::optional<Derivation> {
      const size_t t = table_first ? 0 : 1;
      const size_t m = table_first ? 1 : 0;
      if (eq_overlap(ctx.child(t), ctx.child(m))) return std::nullopt;
      if (!table_first && starts_with_the(ctx.child(t)))
        return std::nullopt;  // no adjectives in front of "the ..."
      Derivation d;
      d.value = build::where(ctx.ast(t), ctx.filter(m));
      d.base_table = ctx.child(t).base_table;
      return d;
    };
  }

  static SemFn sem_connect(bool conjunction) {
    return [conjunction](const SemContext& ctx) -> std::optional<Derivation> {
      const Derivation& t = ctx.child(0);
      const Derivation& m1 = ctx.child(1);
      const Derivation& m2 = ctx.child(2);
      if (m1.sentence_text() == m2.sentence_text()) return std::nullopt;
      if (conjunction && (eq_overlap(t, m1) || eq_overlap(t, m2) || eq_overlap(m1, m2)))
        return std::nullopt;
      Derivation d;
      FilterPtr joined = conjunction ? build::f_and(ctx.filter(1), ctx.filter(2))
                                     : build::f_or(ctx.filter(1), ctx.filter(2));
      d.value = build::where(ctx.ast(0), std::move(joined));
      d.base_table = t.base_table;
      if (!conjunction) d.eq_fields.clear();
      return d;
    };
  }

  static SemFn sem_negate() {
    return [](const SemContext& ctx) -> std::optional<Derivation> {
      Derivation d;
      d.value = build::where(ctx.ast(0), build::f_not(ctx.filter(1)));
      d.base_table = ctx.child(0).base_table;
      d.eq_fields.clear();  // a negated pin is no longer a pin
      return d;
    };
  }

  // --- leaves ---------------------------------------------------------------

  void add_leaves(const std::string& tname, const TableDef& tdef) {
    int k = 0;
    const auto plurals = tdef.canonical_plural.empty()
                             ? std::vector<std::string>{tname}
                             : tdef.canonical_plural;
    for (const auto& noun : plurals) {
      add("canonical-selection/tname:" + tname + "/" + std::to_string(k++), "canonical-selection",
          "tname:" + tname, {RhsItem::lit(to_lower(noun))},
          [tname](const SemContext&) -> std::optional<Derivation> {
            Derivation d;
            d.value = build::table(tname);
            d.base_table = tname;
            return d;
          },
          "table_ref[" + tname + "]");
    }

    for (const auto& [fname, fdef] : tdef.fields) {
      if (fdef.type.kind == TypeTag::Kind::boolean ||
          fdef.type.kind == TypeTag::Kind::location)
        continue;
      SlotInfo slot;
      if (fdef.type.kind == TypeTag::Kind::entity_ref) {
        slot.kind = SlotKind::entity_name;
        slot.table = fdef.type.table;
        slot.field = "name";
        slot.type = TypeTag::string();
      } else {
        slot.kind = SlotKind::field_value;
        slot.table = tname;
        slot.field = fname;
        slot.type = fdef.type;
      }
      add("canonical-selection/value:" + tname + "." + fname, "canonical-selection",
          "value:" + tname + "." + fname, {RhsItem::slot_item(0)},
          [](const SemContext& ctx) -> std::optional<Derivation> {
            Derivation d;
            d.value = ctx.own_placeholder(0);
            return d;
          },
          "slot[" + tname + "." + fname + "]", {slot});
    }

    if (tdef.fields.count("name")) {
      SlotInfo slot;
      slot.kind = SlotKind::entity_name;
      slot.table = tname;
      slot.field = "name";
      slot.type = TypeTag::string();
      add("canonical-projection/entity:" + tname, "canonical-projection", "entity:" + tname,
          {RhsItem::slot_item(0)},
          [tname](const SemContext& ctx) -> std::optional<Derivation> {
            LookupRef ref;
            ref.table = tname;
            ref.placeholder = std::get<Placeholder>(ctx.own_placeholder(0).v).index;
            Derivation d;
            d.value = build::where(build::table(tname),
                                   build::cmp(Value::field("id"), CmpOp::eq, Value(ref)));
            d.base_table = tname;
            return d;
          },
          "entity_lookup[" + tname + "]", {slot});
    }
  }

  void add_number_leaf() {
    SlotInfo slot;
    slot.kind = SlotKind::small_number;
    slot.type = TypeTag::number();
    add("canonical-ranking/number", "canonical-ranking", "number", {RhsItem::slot_item(0)},
        [](const SemContext& ctx) -> std::optional<Derivation> {
          Derivation d;
          d.value = ctx.own_placeholder(0);
          return d;
        },
        "slot[number]", {slot});
  }

  // --- modifiers per POS ----------------------------------------------------

  void add_modifiers(const std::string& tname, const TableDef& tdef) {
    struct PosSpec {
      Pos pos;
      const char* nt;
    };
    static const PosSpec specs[] = {
        {Pos::adjective, "mod_adj"},   {Pos::has_a_noun, "mod_hasnp"},
        {Pos::is_a_noun, "mod_isnp"},  {Pos::active_verb, "mod_verb"},
        {Pos::passive_verb, "mod_pasv"}, {Pos::preposition, "mod_prep"},
    };
    for (const auto& [fname, fdef] : tdef.fields) {
      const FieldBits bits = bits_of(fname, fdef);
      const std::string value_nt = "value:" + tname + "." + fname;
      for (const auto& spec : specs) {
        int k = 0;
        for (const auto& phrase : fdef.annotations.get(spec.pos)) {
          const std::string id = std::string("pos-structure/") + spec.nt + ":" + tname + "." +
                                 fname + "/" + std::to_string(k++);
          std::vector<RhsItem> items;
          if (phrase_items(phrase, value_nt, items)) {
            add(id, "pos-structure", std::string(spec.nt) + ":" + tname, std::move(items),
                [bits](const SemContext& ctx) -> std::optional<Derivation> {
                  Derivation d;
                  d.value = field_cmp(bits, ctx.value(0));
                  if (!bits.is_array) d.eq_fields.insert(bits.name);
                  return d;
                },
                std::string("filter_") + to_string(spec.pos) + "[" + tname + "." + fname + "]");
          } else if (fdef.type.kind == TypeTag::Kind::boolean) {
            add(id, "pos-structure", std::string(spec.nt) + ":" + tname,
                {RhsItem::lit(phrase)},
                [bits](const SemContext&) -> std::optional<Derivation> {
                  Derivation d;
                  d.value = build::cmp(Value::field(bits.name), CmpOp::eq, Value::boolean(true));
                  d.eq_fields.insert(bits.name);
                  return d;
                },
                std::string("filter_flag[") + tname + "." + fname + "]");
          }
        }
      }
    }
  }

  // --- table compositions -----------------------------------------------------

  void add_compositions(const std::string& tname) {
    const std::string table_nt = "table:" + tname;
    add("canonical-selection/table-id:" + tname, "canonical-selection", table_nt,
        {RhsItem::nt("t", "tname:" + tname)}, sem_pass(tname), "id");

    add("connective/adj-stack:" + tname, "connective", table_nt,
        {RhsItem::nt("m", "mod_adj:" + tname), RhsItem::nt("t", table_nt)}, sem_modify(false),
        "filter");
    add("pos-structure/with-hasnp:" + tname, "pos-structure", table_nt,
        {RhsItem::nt("t", table_nt), RhsItem::lit("with"), RhsItem::nt("m", "mod_hasnp:" + tname)},
        sem_modify(true), "filter");
    add("pos-structure/that-verb:" + tname, "pos-structure", table_nt,
        {RhsItem::nt("t", table_nt), RhsItem::lit("that"), RhsItem::nt("m", "mod_verb:" + tname)},
        sem_modify(true), "filter");
    add("pos-structure/pasv:" + tname, "pos-structure", table_nt,
        {RhsItem::nt("t", table_nt), RhsItem::nt("m", "mod_pasv:" + tname)}, sem_modify(true),
        "filter");
    add("pos-structure/prep:" + tname, "pos-structure", table_nt,
        {RhsItem::nt("t", table_nt), RhsItem::nt("m", "mod_prep:" + tname)}, sem_modify(true),
        "filter");
    add("pos-structure/that-are-adj:" + tname, "pos-structure", table_nt,
        {RhsItem::nt("t", table_nt), RhsItem::lit("that are"),
         RhsItem::nt("m", "mod_adj:" + tname)},
        sem_modify(true), "filter");
    add("pos-structure/that-are-isnp:" + tname, "pos-structure", table_nt,
        {RhsItem::nt("t", table_nt), RhsItem::lit("that are"),
         RhsItem::nt("m", "mod_isnp:" + tname)},
        sem_modify(true), "filter");

    add("connective/and-hasnp:" + tname, "connective", table_nt,
        {RhsItem::nt("t", table_nt), RhsItem::lit("with"), RhsItem::nt("m1", "mod_hasnp:" + tname),
         RhsItem::lit("and"), RhsItem::nt("m2", "mod_hasnp:" + tname)},
        sem_connect(true), "filter_and");
    add("connective/and-verb:" + tname, "connective", table_nt,
        {RhsItem::nt("t", table_nt), RhsItem::lit("that"), RhsItem::nt("m1", "mod_verb:" + tname),
         RhsItem::lit("and"), RhsItem::nt("m2", "mod_verb:" + tname)},
        sem_connect(true), "filter_and");
    add("connective/or-hasnp:" + tname, "connective", table_nt,
        {RhsItem::nt("t", table_nt), RhsItem::lit("with"), RhsItem::nt("m1", "mod_hasnp:" + tname),
         RhsItem::lit("or"), RhsItem::nt("m2", "mod_hasnp:" + tname)},
        sem_connect(false), "filter_or");
    add("connective/not-adj:" + tname, "connective", table_nt,
        {RhsItem::nt("t", table_nt), RhsItem::lit("that are not"),
         RhsItem::nt("m", "mod_adj:" + tname)},
        sem_negate(), "filter_not");
  }

  // --- canonical selection, comparatives, ranking ------------------------------

  void add_field_tables(const std::string& tname, const TableDef& tdef) {
    const std::string table_nt = "table:" + tname;
    for (const auto& [fname, fdef] : tdef.fields) {
      const FieldBits bits = bits_of(fname, fdef);
      const std::string value_nt = "value:" + tname + "." + fname;
      const auto& bases = fdef.annotations.get(Pos::base);
      if (bases.empty() && fdef.annotations.empty())
        warn(tname + "." + fname + " has no annotations; canonical templates skipped");
      const TypeTag row_tag = fdef.row_tag();
      const bool ordered = !fdef.is_array && fdef.type.is_ordered();

      int bi = 0;
      for (const auto& base : bases) {
        const std::string suffix = ":" + tname + "." + fname + "/" + std::to_string(bi++);

        if (!fdef.is_array && fdef.type.kind != TypeTag::Kind::boolean &&
            fdef.type.kind != TypeTag::Kind::location) {
          add("canonical-selection/eq" + suffix, "canonical-selection", table_nt,
              {RhsItem::nt("t", "tname:" + tname), RhsItem::lit("with " + base + " equal to"),
               RhsItem::nt("v", value_nt)},
              [bits](const SemContext& ctx) -> std::optional<Derivation> {
                Derivation d;
                d.value = build::where(ctx.ast(0), field_cmp(bits, ctx.value(1)));
                d.base_table = ctx.child(0).base_table;
                d.eq_fields.insert(bits.name);
                return d;
              },
              "selection_eq[" + tname + "." + fname + "]");
        }
        if (ordered) {
          auto cmp_sem = [bits](CmpOp op) {
            return [bits, op](const SemContext& ctx) -> std::optional<Derivation> {
              Derivation d;
              d.value = build::where(
                  ctx.ast(0), build::cmp(Value::field(bits.name), op, ctx.value(1)));
              d.base_table = ctx.child(0).base_table;
              return d;
            };
          };
          add("canonical-selection/ge" + suffix, "canonical-selection", table_nt,
              {RhsItem::nt("t", "tname:" + tname), RhsItem::lit("with " + base + " greater than"),
               RhsItem::nt("v", value_nt)},
              cmp_sem(CmpOp::ge), "selection_ge[" + tname + "." + fname + "]");
          add("canonical-selection/le" + suffix, "canonical-selection", table_nt,
              {RhsItem::nt("t", "tname:" + tname), RhsItem::lit("with " + base + " less than"),
               RhsItem::nt("v", value_nt)},
              cmp_sem(CmpOp::le), "selection_le[" + tname + "." + fname + "]");
          add("comparative/at-least" + suffix, "comparative", table_nt,
              {RhsItem::nt("t", table_nt), RhsItem::lit("with at least"),
               RhsItem::nt("v", value_nt), RhsItem::lit(base)},
              cmp_sem(CmpOp::ge), "selection_ge[" + tname + "." + fname + "]");
          add("comparative/at-most" + suffix, "comparative", table_nt,
              {RhsItem::nt("t", table_nt), RhsItem::lit("with at most"),
               RhsItem::nt("v", value_nt), RhsItem::lit(base)},
              cmp_sem(CmpOp::le), "selection_le[" + tname + "." + fname + "]");
          if (options.include_refinements) {
            add("comparative/or-more" + suffix, "comparative", table_nt,
                {RhsItem::nt("t", table_nt), RhsItem::lit("with"), RhsItem::nt("v", value_nt),
                 RhsItem::lit(base + " or more")},
                cmp_sem(CmpOp::ge), "selection_ge[" + tname + "." + fname + "]");
          }

          // type-specific comparison words, keyed by the field's dimension
          const std::string key = lexicon_key(fdef.type);
          if (!key.empty()) {
            const auto& lex = ComparativeLexicon::get();
            int wi = 0;
            for (const auto& word : lex.comparatives.at(key)) {
              const bool bare = word.word == "before" || word.word == "after";
              add("comparative/word" + suffix + "/" + std::to_string(wi++), "comparative",
                  table_nt,
                  {RhsItem::nt("t", table_nt),
                   RhsItem::lit("with " + base + " " + word.word + (bare ? "" : " than")),
                   RhsItem::nt("v", value_nt)},
                  cmp_sem(word.descending ? CmpOp::ge : CmpOp::le),
                  std::string("selection_") + (word.descending ? "ge" : "le") + "[" + tname + "." +
                      fname + "]");
            }
            wi = 0;
            for (const auto& word : lex.superlatives.at(key)) {
              const SortDir dir = word.descending ? SortDir::desc : SortDir::asc;
              auto sem = [bits, dir](const SemContext& ctx) -> std::optional<Derivation> {
                if (starts_with_the(ctx.child(0))) return std::nullopt;
                Derivation d;
                d.value =
                    build::index(build::sort(bits.name, dir, ctx.ast(0)), Value::number(1));
                d.base_table = ctx.child(0).base_table;
                return d;
              };
              // "the nearest X" alone is reserved for the geo shortened form;
              // stored distance fields say their noun
              std::vector<RhsItem> rhs =
                  key == "distance"
                      ? std::vector<RhsItem>{RhsItem::lit("the"), RhsItem::nt("t", table_nt),
                                             RhsItem::lit("with the " + word.word + " " + base)}
                      : std::vector<RhsItem>{RhsItem::lit("the " + word.word),
                                             RhsItem::nt("t", table_nt)};
              add("superlative/word" + suffix + "/" + std::to_string(wi++), "superlative",
                  table_nt, std::move(rhs), sem,
                  std::string("rank_") + to_string(dir) + "[" + tname + "." + fname + "]");
            }
          } else if (fdef.type.kind == TypeTag::Kind::number) {
            auto rank_sem = [bits](SortDir dir) {
              return [bits, dir](const SemContext& ctx) -> std::optional<Derivation> {
                Derivation d;
                d.value =
                    build::index(build::sort(bits.name, dir, ctx.ast(0)), Value::number(1));
                d.base_table = ctx.child(0).base_table;
                return d;
              };
            };
            add("superlative/highest" + suffix, "superlative", table_nt,
                {RhsItem::nt("t", table_nt), RhsItem::lit("with the highest " + base)},
                rank_sem(SortDir::desc), "rank_desc[" + tname + "." + fname + "]");
            add("superlative/lowest" + suffix, "superlative", table_nt,
                {RhsItem::nt("t", table_nt), RhsItem::lit("with the lowest " + base)},
                rank_sem(SortDir::asc), "rank_asc[" + tname + "." + fname + "]");
          }

          // canonical ranking rows: min / max, single and top-n
          auto rank_sem = [bits](SortDir dir) {
            return [bits, dir](const SemContext& ctx) -> std::optional<Derivation> {
              if (starts_with_the(ctx.child(0))) return std::nullopt;
              Derivation d;
              d.value = build::index(build::sort(bits.name, dir, ctx.ast(0)), Value::number(1));
              d.base_table = ctx.child(0).base_table;
              return d;
            };
          };
          auto rank_n_sem = [bits](SortDir dir) {
            return [bits, dir](const SemContext& ctx) -> std::optional<Derivation> {
              if (starts_with_the(ctx.child(1))) return std::nullopt;
              Derivation d;
              d.value = build::slice(build::sort(bits.name, dir, ctx.ast(1)), Value::number(1),
                                     ctx.value(0));
              d.base_table = ctx.child(1).base_table;
              return d;
            };
          };
          add("canonical-ranking/min" + suffix, "canonical-ranking", table_nt,
              {RhsItem::lit("the"), RhsItem::nt("t", table_nt),
               RhsItem::lit("with the min " + base)},
              rank_sem(SortDir::asc), "rank_asc[" + tname + "." + fname + "]");
          add("canonical-ranking/max" + suffix, "canonical-ranking", table_nt,
              {RhsItem::lit("the"), RhsItem::nt("t", table_nt),
               RhsItem::lit("with the max " + base)},
              rank_sem(SortDir::desc), "rank_desc[" + tname + "." + fname + "]");
          add("canonical-ranking/min-n" + suffix, "canonical-ranking", table_nt,
              {RhsItem::lit("the"), RhsItem::nt("n", "number"), RhsItem::nt("t", table_nt),
               RhsItem::lit("with the min " + base)},
              rank_n_sem(SortDir::asc), "rank_top_asc[" + tname + "." + fname + "]");
          add("canonical-ranking/max-n" + suffix, "canonical-ranking", table_nt,
              {RhsItem::lit("the"), RhsItem::nt("n", "number"), RhsItem::nt("t", table_nt),
               RhsItem::lit("with the max " + base)},
              rank_n_sem(SortDir::desc), "rank_top_desc[" + tname + "." + fname + "]");
        }
        if (fdef.is_array) {
          add("canonical-selection/containing" + suffix, "canonical-selection", table_nt,
              {RhsItem::nt("t", "tname:" + tname), RhsItem::lit("with " + base + " containing"),
               RhsItem::nt("v", value_nt)},
              [bits](const SemContext& ctx) -> std::optional<Derivation> {
                Derivation d;
                d.value = build::where(ctx.ast(0), field_cmp(bits, ctx.value(1)));
                d.base_table = ctx.child(0).base_table;
                return d;
              },
              "selection_contains[" + tname + "." + fname + "]");
          if (options.include_refinements && !bits.is_entity) {
            add("connective/both" + suffix, "connective", table_nt,
                {RhsItem::nt("t", table_nt), RhsItem::lit("with both"),
                 RhsItem::nt("v1", value_nt), RhsItem::lit("and"), RhsItem::nt("v2", value_nt),
                 RhsItem::lit("as " + base)},
                [bits](const SemContext& ctx) -> std::optional<Derivation> {
                  Derivation d;
                  d.value = build::where(
                      ctx.ast(0),
                      build::f_and(field_cmp(bits, ctx.value(1)), field_cmp(bits, ctx.value(2))));
                  d.base_table = ctx.child(0).base_table;
                  return d;
                },
                "selection_both[" + tname + "." + fname + "]");
          }
        }
      }

      // fronted-preposition projection for passive phrases ("by whom is
      // ENTITY employed"); a low-priority question-structure variant
      if (schema.table(tname)->fields.count("name")) {
        int pi = 0;
        for (const auto& phrase : fdef.annotations.get(Pos::passive_verb)) {
          const std::string tail = " by #";
          if (phrase.size() <= tail.size() ||
              phrase.compare(phrase.size() - tail.size(), tail.size(), tail) != 0)
            continue;
          const std::string stem = phrase.substr(0, phrase.size() - tail.size());
          add("pos-structure/fronted-prep:" + tname + "." + fname + "/" + std::to_string(pi++),
              "pos-structure", "question",
              {RhsItem::lit("by whom is"), RhsItem::nt("e", "entity:" + tname),
               RhsItem::lit(stem)},
              [bits](const SemContext& ctx) -> std::optional<Derivation> {
                Derivation d;
                d.value = build::project({bits.name}, ctx.ast(0));
                d.base_table = ctx.child(0).base_table;
                return d;
              },
              "projection_fronted[" + tname + "." + fname + "]");
        }
      }

      // reverse-direction phrases swap selection and projection roles
      add_reverse(tname, fname, fdef, bits);
      (void)row_tag;
    }
  }

  void add_reverse(const std::string& tname, const std::string& fname, const FieldDef& fdef,
                   const FieldBits& bits) {
    const std::string table_nt = "table:" + tname;
    const std::string value_nt = "value:" + tname + "." + fname;
    const bool has_entity = schema.table(tname) && schema.table(tname)->fields.count("name");
    int k = 0;
    for (const auto& phrase : fdef.reverse_annotations.get(Pos::active_verb)) {
      const std::string suffix =
          ":" + tname + "." + fname + "/rev" + std::to_string(k++);
      const auto hash = phrase.find('#');
      const std::string stem =
          hash == std::string::npos ? phrase : phrase.substr(0, hash) + phrase.substr(hash + 1);
      // selection: "people that VALUE employs"
      add("pos-structure/rev-verb-sel" + suffix, "pos-structure", table_nt,
          {RhsItem::nt("t", table_nt), RhsItem::lit("that"), RhsItem::nt("v", value_nt),
           RhsItem::lit(stem)},
          [bits](const SemContext& ctx) -> std::optional<Derivation> {
            Derivation d;
            d.value = build::where(ctx.ast(0), field_cmp(bits, ctx.value(1)));
            d.base_table = ctx.child(0).base_table;
            if (!bits.is_array) d.eq_fields.insert(bits.name);
            return d;
          },
          "selection_rev[" + tname + "." + fname + "]");
      // projection: "who employs ENTITY" -> the field value of that entity
      if (hash != std::string::npos && has_entity) {
        std::vector<RhsItem> items{RhsItem::lit("who")};
        phrase_items(phrase, "entity:" + tname, items);
        add("pos-structure/rev-verb-proj" + suffix, "pos-structure", "question", std::move(items),
            [bits](const SemContext& ctx) -> std::optional<Derivation> {
              Derivation d;
              d.value = build::project({bits.name}, ctx.ast(0));
              d.base_table = ctx.child(0).base_table;
              return d;
            },
            "projection_rev[" + tname + "." + fname + "]");
      }
    }
    k = 0;
    for (const auto& phrase : fdef.reverse_annotations.get(Pos::is_a_noun)) {
      if (!has_entity) break;
      const std::string suffix = ":" + tname + "." + fname + "/revisnp" + std::to_string(k++);
      std::vector<RhsItem> items{RhsItem::lit("who is the")};
      if (!phrase_items(phrase, "entity:" + tname, items)) continue;
      add("pos-structure/rev-isnp-proj" + suffix, "pos-structure", "question", std::move(items),
          [bits](const SemContext& ctx) -> std::optional<Derivation> {
            Derivation d;
            d.value = build::project({bits.name}, ctx.ast(0));
            d.base_table = ctx.child(0).base_table;
            return d;
          },
          "projection_rev[" + tname + "." + fname + "]");
    }
    k = 0;
    for (const auto& phrase : fdef.reverse_annotations.get(Pos::has_a_noun)) {
      if (!has_entity) break;
      const std::string suffix = ":" + tname + "." + fname + "/revhasnp" + std::to_string(k++);
      std::vector<RhsItem> items{RhsItem::lit("who has")};
      if (!phrase_items(phrase, "entity:" + tname, items)) continue;
      add("pos-structure/rev-hasnp-proj" + suffix, "pos-structure", "question", std::move(items),
          [bits](const SemContext& ctx) -> std::optional<Derivation> {
            Derivation d;
            d.value = build::project({bits.name}, ctx.ast(0));
            d.base_table = ctx.child(0).base_table;
            return d;
          },
          "projection_rev[" + tname + "." + fname + "]");
    }
  }

  // --- joins and quantifiers ----------------------------------------------------

  void add_links(const std::string& tname, const TableDef& tdef) {
    for (const auto& [fname, fdef] : tdef.fields) {
      if (!fdef.is_array || fdef.type.kind != TypeTag::Kind::entity_ref) continue;
      const std::string target = fdef.type.table;
      if (!schema.has_table(target)) continue;
      const std::string link = fname;

      // "the [reviews with ...] of [restaurants with ...]"
      add("canonical-join/" + tname + "." + fname, "canonical-join", "table:" + target,
          {RhsItem::lit("the"), RhsItem::nt("t1", "table:" + target), RhsItem::lit("of"),
           RhsItem::nt("t2", "table:" + tname)},
          [link, target](const SemContext& ctx) -> std::optional<Derivation> {
            if (starts_with_the(ctx.child(0))) return std::nullopt;
            Derivation d;
            d.value = build::where(
                build::join(ctx.ast(1), ctx.ast(0)),
                build::cmp(Value::field("id"), CmpOp::in_array, Value::field(link)));
            d.base_table = target;
            return d;
          },
          "join_link[" + tname + "." + fname + "]");

      // "[restaurants with ...] with [reviews with ...]" / "... with no ..."
      auto quant_sem = [link, tname](bool negated) {
        return [link, tname, negated](const SemContext& ctx) -> std::optional<Derivation> {
          if (starts_with_the(ctx.child(1))) return std::nullopt;
          FilterPtr inner =
              build::cmp(Value::field("id"), CmpOp::in_array, Value::field(link));
          FilterPtr filter = build::exists(ctx.ast(1), std::move(inner));
          if (negated) filter = build::f_not(std::move(filter));
          Derivation d;
          d.value = build::where(ctx.ast(0), std::move(filter));
          d.base_table = tname;
          return d;
        };
      };
      add("canonical-quantifier/with:" + tname + "." + fname, "canonical-quantifier",
          "table:" + tname,
          {RhsItem::nt("t2", "table:" + tname), RhsItem::lit("with"),
           RhsItem::nt("t1", "table:" + target)},
          quant_sem(false), "exists_link[" + tname + "." + fname + "]");
      add("canonical-quantifier/without:" + tname + "." + fname, "canonical-quantifier",
          "table:" + tname,
          {RhsItem::nt("t2", "table:" + tname), RhsItem::lit("with no"),
           RhsItem::nt("t1", "table:" + target)},
          quant_sem(true), "not_exists_link[" + tname + "." + fname + "]");
    }
  }

  // --- frefs: projections, aggregations, row-wise computations --------------------

  void add_frefs(const std::string& tname, const TableDef& tdef) {
    const std::string table_nt = "table:" + tname;
    const std::string fref_nt = "fref:" + tname;
    const std::string entity_nt = "entity:" + tname;
    const bool has_entity = tdef.fields.count("name") > 0;

    add("canonical-aggregation/count:" + tname, "canonical-aggregation", fref_nt,
        {RhsItem::lit("the number of"), RhsItem::nt("t", table_nt)},
        [](const SemContext& ctx) -> std::optional<Derivation> {
          Derivation d;
          d.value = build::aggregate(AggOp::count, std::nullopt, ctx.ast(0));
          d.base_table = ctx.child(0).base_table;
          d.result_type = TypeTag::number();
          return d;
        },
        "aggregate_count");

    std::vector<std::pair<std::string, std::string>> first_bases;  // field -> base phrase

    for (const auto& [fname, fdef] : tdef.fields) {
      const auto& bases = fdef.annotations.get(Pos::base);
      if (bases.empty()) continue;
      first_bases.emplace_back(fname, bases.front());
      const TypeTag row_tag = fdef.row_tag();
      int bi = 0;
      for (const auto& base : bases) {
        const std::string suffix = ":" + tname + "." + fname + "/" + std::to_string(bi++);
        const std::string field_name = fname;

        if (has_entity) {
          add("canonical-projection/field" + suffix, "canonical-projection", fref_nt,
              {RhsItem::lit("the " + base + " of"), RhsItem::nt("e", entity_nt)},
              [field_name, row_tag](const SemContext& ctx) -> std::optional<Derivation> {
                Derivation d;
                d.value = build::project({field_name}, ctx.ast(0));
                d.base_table = ctx.child(0).base_table;
                d.result_type = row_tag;
                return d;
              },
              "projection[" + tname + "." + fname + "]");

          // interrogative pronoun forms, chosen by the projected type
          const std::string pron = pronoun_for(row_tag, schema);
          if (pron == "where") {
            add("interrogative-pronoun/where" + suffix, "interrogative-pronoun", "question",
                {RhsItem::lit("where is"), RhsItem::nt("e", entity_nt)},
                [field_name](const SemContext& ctx) -> std::optional<Derivation> {
                  Derivation d;
                  d.value = build::project({field_name}, ctx.ast(0));
                  d.base_table = ctx.child(0).base_table;
                  return d;
                },
                "projection[" + tname + "." + fname + "]");
          } else if (pron == "when") {
            add("interrogative-pronoun/when" + suffix, "interrogative-pronoun", "question",
                {RhsItem::lit("when is the " + base + " of"), RhsItem::nt("e", entity_nt)},
                [field_name](const SemContext& ctx) -> std::optional<Derivation> {
                  Derivation d;
                  d.value = build::project({field_name}, ctx.ast(0));
                  d.base_table = ctx.child(0).base_table;
                  return d;
                },
                "projection[" + tname + "." + fname + "]");
          } else if (pron == "who") {
            add("interrogative-pronoun/who" + suffix, "interrogative-pronoun", "question",
                {RhsItem::lit("who is the " + base + " of"), RhsItem::nt("e", entity_nt)},
                [field_name](const SemContext& ctx) -> std::optional<Derivation> {
                  Derivation d;
                  d.value = build::project({field_name}, ctx.ast(0));
                  d.base_table = ctx.child(0).base_table;
                  return d;
                },
                "projection[" + tname + "." + fname + "]");
          }
        }

        if (!fdef.is_array && fdef.type.is_numeric()) {
          auto agg_sem = [field_name, row_tag](AggOp op) {
            return [field_name, row_tag, op](const SemContext& ctx) -> std::optional<Derivation> {
              Derivation d;
              d.value = build::aggregate(op, field_name, ctx.ast(0));
              d.base_table = ctx.child(0).base_table;
              d.result_type = op == AggOp::count ? TypeTag::number() : row_tag;
              return d;
            };
          };
          add("canonical-aggregation/avg" + suffix, "canonical-aggregation", fref_nt,
              {RhsItem::lit("the average " + base + " of"), RhsItem::nt("t", table_nt)},
              agg_sem(AggOp::avg), "aggregate_avg[" + tname + "." + fname + "]");
          add("canonical-aggregation/sum" + suffix, "canonical-aggregation", fref_nt,
              {RhsItem::lit("the total " + base + " of"), RhsItem::nt("t", table_nt)},
              agg_sem(AggOp::sum), "aggregate_sum[" + tname + "." + fname + "]");
        }
        if (!fdef.is_array && fdef.type.is_ordered()) {
          auto agg_sem = [field_name, row_tag](AggOp op) {
            return [field_name, row_tag, op](const SemContext& ctx) -> std::optional<Derivation> {
              Derivation d;
              d.value = build::aggregate(op, field_name, ctx.ast(0));
              d.base_table = ctx.child(0).base_table;
              d.result_type = row_tag;
              return d;
            };
          };
          add("canonical-aggregation/min" + suffix, "canonical-aggregation", fref_nt,
              {RhsItem::lit("the minimum " + base + " of"), RhsItem::nt("t", table_nt)},
              agg_sem(AggOp::min), "aggregate_min[" + tname + "." + fname + "]");
          add("canonical-aggregation/max" + suffix, "canonical-aggregation", fref_nt,
              {RhsItem::lit("the maximum " + base + " of"), RhsItem::nt("t", table_nt)},
              agg_sem(AggOp::max), "aggregate_max[" + tname + "." + fname + "]");
        }
        if (fdef.is_array) {
          add("canonical-rowwise/count-in" + suffix, "canonical-rowwise", fref_nt,
              {RhsItem::lit("the number of " + base + " in"), RhsItem::nt("t", table_nt)},
              [field_name](const SemContext& ctx) -> std::optional<Derivation> {
                Derivation d;
                d.value = build::compute(build::agg_array(AggOp::count, field_name), std::nullopt,
                                         ctx.ast(0));
                d.base_table = ctx.child(0).base_table;
                d.result_type = TypeTag::number();
                return d;
              },
              "compute_count[" + tname + "." + fname + "]");
          if (has_entity) {
            add("canonical-rowwise/how-many" + suffix, "canonical-rowwise", "question",
                {RhsItem::lit("how many " + base + " does"), RhsItem::nt("e", entity_nt),
                 RhsItem::lit("have")},
                [field_name](const SemContext& ctx) -> std::optional<Derivation> {
                  Derivation d;
                  d.value = build::project(
                      {"count"}, build::compute(build::agg_array(AggOp::count, field_name),
                                                std::nullopt, ctx.ast(0)));
                  d.base_table = ctx.child(0).base_table;
                  return d;
                },
                "compute_count[" + tname + "." + fname + "]");
          }
        }
      }
    }

    // two-field projection; flagged by the dev-set analysis as a gap in
    // generic templates, kept here as an ordinary form
    if (has_entity) {
      for (size_t i = 0; i < first_bases.size(); ++i) {
        for (size_t j = i + 1; j < first_bases.size() && j <= i + 2; ++j) {
          const auto& [f1, b1] = first_bases[i];
          const auto& [f2, b2] = first_bases[j];
          const std::vector<std::string> both{f1, f2};
          add("canonical-projection/pair:" + tname + "." + f1 + "+" + f2, "canonical-projection",
              fref_nt,
              {RhsItem::lit("the " + b1 + " and the " + b2 + " of"), RhsItem::nt("e", entity_nt)},
              [both](const SemContext& ctx) -> std::optional<Derivation> {
                Derivation d;
                d.value = build::project(both, ctx.ast(0));
                d.base_table = ctx.child(0).base_table;
                return d;
              },
              "projection2[" + tname + "." + f1 + "," + f2 + "]");
        }
      }
    }

    // distance forms need a location field
    if (auto geo = schema.location_field(tname)) {
      const std::string geo_field = *geo;
      add("canonical-rowwise/distance:" + tname, "canonical-rowwise", fref_nt,
          {RhsItem::lit("the distance of"), RhsItem::nt("t", table_nt),
           RhsItem::lit("from here")},
          [geo_field](const SemContext& ctx) -> std::optional<Derivation> {
            Derivation d;
            d.value = build::compute(
                build::distance(build::val(Value::field(geo_field)), build::val(Value::here())),
                std::nullopt, ctx.ast(0));
            d.base_table = ctx.child(0).base_table;
            d.result_type = TypeTag::measure(Dimension::distance);
            return d;
          },
          "compute_distance[" + tname + "]");
      auto how_far = [geo_field](const SemContext& ctx) -> std::optional<Derivation> {
        Derivation d;
        d.value = build::compute(
            build::distance(build::val(Value::field(geo_field)), build::val(Value::here())),
            std::nullopt, ctx.ast(0));
        d.base_table = ctx.child(0).base_table;
        return d;
      };
      add("shortened-distance/how-far-table:" + tname, "shortened-distance", "question",
          {RhsItem::lit("how far is"), RhsItem::nt("t", table_nt)}, how_far,
          "compute_distance[" + tname + "]");
      if (has_entity)
        add("shortened-distance/how-far-entity:" + tname, "shortened-distance", "question",
            {RhsItem::lit("how far is"), RhsItem::nt("e", entity_nt)}, how_far,
            "compute_distance[" + tname + "]");
      for (const char* word : {"nearest", "closest"}) {
        add(std::string("shortened-distance/") + word + ":" + tname, "shortened-distance",
            table_nt, {RhsItem::lit(std::string("the ") + word), RhsItem::nt("t", table_nt)},
            [geo_field](const SemContext& ctx) -> std::optional<Derivation> {
              if (starts_with_the(ctx.child(0))) return std::nullopt;
              Derivation d;
              d.value = build::index(
                  build::sort("distance", SortDir::asc,
                              build::compute(build::distance(build::val(Value::field(geo_field)),
                                                             build::val(Value::here())),
                                             std::nullopt, ctx.ast(0))),
                  Value::number(1));
              d.base_table = ctx.child(0).base_table;
              return d;
            },
            std::string("nearest[") + tname + "]");
      }
    }
  }

  // --- question wrappers -----------------------------------------------------

  void add_questions(const std::string& tname, const TableDef& tdef) {
    const std::string table_nt = "table:" + tname;
    const std::string fref_nt = "fref:" + tname;

    auto pass_bare = [](std::string base_table) {
      return [base_table](const SemContext& ctx) -> std::optional<Derivation> {
        if (starts_with_the(ctx.child(0))) return std::nullopt;
        Derivation d;
        d.value = ctx.ast(0);
        d.base_table = base_table;
        return d;
      };
    };
    auto pass_ranked = [](std::string base_table) {
      return [base_table](const SemContext& ctx) -> std::optional<Derivation> {
        if (!starts_with_the(ctx.child(0))) return std::nullopt;
        Derivation d;
        d.value = ctx.ast(0);
        d.base_table = base_table;
        return d;
      };
    };
    for (const auto& [prefix, label] :
         std::vector<std::pair<std::string, std::string>>{{"search for", "imperative"},
                                                          {"find", "imperative"},
                                                          {"show me", "imperative"},
                                                          {"i am looking for", "declarative"}}) {
      add("sentence-type/" + label + ":" + tname + "/" + prefix, "sentence-type", "question",
          {RhsItem::lit(prefix), RhsItem::nt("t", table_nt)}, sem_pass(tname), label);
    }
    add("sentence-type/interrogative:" + tname + "/what are the", "sentence-type", "question",
        {RhsItem::lit("what are the"), RhsItem::nt("t", table_nt)}, pass_bare(tname),
        "interrogative");
    add("sentence-type/interrogative:" + tname + "/what are", "sentence-type", "question",
        {RhsItem::lit("what are"), RhsItem::nt("t", table_nt)}, pass_ranked(tname),
        "interrogative");
    const std::string pron = pronoun_for_table(tname, schema);
    if (pron != "what") {
      add("interrogative-pronoun/table:" + tname, "interrogative-pronoun", "question",
          {RhsItem::lit(pron + " are the"), RhsItem::nt("t", table_nt)}, pass_bare(tname),
          "interrogative");
    }
    add("sentence-type/what-is:" + tname, "sentence-type", "question",
        {RhsItem::lit("what is"), RhsItem::nt("f", fref_nt)}, sem_pass(tname), "interrogative");

    struct QForm {
      const char* mod;
      const char* lead_for_who;
      const char* lead_for_what;
    };
    // selection questions per POS category, in both pronoun flavors
    static const QForm forms[] = {
        {"mod_verb", "who", "which"},
        {"mod_pasv", "who is", "which are"},
        {"mod_isnp", "who is", "which are"},
        {"mod_hasnp", "who has", "which have"},
        {"mod_prep", "who is", "which are"},
        {"mod_adj", "who is", "which are"},
    };
    const bool person = pron == "who";
    for (const auto& form : forms) {
      const std::string lead =
          person ? form.lead_for_who
                 : std::string(form.lead_for_what) + " " +
                       (tdef.canonical_plural.empty() ? tname : tdef.canonical_plural.front());
      add(std::string("pos-structure/q-") + form.mod + ":" + tname, "pos-structure", "question",
          {RhsItem::lit(lead), RhsItem::nt("m", std::string(form.mod) + ":" + tname)},
          [tname](const SemContext& ctx) -> std::optional<Derivation> {
            Derivation d;
            d.value = build::where(build::table(tname), ctx.filter(0));
            d.base_table = tname;
            return d;
          },
          "selection_question[" + tname + "]");
    }

    const auto plurals =
        tdef.canonical_plural.empty() ? std::vector<std::string>{tname} : tdef.canonical_plural;
    add("canonical-aggregation/how-many:" + tname, "canonical-aggregation", "question",
        {RhsItem::lit("how many " + plurals.front() + " are there")},
        [tname](const SemContext&) -> std::optional<Derivation> {
          Derivation d;
          d.value = build::aggregate(AggOp::count, std::nullopt, build::table(tname));
          d.base_table = tname;
          return d;
        },
        "aggregate_count[" + tname + "]");
  }

  void run() {
    // producers before consumers, across all tables, so feasibility checks
    // see the complete set of derivable nonterminals
    add_number_leaf();
    for (const auto& [tname, tdef] : schema.tables) add_leaves(tname, tdef);
    for (const auto& [tname, tdef] : schema.tables) add_modifiers(tname, tdef);
    for (const auto& [tname, tdef] : schema.tables) add_compositions(tname);
    for (const auto& [tname, tdef] : schema.tables) add_field_tables(tname, tdef);
    for (const auto& [tname, tdef] : schema.tables) add_links(tname, tdef);
    for (const auto& [tname, tdef] : schema.tables) add_frefs(tname, tdef);
    for (const auto& [tname, tdef] : schema.tables) add_questions(tname, tdef);
  }
};

}  // namespace

std::vector<Template> builtin_templates(const NlSchema& schema, const LibraryOptions& options) {
  Lib lib{schema, options, {}, nullptr};
  lib.run();
  return std::move(lib.out);
}

}  // namespace dbtalk
