#include "dbtalk/template_engine.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>

#include "dbtalk/errors.hpp"

namespace dbtalk {

namespace {

std::string kind_of(const std::string& nonterminal) {
  auto colon = nonterminal.find(':');
  return colon == std::string::npos ? nonterminal : nonterminal.substr(0, colon);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t stratum_seed(std::uint64_t seed, const std::string& template_id, int depth) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, &seed, sizeof seed);
  h = fnv1a(h, template_id.data(), template_id.size());
  h = fnv1a(h, &depth, sizeof depth);
  return h;
}

}  // namespace

RhsItem RhsItem::lit(std::string text) {
  RhsItem item;
  item.literal = std::move(text);
  return item;
}

RhsItem RhsItem::nt(std::string var, std::string nonterminal) {
  RhsItem item;
  item.var = std::move(var);
  item.nonterminal = std::move(nonterminal);
  return item;
}

RhsItem RhsItem::slot_item(int index) {
  RhsItem item;
  item.slot = index;
  return item;
}

AstPtr Derivation::ast() const {
  if (const auto* p = std::get_if<AstPtr>(&value)) return *p;
  throw Error("derivation for '" + nonterminal + "' does not hold a query");
}

FilterPtr Derivation::filter() const {
  if (const auto* p = std::get_if<FilterPtr>(&value)) return *p;
  throw Error("derivation for '" + nonterminal + "' does not hold a filter");
}

std::string Derivation::sentence_text() const {
  std::string out;
  for (const auto& tok : sentence) {
    if (!out.empty()) out += ' ';
    if (tok.is_slot())
      out += "VALUE_" + std::to_string(tok.slot);
    else
      out += tok.text;
  }
  return out;
}

AstPtr SemContext::ast(size_t k) const {
  return shift_placeholders(child(k).ast(), child_offsets.at(k));
}

FilterPtr SemContext::filter(size_t k) const {
  return shift_placeholders(child(k).filter(), child_offsets.at(k));
}

Value SemContext::value(size_t k) const {
  const auto* p = std::get_if<Value>(&child(k).value);
  if (!p) throw Error("derivation for '" + child(k).nonterminal + "' does not hold a value");
  return shift_placeholders(*p, child_offsets.at(k));
}

std::optional<Derivation> apply_semfn(const Template& tmpl,
                                      const std::vector<const Derivation*>& children) {
  SemContext ctx;
  ctx.tmpl = &tmpl;
  ctx.children = children;
  int cursor = 0;
  size_t child_i = 0;
  for (const auto& item : tmpl.rhs) {
    if (item.is_slot()) {
      ctx.own_slots.push_back(cursor++);
    } else if (item.is_nonterminal()) {
      if (child_i >= children.size()) throw Error("template '" + tmpl.id + "': missing child");
      ctx.child_offsets.push_back(cursor);
      cursor += static_cast<int>(children[child_i]->slots.size());
      ++child_i;
    }
  }
  if (child_i != children.size()) throw Error("template '" + tmpl.id + "': too many children");

  std::optional<Derivation> result = tmpl.semfn(ctx);
  if (!result) return std::nullopt;

  Derivation d = std::move(*result);
  d.nonterminal = tmpl.lhs;
  d.depth = 1;
  d.sentence.clear();
  d.slots.clear();
  child_i = 0;
  for (const auto& item : tmpl.rhs) {
    if (item.is_literal()) {
      std::istringstream words(item.literal);
      std::string w;
      while (words >> w) d.sentence.push_back({w, -1});
    } else if (item.is_slot()) {
      d.sentence.push_back({"", static_cast<int>(d.slots.size())});
      d.slots.push_back(tmpl.slot_infos.at(item.slot));
    } else {
      const Derivation& c = *children[child_i];
      const int offset = ctx.child_offsets[child_i];
      for (const auto& tok : c.sentence) {
        if (tok.is_slot())
          d.sentence.push_back({"", tok.slot + offset});
        else
          d.sentence.push_back(tok);
      }
      for (const auto& slot : c.slots) d.slots.push_back(slot);
      d.depth = std::max(d.depth, c.depth + 1);
      d.eq_fields.insert(c.eq_fields.begin(), c.eq_fields.end());
      ++child_i;
    }
  }
  d.provenance.clear();
  d.provenance.push_back(tmpl.id);
  for (const auto* c : children)
    d.provenance.insert(d.provenance.end(), c->provenance.begin(), c->provenance.end());
  return d;
}

namespace {

struct Pool {
  std::vector<Derivation> by_depth_flat;  // depths 1..k concatenated
  std::vector<size_t> depth_end;          // prefix sizes; depth_end[d-1] = items of depth <= d
  std::set<std::string> seen_sentences;

  size_t below(int depth) const {  // items with depth < depth
    if (depth <= 1) return 0;
    const size_t idx = static_cast<size_t>(depth) - 2;
    return idx < depth_end.size() ? depth_end[idx] : by_depth_flat.size();
  }
};

}  // namespace

std::vector<Derivation> expand(const std::vector<Template>& templates, const NlSchema& schema,
                               const ExpansionConfig& config) {
  (void)schema;
  std::set<std::string> produced;
  for (const auto& t : templates) produced.insert(t.lhs);
  for (const auto& t : templates)
    for (const auto& item : t.rhs)
      if (item.is_nonterminal() && !produced.count(item.nonterminal))
        throw ConfigError("template '" + t.id + "' uses unknown nonterminal '" + item.nonterminal +
                          "'");

  auto enabled = [&](const std::string& nonterminal) {
    if (config.enabled.empty()) return true;
    return config.enabled.count(nonterminal) > 0 || config.enabled.count(kind_of(nonterminal)) > 0;
  };
  auto target_for = [&](int depth) -> long long {
    if (config.exhaustive) return -1;
    const size_t idx = static_cast<size_t>(depth) - 1;
    if (idx < config.target_sizes.size() && config.target_sizes[idx] > 0)
      return config.target_sizes[idx];
    return config.default_target;
  };

  std::map<std::string, Pool> pools;
  for (const auto& t : templates) {
    pools[t.lhs];
    for (const auto& item : t.rhs)
      if (item.is_nonterminal()) pools[item.nonterminal];
  }
  // collected per depth, appended to pools only when the depth closes, so a
  // depth-d derivation never feeds another depth-d combination
  std::map<std::string, std::vector<Derivation>> fresh;

  constexpr std::uint64_t kEnumerationBudget = 20000;

  for (int depth = 1; depth <= config.max_depth; ++depth) {
    fresh.clear();
    for (const auto& tmpl : templates) {
      if (!enabled(tmpl.lhs)) continue;
      bool skip = false;
      std::vector<const Pool*> child_pools;
      for (const auto& item : tmpl.rhs) {
        if (!item.is_nonterminal()) continue;
        if (!enabled(item.nonterminal)) {
          skip = true;
          break;
        }
        child_pools.push_back(&pools[item.nonterminal]);
      }
      if (skip) continue;
      const size_t arity = child_pools.size();
      if (arity == 0) {
        if (depth != 1) continue;  // leaves fire once
        if (auto d = apply_semfn(tmpl, {})) {
          auto& bucket = fresh[tmpl.lhs];
          auto& seen = pools[tmpl.lhs].seen_sentences;
          if (seen.insert(d->sentence_text()).second) bucket.push_back(std::move(*d));
        }
        continue;
      }
      if (depth == 1) continue;  // composite rules need children from below

      // children come from depths < depth, with at least one at depth-1
      std::vector<size_t> sizes(arity), prev_sizes(arity);
      bool any_empty = false;
      std::uint64_t total = 1, prev_total = 1;
      bool saturated = false;
      for (size_t i = 0; i < arity; ++i) {
        sizes[i] = child_pools[i]->below(depth + 0);       // depth <= depth-1
        prev_sizes[i] = child_pools[i]->below(depth - 1);  // depth <= depth-2
        if (sizes[i] == 0) any_empty = true;
        if (total > kEnumerationBudget)
          saturated = true;
        else
          total *= std::max<size_t>(sizes[i], 1);
        prev_total = std::min<std::uint64_t>(prev_total * std::max<size_t>(prev_sizes[i], 1),
                                             kEnumerationBudget + 1);
      }
      if (any_empty) continue;
      bool all_prev = true;
      for (size_t i = 0; i < arity; ++i)
        if (prev_sizes[i] == 0) all_prev = false;

      const long long quota = target_for(depth);
      std::mt19937_64 rng(stratum_seed(config.seed, tmpl.id, depth));
      const bool enumerate = config.exhaustive || (!saturated && total <= kEnumerationBudget);

      std::vector<std::vector<size_t>> combos;
      if (enumerate) {
        if (all_prev && prev_total >= total && !saturated) continue;  // no fresh combinations
        // enumerate everything; reservoir-sample when over quota
        std::vector<size_t> idx(arity, 0);
        std::uint64_t considered = 0;
        bool done = false;
        while (!done) {
          bool fresh_child = false;
          for (size_t i = 0; i < arity; ++i)
            if (idx[i] >= prev_sizes[i]) fresh_child = true;
          if (fresh_child) {
            ++considered;
            if (quota < 0 || static_cast<long long>(combos.size()) < quota) {
              combos.push_back(idx);
            } else {
              std::uniform_int_distribution<std::uint64_t> pick(0, considered - 1);
              const std::uint64_t j = pick(rng);
              if (j < static_cast<std::uint64_t>(quota)) combos[j] = idx;
            }
          }
          size_t k = arity;
          while (true) {
            if (k == 0) {
              done = true;
              break;
            }
            --k;
            if (++idx[k] < sizes[k]) break;
            idx[k] = 0;
          }
        }
      } else {
        // stratum too large to enumerate: draw each child uniformly, forcing
        // one position into the fresh depth-(d-1) layer
        std::vector<size_t> forced_positions;
        for (size_t i = 0; i < arity; ++i)
          if (sizes[i] > prev_sizes[i]) forced_positions.push_back(i);
        if (forced_positions.empty()) continue;
        std::set<std::vector<size_t>> seen_combos;
        const long long attempts = quota * 3;
        for (long long a = 0; a < attempts && static_cast<long long>(combos.size()) < quota; ++a) {
          std::vector<size_t> idx(arity);
          const size_t forced =
              forced_positions[std::uniform_int_distribution<size_t>(0, forced_positions.size() - 1)(
                  rng)];
          for (size_t i = 0; i < arity; ++i) {
            if (i == forced)
              idx[i] = std::uniform_int_distribution<size_t>(prev_sizes[i], sizes[i] - 1)(rng);
            else
              idx[i] = std::uniform_int_distribution<size_t>(0, sizes[i] - 1)(rng);
          }
          if (seen_combos.insert(idx).second) combos.push_back(std::move(idx));
        }
      }

      auto& bucket = fresh[tmpl.lhs];
      auto& seen = pools[tmpl.lhs].seen_sentences;
      std::vector<const Derivation*> children(arity);
      for (const auto& combo : combos) {
        for (size_t i = 0; i < arity; ++i) children[i] = &child_pools[i]->by_depth_flat[combo[i]];
        auto d = apply_semfn(tmpl, children);
        if (!d) continue;
        if (d->depth > config.max_depth) continue;
        if (!seen.insert(d->sentence_text()).second) continue;
        bucket.push_back(std::move(*d));
      }
    }

    for (auto& [nonterminal, items] : fresh) {
      Pool& pool = pools[nonterminal];
      for (auto& d : items) pool.by_depth_flat.push_back(std::move(d));
    }
    for (auto& [nonterminal, pool] : pools) pool.depth_end.push_back(pool.by_depth_flat.size());
  }

  std::vector<Derivation> out;
  auto it = pools.find(config.root);
  if (it != pools.end()) out = it->second.by_depth_flat;
  std::sort(out.begin(), out.end(), [](const Derivation& a, const Derivation& b) {
    return a.sentence_text() < b.sentence_text();
  });
  return out;
}

// --- template DSL ------------------------------------------------------------

namespace {

std::vector<std::string> dsl_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      if (quoted) {
        out.push_back("\"" + current + "\"");
        current.clear();
      }
      quoted = !quoted;
      continue;
    }
    if (!quoted && std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) out.push_back(current);
      current.clear();
      continue;
    }
    current.push_back(c);
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

}  // namespace

std::string dump_template_dsl(const std::vector<Template>& templates) {
  std::ostringstream out;
  std::string family;
  for (const auto& t : templates) {
    if (t.family != family) {
      family = t.family;
      out << "# family: " << family << "\n";
    }
    out << "rule " << t.lhs << " :=";
    int var = 0;
    for (const auto& item : t.rhs) {
      if (item.is_literal()) {
        out << " \"" << item.literal << "\"";
      } else if (item.is_slot()) {
        out << " <" << t.slot_infos[item.slot].type.to_string() << ">";
      } else {
        out << " " << (item.var.empty() ? "v" + std::to_string(var) : item.var) << ":"
            << item.nonterminal;
        ++var;
      }
    }
    out << " => " << (t.semfn_name.empty() ? "id" : t.semfn_name) << "\n";
  }
  return out.str();
}

namespace {

struct DslRule {
  std::string pos_attribute;
  std::string lhs;
  std::vector<std::pair<std::string, std::string>> items;  // ("lit", text) / ("nt", var:nt)
  std::string semfn;
};

}  // namespace

std::vector<Template> parse_template_dsl(const std::string& text, const NlSchema& schema) {
  std::vector<DslRule> rules;
  std::istringstream in(text);
  std::string line;
  std::string pending_pos;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = dsl_tokens(line);
    if (toks.empty() || toks.front().front() == '#' ) {
      // attribute lines look like #[pos=active_verb]
      if (!toks.empty() && toks.front().rfind("#[pos=", 0) == 0) {
        std::string attr = toks.front().substr(6);
        if (!attr.empty() && attr.back() == ']') attr.pop_back();
        pending_pos = attr;
      }
      continue;
    }
    if (toks.front() != "rule")
      throw ConfigError("template DSL line " + std::to_string(line_no) + ": expected 'rule'");
    DslRule rule;
    rule.pos_attribute = pending_pos;
    pending_pos.clear();
    size_t i = 1;
    if (i >= toks.size()) throw ConfigError("template DSL line " + std::to_string(line_no) + ": missing lhs");
    rule.lhs = toks[i++];
    if (i >= toks.size() || toks[i] != ":=")
      throw ConfigError("template DSL line " + std::to_string(line_no) + ": expected ':='");
    ++i;
    while (i < toks.size() && toks[i] != "=>") {
      const std::string& tok = toks[i++];
      if (tok.front() == '"')
        rule.items.emplace_back("lit", tok.substr(1, tok.size() - 2));
      else
        rule.items.emplace_back("nt", tok);
    }
    if (i >= toks.size()) throw ConfigError("template DSL line " + std::to_string(line_no) + ": missing '=>'");
    ++i;
    for (; i < toks.size(); ++i) rule.semfn += toks[i];
    if (rule.semfn.empty())
      throw ConfigError("template DSL line " + std::to_string(line_no) + ": missing semantic function");
    rules.push_back(std::move(rule));
  }

  // instantiate user rules per table (and per annotation for pos rules)
  std::vector<Template> out;
  int rule_no = 0;
  for (const auto& rule : rules) {
    ++rule_no;
    const std::string fn = rule.semfn.substr(0, rule.semfn.find('('));
    for (const auto& [tname, tdef] : schema.tables) {
      auto instantiate = [&](const std::string& field, const std::string& phrase) {
        Template t;
        t.id = "user-" + std::to_string(rule_no) + ":" + tname +
               (field.empty() ? "" : "." + field + "/" + phrase);
        t.family = "user";
        t.lhs = rule.lhs == "question" || rule.lhs == "number" ? rule.lhs : rule.lhs + ":" + tname;
        bool has_value_item = false;
        for (const auto& [kind, text] : rule.items) {
          if (kind == "lit") {
            t.rhs.push_back(RhsItem::lit(text));
            continue;
          }
          auto colon = text.find(':');
          std::string var = colon == std::string::npos ? "" : text.substr(0, colon);
          std::string nt = colon == std::string::npos ? text : text.substr(colon + 1);
          if (nt == "table") {
            t.rhs.push_back(RhsItem::nt(var, "table:" + tname));
          } else if (nt == "entity") {
            t.rhs.push_back(RhsItem::nt(var, "entity:" + tname));
          } else if (nt == "phrase") {
            // phrase tokens inline; '#' becomes the bound value slot
            std::istringstream words(phrase);
            std::string w;
            while (words >> w) {
              if (w == "#") {
                t.rhs.push_back(RhsItem::slot_item(static_cast<int>(t.slot_infos.size())));
                const FieldDef* fd = schema.field(tname, field);
                SlotInfo slot;
                slot.type = fd ? fd->type : TypeTag::string();
                if (slot.type.kind == TypeTag::Kind::entity_ref) {
                  slot.kind = SlotKind::entity_name;
                  slot.table = slot.type.table;
                  slot.field = "name";
                  slot.type = TypeTag::string();
                } else {
                  slot.table = tname;
                  slot.field = field;
                }
                t.slot_infos.push_back(slot);
                has_value_item = true;
              } else {
                t.rhs.push_back(RhsItem::lit(w));
              }
            }
          } else if (nt == "value") {
            if (rule.pos_attribute.empty())
              throw ConfigError("rule " + std::to_string(rule_no) +
                                ": v:value needs a #[pos=...] attribute");
            if (has_value_item) continue;  // slot already placed inside the phrase
            t.rhs.push_back(RhsItem::slot_item(static_cast<int>(t.slot_infos.size())));
            const FieldDef* fd = schema.field(tname, field);
            SlotInfo slot;
            slot.type = fd ? fd->type : TypeTag::string();
            if (slot.type.kind == TypeTag::Kind::entity_ref) {
              slot.kind = SlotKind::entity_name;
              slot.table = slot.type.table;
              slot.field = "name";
              slot.type = TypeTag::string();
            } else {
              slot.table = tname;
              slot.field = field;
            }
            t.slot_infos.push_back(slot);
            has_value_item = true;
          } else {
            throw ConfigError("rule " + std::to_string(rule_no) + ": unknown nonterminal '" + nt +
                              "' (user rules may use table, entity, phrase, value)");
          }
        }

        const std::string table_name = tname;
        const std::string field_name = field;
        if (fn == "imperative" || fn == "declarative" || fn == "what_question" || fn == "id") {
          t.semfn_name = fn;
          t.semfn = [](const SemContext& ctx) -> std::optional<Derivation> {
            Derivation d;
            d.value = ctx.ast(0);
            d.base_table = ctx.child(0).base_table;
            return d;
          };
        } else if (fn == "filter_field") {
          const FieldDef* fd = schema.field(tname, field);
          if (!fd) return;
          if (!has_value_item && fd->type.kind != TypeTag::Kind::boolean)
            return;  // the phrase carries no value slot and the field needs one
          t.semfn_name = fn + "[" + tname + "." + field + "]";
          const bool is_array = fd->is_array;
          const bool is_entity = fd->type.kind == TypeTag::Kind::entity_ref;
          const std::string ref_table = is_entity ? fd->type.table : "";
          t.semfn = [field_name, is_array, is_entity, ref_table,
                     has_value_item](const SemContext& ctx) -> std::optional<Derivation> {
            Derivation d;
            if (!has_value_item) {
              d.value = build::where(ctx.ast(0), build::cmp(Value::field(field_name), CmpOp::eq,
                                                            Value::boolean(true)));
              d.base_table = ctx.child(0).base_table;
              d.eq_fields.insert(field_name);
              return d;
            }
            CmpOp op = is_array ? CmpOp::contains : CmpOp::eq;
            Value rhs = ctx.own_placeholder(0);
            if (is_entity) {
              LookupRef ref;
              ref.table = ref_table;
              ref.placeholder = std::get<Placeholder>(rhs.v).index;
              rhs = Value(ref);
            }
            Derivation d2;
            d2.value = build::where(ctx.ast(0), build::cmp(Value::field(field_name), op, rhs));
            d2.base_table = ctx.child(0).base_table;
            if (!is_array) d2.eq_fields.insert(field_name);
            return d2;
          };
        } else if (fn == "project_field") {
          t.semfn_name = fn + "[" + tname + "." + field + "]";
          t.semfn = [field_name](const SemContext& ctx) -> std::optional<Derivation> {
            Derivation d;
            d.value = build::project({field_name}, ctx.ast(0));
            d.base_table = ctx.child(0).base_table;
            return d;
          };
        } else {
          throw ConfigError("rule " + std::to_string(rule_no) + ": unknown semantic function '" +
                            fn + "'");
        }
        out.push_back(std::move(t));
      };

      if (rule.pos_attribute.empty()) {
        instantiate("", "");
      } else {
        auto pos = pos_from_string(rule.pos_attribute);
        if (!pos) throw ConfigError("unknown POS attribute '" + rule.pos_attribute + "'");
        for (const auto& [fname, fdef] : tdef.fields)
          for (const auto& phrase : fdef.annotations.get(*pos)) instantiate(fname, phrase);
      }
    }
  }
  return out;
}

}  // namespace dbtalk
