#include "dbtalk/schema_builder.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <regex>

#include "dbtalk/errors.hpp"
#include "kb_json.hpp"

namespace dbtalk {

using detail::Json;

namespace {

std::vector<std::string> camel_split(const std::string& name) {
  std::vector<std::string> words;
  std::string current;
  for (char c : name) {
    if (std::isupper(static_cast<unsigned char>(c)) && !current.empty()) {
      words.push_back(current);
      current.clear();
    }
    if (c == '_' || c == '-') {
      if (!current.empty()) words.push_back(current);
      current.clear();
      continue;
    }
    current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (!current.empty()) words.push_back(current);
  return words;
}

std::string join_words(const std::vector<std::string>& words, size_t from = 0) {
  std::string out;
  for (size_t i = from; i < words.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

std::string pluralize(const std::string& word) {
  static const std::map<std::string, std::string> irregular = {
      {"person", "people"}, {"child", "children"}, {"man", "men"},
      {"woman", "women"},   {"foot", "feet"},      {"mouse", "mice"},
  };
  if (auto it = irregular.find(word); it != irregular.end()) return it->second;
  if (word.size() > 1) {
    const char last = word.back();
    const char prev = word[word.size() - 2];
    if (last == 'y' && prev != 'a' && prev != 'e' && prev != 'i' && prev != 'o' && prev != 'u')
      return word.substr(0, word.size() - 1) + "ies";
    if (last == 's' || last == 'x' || last == 'z') return word + "es";
    if ((last == 'h') && (prev == 'c' || prev == 's')) return word + "es";
  }
  return word + "s";
}

const std::set<std::string>& verb_lexicon() {
  static const std::set<std::string> verbs = {
      "works",    "serves",   "owns",     "employs",  "offers",   "accepts",  "allows",
      "includes", "provides", "requires", "sells",    "makes",    "produces", "directs",
      "writes",   "sings",    "plays",    "stars",    "features", "publishes", "reviews",
      "rates",    "visits",   "attends",  "teaches",  "treats",   "consults", "manages",
      "leads",    "speaks",   "knows",    "acts",     "performs", "hosts",    "opens",
      "closes",   "delivers", "caters",   "welcomes", "supports", "awards",   "holds",
      "founded",  "created",  "building", "runs",     "studies",  "joins",    "follows",
      "uses",     "wears",    "drives",   "reads",    "edits",    "records",  "releases",
      "presents", "operates", "locates",  "belongs",  "contains",
  };
  return verbs;
}

bool is_preposition(const std::string& word) {
  static const std::set<std::string> preps = {"for", "by", "at", "in", "of",
                                              "to",  "with", "from", "on", "about"};
  return preps.count(word) > 0;
}

/// Schema.org primitive ranges and the classes that behave like primitives.
std::optional<TypeTag> primitive_range(const std::string& range, const SchemaGraph& graph) {
  if (range == "Number" || range == "Integer" || range == "Float") return TypeTag::number();
  if (range == "Boolean") return TypeTag::boolean();
  if (range == "Date" || range == "DateTime") return TypeTag::date();
  if (range == "Time") return TypeTag::time();
  if (range == "GeoCoordinates" || range == "GeoShape") return TypeTag::location();
  if (range == "Distance") return TypeTag::measure(Dimension::distance);
  if (range == "Duration") return TypeTag::measure(Dimension::duration);
  if (range == "Mass") return TypeTag::measure(Dimension::weight);
  if (range == "Energy") return TypeTag::measure(Dimension::temperature);
  if (range == "MonetaryAmount" || range == "PriceSpecification") return TypeTag::currency();
  if (range == "URL") return TypeTag::string();
  auto it = graph.classes.find(range);
  if (it != graph.classes.end() && !it->second.members.empty() &&
      graph.is_subclass_of(range, "Enumeration")) {
    std::vector<std::string> members;
    for (const auto& m : it->second.members) members.push_back(to_lower(m));
    return TypeTag::enumeration(std::move(members));
  }
  return std::nullopt;
}

}  // namespace

std::set<std::string> classify_entities(const SchemaGraph& graph, const BuilderConfig& config) {
  std::set<std::string> entities;
  for (const auto& [name, def] : graph.classes) {
    for (const auto& root : config.entity_roots) {
      if (graph.is_subclass_of(name, root)) {
        entities.insert(name);
        break;
      }
    }
  }
  for (const auto& [name, is_entity] : config.entity_overrides) {
    if (!graph.has_class(name))
      throw ConfigError("entity override names unknown class '" + name + "'");
    if (is_entity)
      entities.insert(name);
    else
      entities.erase(name);
  }
  return entities;
}

TypeTag resolve_type(const std::vector<std::string>& ranges, const SchemaGraph& graph,
                     const std::set<std::string>& entities, const std::set<std::string>& promoted) {
  // record types first
  for (const auto& range : ranges) {
    if (range == "Text" || primitive_range(range, graph)) continue;
    if (!graph.has_class(range)) continue;
    if (entities.count(range)) continue;
    if (promoted.count(range)) return TypeTag::entity_ref(range);
    return TypeTag::record({});
  }
  // then primitives
  for (const auto& range : ranges)
    if (auto t = primitive_range(range, graph)) return *t;
  // then entity references
  for (const auto& range : ranges)
    if (entities.count(range)) return TypeTag::entity_ref(range);
  // Text is implicitly in every range
  return TypeTag::string();
}

bool infer_cardinality(const std::string& property, const std::string& range_hint,
                       const std::string& comment, bool observed_array,
                       const BuilderConfig& config) {
  std::string leaf = property;
  if (auto dot = leaf.rfind('.'); dot != std::string::npos) leaf = leaf.substr(dot + 1);
  if (config.singular_overrides.count(leaf)) return false;
  if (range_hint == "ItemList") return true;
  static const std::regex plural_lead(R"(^(the )?\w+s\b)", std::regex::icase);
  const std::string lowered = to_lower(comment);
  if (std::regex_search(lowered, plural_lead)) return true;
  if (lowered.find("one or more") != std::string::npos) return true;
  if (lowered.find("list of") != std::string::npos) return true;
  return observed_array;
}

AnnotationSet auto_annotate(const std::string& field_path, const TypeTag& type,
                            const std::string& table_name) {
  std::string leaf = field_path;
  std::string parent;
  if (auto dot = leaf.rfind('.'); dot != std::string::npos) {
    parent = leaf.substr(0, dot);
    if (auto pdot = parent.rfind('.'); pdot != std::string::npos) parent = parent.substr(pdot + 1);
    leaf = leaf.substr(dot + 1);
  }
  std::vector<std::string> words = camel_split(leaf);
  AnnotationSet out;
  if (words.empty()) {
    out.add(Pos::base, to_lower(leaf));
    return out;
  }

  // drop the table or parent-record name when the field repeats it
  const auto table_words = camel_split(table_name);
  const auto parent_words = camel_split(parent);
  if (words.size() > 1 && !table_words.empty() && words.front() == table_words.back())
    words.erase(words.begin());
  if (words.size() > 1 && !parent_words.empty() && words.front() == parent_words.front())
    words.erase(words.begin());
  // trailing "value"/"content" carry no meaning
  while (words.size() > 1 && (words.back() == "value" || words.back() == "content"))
    words.pop_back();

  const bool value_bearing = type.kind != TypeTag::Kind::boolean &&
                             type.kind != TypeTag::Kind::location;

  if (words.front() == "has" && words.size() > 1) {
    out.add(Pos::has_a_noun, join_words(words, 1) + (value_bearing ? " #" : ""));
    out.add(Pos::base, join_words(words, 1));
    return out;
  }
  if (words.front() == "is" && words.size() > 1) {
    out.add(Pos::is_a_noun, join_words(words, 1));
    out.add(Pos::base, join_words(words, 1));
    return out;
  }
  if (verb_lexicon().count(words.front())) {
    bool rest_preps = true;
    for (size_t i = 1; i < words.size(); ++i)
      if (!is_preposition(words[i])) rest_preps = false;
    if (rest_preps) {
      out.add(Pos::active_verb, join_words(words) + " #");
    } else {
      out.add(Pos::active_verb, words.front() + " # " + join_words(words, 1));
      out.add(Pos::base, join_words(words, 1));
    }
    return out;
  }

  const std::string noun = join_words(words);
  out.add(Pos::base, noun);
  static const std::set<std::string> identity_fields = {"name", "url", "image", "description"};
  if (value_bearing && !identity_fields.count(leaf) && !type.is_array())
    out.add(Pos::has_a_noun, "# " + noun);
  else if (value_bearing && type.is_array())
    out.add(Pos::has_a_noun, "# " + noun);
  return out;
}

std::vector<std::filesystem::path> list_data_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) throw Error("not a data directory: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

namespace {

struct Observation {
  int count = 0;
  bool saw_array = false;
  bool saw_object = false;
};

struct Builder {
  const SchemaGraph& graph;
  const BuilderConfig& config;
  std::set<std::string> entities;
  std::set<std::string> promoted;
  std::vector<std::string> warnings;

  std::map<std::string, std::map<std::string, Observation>> observed;
  std::map<std::string, std::vector<Json>> instances;       // class -> deduped instances
  std::map<std::string, std::map<std::string, std::string>> identity;  // class -> key -> id
  std::map<std::string, int> id_counter;
  std::map<std::string, std::vector<std::string>> stub_names;  // class -> names needing stub rows
  std::set<std::string> warned_properties;

  void warn_once(const std::string& key, const std::string& message) {
    if (warned_properties.insert(key).second) warnings.push_back(message);
  }

  /// Non-entity classes that can reach themselves through non-entity ranges
  /// get their own tables instead of an infinitely unfolding record.
  void compute_promotions() {
    for (const auto& [cls, def] : graph.classes) {
      if (entities.count(cls)) continue;
      std::set<std::string> seen;
      std::vector<std::string> stack{cls};
      bool cyclic = false;
      while (!stack.empty() && !cyclic) {
        std::string cur = std::move(stack.back());
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        for (const auto& prop : graph.properties_of(cur)) {
          for (const auto& range : graph.properties.at(prop).ranges) {
            if (!graph.has_class(range) || entities.count(range)) continue;
            if (primitive_range(range, graph)) continue;
            if (range == cls) {
              cyclic = true;
              break;
            }
            stack.push_back(range);
          }
          if (cyclic) break;
        }
      }
      if (cyclic) promoted.insert(cls);
    }
  }

  bool entity_like(const std::string& cls) const {
    return entities.count(cls) > 0 || promoted.count(cls) > 0;
  }

  /// Class an untyped nested object under `property` most plausibly is.
  std::string nested_class(const std::string& property) const {
    auto it = graph.properties.find(property);
    if (it == graph.properties.end()) return "";
    for (const auto& range : it->second.ranges)
      if (graph.has_class(range) && !primitive_range(range, graph)) return range;
    return "";
  }

  std::string identity_key(const Json& obj) const {
    if (obj.contains("@id") && obj["@id"].is_string()) return obj["@id"].get<std::string>();
    if (obj.contains("name") && obj["name"].is_string())
      return "name:" + to_lower(obj["name"].get<std::string>());
    return "obj:" + obj.dump();
  }

  std::string assign_id(const std::string& cls, const std::string& key) {
    auto& table_ids = identity[cls];
    auto it = table_ids.find(key);
    if (it != table_ids.end()) return it->second;
    std::string id = to_lower(cls) + "-" + std::to_string(++id_counter[cls]);
    table_ids.emplace(key, id);
    return id;
  }

  std::string collect_instance(const Json& obj, const std::string& forced_class) {
    std::string cls = forced_class;
    if (cls.empty() && obj.contains("@type") && obj["@type"].is_string())
      cls = obj["@type"].get<std::string>();
    if (cls.empty()) {
      warn_once("untyped:" + obj.dump().substr(0, 40), "object without @type skipped");
      return "";
    }
    if (!graph.has_class(cls)) {
      warn_once("class:" + cls, "unknown class '" + cls + "' skipped");
      return "";
    }
    if (!entity_like(cls)) {
      warn_once("nonentity:" + cls, "top-level instance of non-entity class '" + cls + "' skipped");
      return "";
    }
    const std::string key = identity_key(obj);
    const bool fresh = identity[cls].count(key) == 0;
    const std::string id = assign_id(cls, key);
    if (fresh) instances[cls].push_back(obj);
    observe(cls, obj, "");
    return id;
  }

  void observe(const std::string& cls, const Json& obj, const std::string& prefix) {
    for (const auto& [raw_key, val] : obj.items()) {
      if (raw_key == "@type" || raw_key == "@id" || raw_key == "@context") continue;
      const std::string path = prefix.empty() ? raw_key : prefix + "." + raw_key;
      Observation& obs = observed[cls][path];
      obs.count += 1;
      if (val.is_array()) obs.saw_array = true;
      auto handle = [&](const Json& item) {
        if (!item.is_object()) return;
        obs.saw_object = true;
        std::string item_cls;
        if (item.contains("@type") && item["@type"].is_string())
          item_cls = item["@type"].get<std::string>();
        if (item_cls.empty()) item_cls = nested_class(raw_key);
        if (!item_cls.empty() && entity_like(item_cls)) {
          collect_instance(item, item_cls);
        } else if (!item.contains("lat") && !item.contains("latitude") &&
                   !item.contains("unit")) {
          observe(cls, item, path);  // record flattening
        }
      };
      if (val.is_array())
        for (const auto& item : val) handle(item);
      else
        handle(val);
    }
  }

  void collect_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read data file: " + path.string());
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const std::exception& e) {
      warnings.push_back("bad JSON in " + path.string() + ": " + e.what());
      return;
    }
    if (doc.is_array())
      for (const auto& item : doc) {
        if (item.is_object()) collect_instance(item, "");
      }
    else if (doc.is_object())
      collect_instance(doc, "");
  }

  const PropertyDef* property(const std::string& name) {
    auto it = graph.properties.find(name);
    return it == graph.properties.end() ? nullptr : &it->second;
  }

  NlSchema make_schema() {
    NlSchema schema;
    for (const auto& [cls, insts] : instances) {
      if (insts.empty()) continue;
      TableDef table;
      const auto words = camel_split(cls);
      std::string singular = join_words(words);
      table.canonical.push_back(singular);
      auto plural_words = words;
      if (!plural_words.empty()) plural_words.back() = pluralize(plural_words.back());
      table.canonical_plural.push_back(join_words(plural_words));
      for (const auto& root : config.entity_roots)
        if (graph.is_subclass_of(cls, root)) {
          table.root = root;
          break;
        }

      const auto& obs_map = observed[cls];
      for (const auto& [path, obs] : obs_map) {
        // skip intermediate record paths; their leaves carry the fields
        bool has_children = false;
        const std::string child_prefix = path + ".";
        for (const auto& [other, _] : obs_map)
          if (other.size() > child_prefix.size() &&
              other.compare(0, child_prefix.size(), child_prefix) == 0)
            has_children = true;

        std::string leaf = path;
        if (auto dot = leaf.rfind('.'); dot != std::string::npos) leaf = leaf.substr(dot + 1);
        const PropertyDef* prop = property(leaf);
        std::vector<std::string> ranges = prop ? prop->ranges : std::vector<std::string>{};
        if (!prop)
          warn_once("prop:" + leaf, "property '" + leaf + "' missing from the vocabulary, kept as text");

        TypeTag type = resolve_type(ranges, graph, entities, promoted);
        if (type.kind == TypeTag::Kind::record) {
          if (!has_children)
            warn_once("opaque:" + cls + "." + path,
                      cls + "." + path + " is an opaque record with no observed fields, dropped");
          continue;  // leaves materialize as dotted fields
        }
        if (has_children) continue;  // typed leaves already cover this subtree
        if (type.kind == TypeTag::Kind::string && obs.saw_object) {
          // nested entity observed under a text-ranged property: reference it
          if (std::string cls2 = nested_class(leaf); !cls2.empty() && entity_like(cls2))
            type = TypeTag::entity_ref(cls2);
        }

        FieldDef field;
        field.type = type;
        field.source_property = leaf;
        const std::string range_hint = ranges.empty() ? "" : ranges.front();
        field.is_array = infer_cardinality(path, range_hint, prop ? prop->comment : "",
                                           obs.saw_array, config);
        field.annotations = auto_annotate(path, field.row_tag(), cls);
        table.fields[path] = std::move(field);
      }
      schema.tables[cls] = std::move(table);
    }

    // tables referenced by entity fields but never observed stay out of the
    // schema unless stub rows get created for them later; those arrive in
    // make_kb, so pre-create their table shells here
    std::vector<std::pair<std::string, std::string>> pending;
    for (const auto& [tname, tdef] : schema.tables)
      for (const auto& [fname, fdef] : tdef.fields)
        if (fdef.type.kind == TypeTag::Kind::entity_ref && !schema.tables.count(fdef.type.table))
          pending.emplace_back(fdef.type.table, tname + "." + fname);
    for (const auto& [cls, via] : pending) {
      if (schema.tables.count(cls)) continue;
      TableDef shell;
      const auto words = camel_split(cls);
      shell.canonical.push_back(join_words(words));
      auto plural_words = words;
      if (!plural_words.empty()) plural_words.back() = pluralize(plural_words.back());
      shell.canonical_plural.push_back(join_words(plural_words));
      FieldDef name_field;
      name_field.type = TypeTag::string();
      name_field.source_property = "name";
      name_field.annotations = auto_annotate("name", TypeTag::string(), cls);
      shell.fields["name"] = std::move(name_field);
      for (const auto& root : config.entity_roots)
        if (graph.is_subclass_of(cls, root)) {
          shell.root = root;
          break;
        }
      schema.tables[cls] = std::move(shell);
    }
    return schema;
  }

  /// Dotted-path extraction from a raw instance; arrays map over elements.
  Json extract(const Json& obj, const std::string& path) {
    const Json* cur = &obj;
    size_t start = 0;
    while (true) {
      const size_t dot = path.find('.', start);
      const std::string seg = path.substr(start, dot == std::string::npos ? dot : dot - start);
      if (cur->is_array()) {
        Json out = Json::array();
        for (const auto& item : *cur) {
          Json sub = extract(item, path.substr(start));
          if (!sub.is_null()) out.push_back(std::move(sub));
        }
        return out;
      }
      if (!cur->is_object() || !cur->contains(seg)) return nullptr;
      cur = &(*cur)[seg];
      if (dot == std::string::npos) return *cur;
      start = dot + 1;
    }
  }

  /// Entity cells: objects map to their assigned ids, bare strings become
  /// stub rows looked up (or created) by name.
  Json entity_cell(const Json& raw, const std::string& target) {
    if (raw.is_object()) {
      const std::string key = identity_key(raw);
      auto it = identity[target].find(key);
      if (it != identity[target].end()) return it->second;
      return nullptr;
    }
    if (raw.is_string()) {
      const std::string name = raw.get<std::string>();
      const std::string key = "name:" + to_lower(name);
      const bool fresh = identity[target].count(key) == 0;
      const std::string id = assign_id(target, key);
      if (fresh) stub_names[target].push_back(name);
      return id;
    }
    return nullptr;
  }

  KnowledgeBase make_kb(const NlSchema& schema) {
    KnowledgeBase kb;
    // pass 1: resolve every entity reference so stubs exist before emission
    for (const auto& [cls, tdef] : schema.tables) {
      for (const Json& inst : instances[cls]) {
        for (const auto& [fname, fdef] : tdef.fields) {
          if (fdef.type.kind != TypeTag::Kind::entity_ref) continue;
          Json raw = extract(inst, fname);
          if (raw.is_null()) continue;
          if (raw.is_array())
            for (const auto& item : raw) entity_cell(item, fdef.type.table);
          else
            entity_cell(raw, fdef.type.table);
        }
      }
    }
    // pass 2: emit rows
    for (const auto& [cls, tdef] : schema.tables) {
      kb.tables[cls];
      for (const Json& inst : instances[cls]) {
        const std::string id = identity[cls].at(identity_key(inst));
        Row row;
        row["id"] = Value(EntityId{cls, id});
        for (const auto& [fname, fdef] : tdef.fields) {
          Json raw = extract(inst, fname);
          if (raw.is_null()) {
            row[fname] = Value::null();
            continue;
          }
          if (fdef.type.kind == TypeTag::Kind::entity_ref) {
            Json mapped;
            if (raw.is_array()) {
              mapped = Json::array();
              for (const auto& item : raw) {
                Json cell = entity_cell(item, fdef.type.table);
                if (!cell.is_null()) mapped.push_back(std::move(cell));
              }
            } else {
              mapped = entity_cell(raw, fdef.type.table);
            }
            raw = std::move(mapped);
          }
          auto cell = detail::cell_from_json(raw, fdef.row_tag());
          if (!cell) {
            warn_once("cell:" + cls + "." + fname,
                      cls + "." + fname + " holds data that cannot be coerced to " +
                          fdef.row_tag().to_string() + ", nulled");
            row[fname] = Value::null();
          } else {
            row[fname] = std::move(*cell);
          }
        }
        kb.add_row(cls, std::move(row));
      }
      // stub rows created from bare-name references
      for (const std::string& name : stub_names[cls]) {
        Row row;
        row["id"] = Value(EntityId{cls, identity[cls].at("name:" + to_lower(name))});
        for (const auto& [fname, fdef] : tdef.fields) row[fname] = Value::null();
        row["name"] = Value::string(to_lower(name));
        kb.add_row(cls, std::move(row));
      }
    }
    return kb;
  }
};

}  // namespace

BuildResult build_schema(const SchemaGraph& graph,
                         const std::vector<std::filesystem::path>& data_files,
                         const BuilderConfig& config) {
  Builder builder{graph, config};
  builder.entities = classify_entities(graph, config);
  builder.compute_promotions();
  for (const auto& file : data_files) builder.collect_file(file);
  BuildResult result;
  result.schema = builder.make_schema();
  result.kb = builder.make_kb(result.schema);
  result.warnings = std::move(builder.warnings);
  return result;
}

}  // namespace dbtalk
