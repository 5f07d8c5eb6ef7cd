#include "dbtalk/schema.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "dbtalk/errors.hpp"

namespace dbtalk {

using Json = nlohmann::ordered_json;

const char* to_string(Pos pos) {
  switch (pos) {
    case Pos::base: return "base";
    case Pos::has_a_noun: return "has_a_noun";
    case Pos::is_a_noun: return "is_a_noun";
    case Pos::active_verb: return "active_verb";
    case Pos::passive_verb: return "passive_verb";
    case Pos::adjective: return "adjective";
    case Pos::preposition: return "preposition";
  }
  return "?";
}

std::optional<Pos> pos_from_string(const std::string& s) {
  for (int i = 0; i < kPosCount; ++i) {
    Pos pos = static_cast<Pos>(i);
    if (s == to_string(pos)) return pos;
  }
  return std::nullopt;
}

bool AnnotationSet::empty() const {
  for (const auto& [pos, list] : phrases)
    if (!list.empty()) return false;
  return true;
}

const std::vector<std::string>& AnnotationSet::get(Pos pos) const {
  static const std::vector<std::string> none;
  auto it = phrases.find(pos);
  return it == phrases.end() ? none : it->second;
}

void AnnotationSet::add(Pos pos, std::string phrase) {
  auto& list = phrases[pos];
  for (const auto& existing : list)
    if (existing == phrase) return;
  list.push_back(std::move(phrase));
}

AnnotationSet merge_annotations(const AnnotationSet& first, const AnnotationSet& second) {
  AnnotationSet out = first;
  for (const auto& [pos, list] : second.phrases)
    for (const auto& phrase : list) out.add(pos, phrase);
  return out;
}

TypeTag FieldDef::row_tag() const { return is_array ? TypeTag::array(type) : type; }

bool NlSchema::has_table(const std::string& name) const { return tables.count(name) > 0; }

const TableDef* NlSchema::table(const std::string& name) const {
  auto it = tables.find(name);
  return it == tables.end() ? nullptr : &it->second;
}

const FieldDef* NlSchema::field(const std::string& table_name, const std::string& field_name) const {
  const TableDef* t = table(table_name);
  if (!t) return nullptr;
  auto it = t->fields.find(field_name);
  return it == t->fields.end() ? nullptr : &it->second;
}

RowType NlSchema::row_type(const std::string& table_name) const {
  const TableDef* t = table(table_name);
  if (!t) throw Error("unknown table '" + table_name + "'");
  RowType row;
  row["id"] = TypeTag::entity_ref(table_name);
  for (const auto& [name, def] : t->fields) row[name] = def.row_tag();
  return row;
}

std::optional<std::string> NlSchema::location_field(const std::string& table_name) const {
  const TableDef* t = table(table_name);
  if (!t) return std::nullopt;
  for (const auto& [name, def] : t->fields)
    if (!def.is_array && def.type.kind == TypeTag::Kind::location) return name;
  return std::nullopt;
}

namespace {

Json annotations_to_json(const AnnotationSet& set) {
  Json out = Json::object();
  for (const auto& [pos, list] : set.phrases) {
    if (list.empty()) continue;
    out[to_string(pos)] = list;
  }
  return out;
}

AnnotationSet annotations_from_json(const Json& j, const std::string& where) {
  AnnotationSet set;
  for (const auto& [key, list] : j.items()) {
    auto pos = pos_from_string(key);
    if (!pos) throw Error("unknown POS category '" + key + "' in " + where);
    if (!list.is_array()) throw Error("annotation list for " + where + "/" + key + " must be an array");
    for (const auto& phrase : list) set.add(*pos, phrase.get<std::string>());
  }
  return set;
}

}  // namespace

std::string NlSchema::to_json_text() const {
  Json root;
  Json jtables = Json::object();
  for (const auto& [tname, tdef] : tables) {
    Json jt = Json::object();
    if (!tdef.canonical.empty()) jt["canonical"] = tdef.canonical;
    if (!tdef.canonical_plural.empty()) jt["canonical_plural"] = tdef.canonical_plural;
    if (!tdef.root.empty()) jt["root"] = tdef.root;
    Json jfields = Json::object();
    for (const auto& [fname, fdef] : tdef.fields) {
      Json jf;
      jf["type"] = fdef.type.to_string();
      jf["is_array"] = fdef.is_array;
      jf["annotations"] = annotations_to_json(fdef.annotations);
      if (!fdef.reverse_annotations.empty())
        jf["reverse_annotations"] = annotations_to_json(fdef.reverse_annotations);
      if (!fdef.source_property.empty()) jf["source_property"] = fdef.source_property;
      jfields[fname] = std::move(jf);
    }
    jt["fields"] = std::move(jfields);
    jtables[tname] = std::move(jt);
  }
  root["tables"] = std::move(jtables);
  return root.dump(2) + "\n";
}

void NlSchema::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write schema file: " + path.string());
  out << to_json_text();
}

NlSchema NlSchema::from_json_text(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("bad schema JSON: ") + e.what());
  }
  if (!root.contains("tables")) throw Error("schema JSON needs a 'tables' object");
  NlSchema schema;
  for (const auto& [tname, jt] : root["tables"].items()) {
    TableDef table;
    if (jt.contains("canonical")) table.canonical = jt["canonical"].get<std::vector<std::string>>();
    if (jt.contains("canonical_plural"))
      table.canonical_plural = jt["canonical_plural"].get<std::vector<std::string>>();
    if (jt.contains("root")) table.root = jt["root"].get<std::string>();
    if (jt.contains("fields")) {
      for (const auto& [fname, jf] : jt["fields"].items()) {
        FieldDef field;
        // annotation-only overlays may omit the type
        field.type = jf.contains("type") ? TypeTag::from_string(jf["type"].get<std::string>())
                                         : TypeTag::string();
        if (field.type.kind == TypeTag::Kind::array) {
          field.is_array = true;
          field.type = *field.type.element;
        }
        if (jf.contains("is_array")) field.is_array = jf["is_array"].get<bool>();
        if (jf.contains("annotations"))
          field.annotations = annotations_from_json(jf["annotations"], tname + "." + fname);
        if (jf.contains("reverse_annotations"))
          field.reverse_annotations =
              annotations_from_json(jf["reverse_annotations"], tname + "." + fname);
        if (jf.contains("source_property"))
          field.source_property = jf["source_property"].get<std::string>();
        table.fields[fname] = std::move(field);
      }
    }
    schema.tables[tname] = std::move(table);
  }
  return schema;
}

NlSchema NlSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read schema file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

void NlSchema::merge_overlay_text(const std::string& text) {
  NlSchema overlay = from_json_text(text);
  for (auto& [tname, otable] : overlay.tables) {
    auto it = tables.find(tname);
    if (it == tables.end()) {
      tables[tname] = std::move(otable);
      continue;
    }
    TableDef& table = it->second;
    auto merge_list = [](std::vector<std::string> overlay_first, const std::vector<std::string>& rest) {
      for (const auto& item : rest)
        if (std::find(overlay_first.begin(), overlay_first.end(), item) == overlay_first.end())
          overlay_first.push_back(item);
      return overlay_first;
    };
    if (!otable.canonical.empty()) table.canonical = merge_list(otable.canonical, table.canonical);
    if (!otable.canonical_plural.empty())
      table.canonical_plural = merge_list(otable.canonical_plural, table.canonical_plural);
    if (!otable.root.empty()) table.root = otable.root;
    for (auto& [fname, ofield] : otable.fields) {
      auto fit = table.fields.find(fname);
      if (fit == table.fields.end()) {
        table.fields[fname] = std::move(ofield);
        continue;
      }
      // manual phrases first, auto-generated ones after
      fit->second.annotations = merge_annotations(ofield.annotations, fit->second.annotations);
      fit->second.reverse_annotations =
          merge_annotations(ofield.reverse_annotations, fit->second.reverse_annotations);
    }
  }
}

void NlSchema::merge_overlay_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read annotation overlay: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  merge_overlay_text(text);
}

}  // namespace dbtalk
