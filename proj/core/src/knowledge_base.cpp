#include "dbtalk/knowledge_base.hpp"

#include <fstream>
#include <set>

#include "dbtalk/errors.hpp"
#include "kb_json.hpp"

namespace dbtalk {

using detail::Json;

const TableData* KnowledgeBase::table(const std::string& name) const {
  auto it = tables.find(name);
  return it == tables.end() ? nullptr : &it->second;
}

void KnowledgeBase::add_row(const std::string& table, Row row) {
  TableData& data = tables[table];
  auto name_it = row.find("name");
  if (name_it != row.end()) {
    if (const auto* s = std::get_if<std::string>(&name_it->second.v))
      data.name_index[to_lower(*s)].push_back(static_cast<int>(data.rows.size()));
  }
  data.rows.push_back(std::move(row));
}

EntityId KnowledgeBase::resolve_lookup(const std::string& name, const std::string& table_name) const {
  const TableData* data = table(table_name);
  if (!data)
    throw RuntimeError(RuntimeError::Kind::lookup_not_found,
                       "no table '" + table_name + "' in the knowledge base");
  auto it = data->name_index.find(to_lower(name));
  if (it == data->name_index.end() || it->second.empty())
    throw RuntimeError(RuntimeError::Kind::lookup_not_found, "'" + name + "' in " + table_name);
  if (it->second.size() > 1)
    throw RuntimeError(RuntimeError::Kind::lookup_ambiguous,
                       "'" + name + "' matches " + std::to_string(it->second.size()) +
                           " rows of " + table_name);
  const Row& row = data->rows[it->second.front()];
  auto id_it = row.find("id");
  if (id_it == row.end() || !std::holds_alternative<EntityId>(id_it->second.v))
    throw RuntimeError(RuntimeError::Kind::lookup_not_found,
                       "'" + name + "' row has no id in " + table_name);
  return std::get<EntityId>(id_it->second.v);
}

namespace {

void warn(std::vector<LoadWarning>* warnings, std::string table, int row, std::string field,
          std::string message) {
  if (warnings)
    warnings->push_back({std::move(table), row, std::move(field), std::move(message)});
}

}  // namespace

KnowledgeBase KnowledgeBase::load_dir(const std::filesystem::path& dir, const NlSchema& schema,
                                      std::vector<LoadWarning>* warnings) {
  KnowledgeBase kb;
  for (const auto& [tname, tdef] : schema.tables) {
    const auto path = dir / (tname + ".json");
    std::ifstream in(path);
    if (!in) {
      warn(warnings, tname, -1, "", "missing table file " + path.string());
      kb.tables[tname];  // empty table
      continue;
    }
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const std::exception& e) {
      throw Error("bad JSON in " + path.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw Error(path.string() + " must hold a JSON array of rows");

    std::set<std::string> seen_ids;
    int row_no = -1;
    for (const auto& jrow : doc) {
      ++row_no;
      if (!jrow.is_object()) {
        warn(warnings, tname, row_no, "", "row is not an object, skipped");
        continue;
      }
      Json flat = Json::object();
      detail::flatten_into(jrow, "", flat);
      if (!flat.contains("id") || !flat["id"].is_string()) {
        warn(warnings, tname, row_no, "id", "missing or non-string id, row skipped");
        continue;
      }
      const std::string id = flat["id"].get<std::string>();
      if (!seen_ids.insert(id).second) {
        warn(warnings, tname, row_no, "id", "duplicate id '" + id + "', row skipped");
        continue;
      }
      Row row;
      row["id"] = Value(EntityId{tname, id});
      for (const auto& [fname, fdef] : tdef.fields) {
        if (!flat.contains(fname)) {
          row[fname] = Value::null();
          continue;
        }
        auto cell = detail::cell_from_json(flat[fname], fdef.row_tag());
        if (!cell) {
          warn(warnings, tname, row_no, fname,
               "value does not match type " + fdef.row_tag().to_string() + ", nulled");
          row[fname] = Value::null();
        } else {
          row[fname] = std::move(*cell);
        }
      }
      kb.add_row(tname, std::move(row));
    }
  }
  return kb;
}

void KnowledgeBase::save_dir(const std::filesystem::path& dir, const NlSchema& schema) const {
  std::filesystem::create_directories(dir);
  for (const auto& [tname, data] : tables) {
    Json arr = Json::array();
    for (const Row& row : data.rows) {
      Json jrow = Json::object();
      for (const auto& [fname, cell] : row) {
        if (fname == "id") {
          if (const auto* e = std::get_if<EntityId>(&cell.v)) jrow["id"] = e->id;
          continue;
        }
        if (cell.is_null()) continue;
        jrow[fname] = detail::cell_to_json(cell);
      }
      arr.push_back(std::move(jrow));
    }
    std::ofstream out(dir / (tname + ".json"));
    if (!out) throw Error("cannot write table file in " + dir.string());
    out << arr.dump(1) << "\n";
  }
  (void)schema;
}

}  // namespace dbtalk
