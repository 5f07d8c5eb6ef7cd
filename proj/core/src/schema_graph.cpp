#include "dbtalk/schema_graph.hpp"

#include <fstream>

#include <json.hpp>

#include "dbtalk/errors.hpp"

namespace dbtalk {

using Json = nlohmann::ordered_json;

bool SchemaGraph::is_subclass_of(const std::string& cls, const std::string& ancestor) const {
  if (cls == ancestor) return true;
  std::set<std::string> seen;
  std::vector<std::string> stack{cls};
  while (!stack.empty()) {
    std::string current = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(current).second) continue;
    auto it = classes.find(current);
    if (it == classes.end()) continue;
    for (const auto& super : it->second.superclasses) {
      if (super == ancestor) return true;
      stack.push_back(super);
    }
  }
  return false;
}

std::vector<std::string> SchemaGraph::properties_of(const std::string& cls) const {
  std::vector<std::string> out;
  for (const auto& [name, prop] : properties) {
    for (const auto& domain : prop.domains) {
      if (is_subclass_of(cls, domain)) {
        out.push_back(name);
        break;
      }
    }
  }
  return out;
}

SchemaGraph SchemaGraph::from_json_text(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("bad vocabulary JSON: ") + e.what());
  }
  SchemaGraph graph;
  if (root.contains("classes")) {
    for (const auto& [name, jc] : root["classes"].items()) {
      ClassDef def;
      if (jc.contains("superclasses"))
        def.superclasses = jc["superclasses"].get<std::vector<std::string>>();
      if (jc.contains("comment")) def.comment = jc["comment"].get<std::string>();
      if (jc.contains("members")) def.members = jc["members"].get<std::vector<std::string>>();
      graph.classes[name] = std::move(def);
    }
  }
  if (root.contains("properties")) {
    for (const auto& [name, jp] : root["properties"].items()) {
      PropertyDef def;
      if (jp.contains("domains")) def.domains = jp["domains"].get<std::vector<std::string>>();
      if (jp.contains("ranges")) def.ranges = jp["ranges"].get<std::vector<std::string>>();
      if (jp.contains("comment")) def.comment = jp["comment"].get<std::string>();
      graph.properties[name] = std::move(def);
    }
  }
  return graph;
}

SchemaGraph SchemaGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read vocabulary file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

}  // namespace dbtalk
