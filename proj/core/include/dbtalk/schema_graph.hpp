#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace dbtalk {

struct ClassDef {
  std::vector<std::string> superclasses;
  std::string comment;
  std::vector<std::string> members;  // enumeration classes list their values
};

struct PropertyDef {
  std::vector<std::string> domains;
  std::vector<std::string> ranges;
  std::string comment;
};

/// A Schema.org-style class graph: classes in a multiple-inheritance
/// hierarchy rooted at Thing, properties with domains and ranges.
struct SchemaGraph {
  std::map<std::string, ClassDef> classes;
  std::map<std::string, PropertyDef> properties;

  bool has_class(const std::string& name) const { return classes.count(name) > 0; }

  /// Reflexive-transitive subclass test.
  bool is_subclass_of(const std::string& cls, const std::string& ancestor) const;

  /// Properties whose domain includes the class or any of its ancestors.
  std::vector<std::string> properties_of(const std::string& cls) const;

  static SchemaGraph load(const std::filesystem::path& path);  // throws Error
  static SchemaGraph from_json_text(const std::string& text);
};

}  // namespace dbtalk
