#pragma once

#include <filesystem>

#include "dbtalk/knowledge_base.hpp"
#include "dbtalk/schema.hpp"

namespace testgen {

inline std::filesystem::path fixture_dir() { return DBTALK_FIXTURE_DIR; }

struct Fixture {
  dbtalk::NlSchema schema;
  dbtalk::KnowledgeBase kb;
};

inline Fixture load_fixture(const std::string& name) {
  Fixture f;
  f.schema = dbtalk::NlSchema::load(fixture_dir() / name / "schema.json");
  f.kb = dbtalk::KnowledgeBase::load_dir(fixture_dir() / name / "kb", f.schema);
  return f;
}

}  // namespace testgen
