#pragma once

#include <random>

#include "dbtalk/ast.hpp"
#include "dbtalk/knowledge_base.hpp"
#include "dbtalk/schema.hpp"

namespace testgen {

struct RandomWorld {
  dbtalk::NlSchema schema;
  dbtalk::KnowledgeBase kb;
};

/// Two-table schema plus instance data with nulls sprinkled in.
RandomWorld make_world(std::mt19937_64& rng, int max_rows);

/// Type-correct query over the world, for oracle-equivalence runs.
dbtalk::AstPtr make_query(std::mt19937_64& rng, const RandomWorld& world, int max_depth);

/// Structurally arbitrary (not necessarily well-typed) query whose values
/// all have a surface form, for parse/print round-trips.
dbtalk::AstPtr make_printable_ast(std::mt19937_64& rng, int max_depth);

}  // namespace testgen
