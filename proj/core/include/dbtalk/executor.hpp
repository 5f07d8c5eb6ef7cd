#pragma once

#include <optional>
#include <vector>

#include "dbtalk/ast.hpp"
#include "dbtalk/knowledge_base.hpp"
#include "dbtalk/typecheck.hpp"

namespace dbtalk {

/// User-relative values injected per evaluation; never guessed.
struct EvalContext {
  std::optional<GeoPoint> here;
  std::optional<DateVal> now;
};

struct ResultSet {
  RowType row_type;
  std::vector<Row> rows;
};

/// Evaluates a type-checked query. Relational semantics:
///  - selection filters rows; null cells fail every comparison;
///  - projection keeps the listed fields plus id (when the row has one);
///  - join is the cross product, right side shadowing on collisions;
///  - sort is stable, null keys last;
///  - index/slice are 1-based inclusive and clamp; out of range yields an
///    empty result, not an error;
///  - aggregation returns a single {result} row, sum/avg/min/max skipping
///    nulls (all-null input aggregates to null);
///  - computation appends a field named by the alias or the operator.
/// Throws RuntimeError for failed lookups, division by zero, and missing
/// here/now context.
ResultSet execute(const QueryAst& query, const KnowledgeBase& kb,
                  const NlSchema& schema, const EvalContext& context);

}  // namespace dbtalk
