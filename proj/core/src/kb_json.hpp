#pragma once

// Internal JSON <-> cell conversion shared by the knowledge-base loader and
// the schema builder. Not installed.

#include <optional>
#include <string>

#include <json.hpp>

#include "dbtalk/types.hpp"
#include "dbtalk/value.hpp"

namespace dbtalk::detail {

using Json = nlohmann::ordered_json;

/// Nested objects become dotted keys; {lat,lon} and {value,unit} objects are
/// kept whole because they encode location and measure cells.
void flatten_into(const Json& obj, const std::string& prefix, Json& out);

/// Coerces a JSON value to a typed cell; nullopt when it cannot be coerced.
std::optional<Value> cell_from_json(const Json& j, const TypeTag& type);

Json cell_to_json(const Value& v);

}  // namespace dbtalk::detail
