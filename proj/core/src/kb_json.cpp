#include "kb_json.hpp"

#include <algorithm>

#include "dbtalk/units.hpp"

namespace dbtalk::detail {

void flatten_into(const Json& obj, const std::string& prefix, Json& out) {
  for (const auto& [key, val] : obj.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (val.is_object() && !val.contains("lat") && !val.contains("latitude") &&
        !val.contains("value"))
      flatten_into(val, path, out);
    else
      out[path] = val;
  }
}

namespace {

std::optional<Value> scalar_from_json(const Json& j, const TypeTag& type) {
  using Kind = TypeTag::Kind;
  switch (type.kind) {
    case Kind::number:
      if (j.is_number()) return Value::number(j.get<double>());
      if (j.is_string()) {  // dirty data: numeric strings are accepted
        try {
          size_t used = 0;
          const std::string s = j.get<std::string>();
          double d = std::stod(s, &used);
          if (used == s.size()) return Value::number(d);
        } catch (...) {
        }
      }
      return std::nullopt;
    case Kind::string:
      if (j.is_string()) return Value::string(to_lower(j.get<std::string>()));
      if (j.is_number()) return Value::string(format_number(j.get<double>()));
      return std::nullopt;
    case Kind::enumeration: {
      if (!j.is_string()) return std::nullopt;
      std::string s = to_lower(j.get<std::string>());
      if (std::find(type.members.begin(), type.members.end(), s) == type.members.end())
        return std::nullopt;
      return Value::string(std::move(s));
    }
    case Kind::boolean:
      if (j.is_boolean()) return Value::boolean(j.get<bool>());
      if (j.is_string()) {
        const std::string s = to_lower(j.get<std::string>());
        if (s == "true" || s == "yes") return Value::boolean(true);
        if (s == "false" || s == "no") return Value::boolean(false);
      }
      return std::nullopt;
    case Kind::date:
      if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s.size() >= 10) s = s.substr(0, 10);
        if (s.size() == 10 && s[4] == '-' && s[7] == '-') return Value(DateVal{s});
      }
      return std::nullopt;
    case Kind::time:
      if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s.size() == 5) s += ":00";
        if (s.size() == 8 && s[2] == ':' && s[5] == ':') return Value(TimeVal{s});
      }
      return std::nullopt;
    case Kind::location:
      if (j.is_object()) {
        if (j.contains("lat") && j.contains("lon"))
          return Value(GeoPoint{j["lat"].get<double>(), j["lon"].get<double>()});
        if (j.contains("latitude") && j.contains("longitude"))
          return Value(GeoPoint{j["latitude"].get<double>(), j["longitude"].get<double>()});
      }
      return std::nullopt;
    case Kind::currency:
      if (j.is_number()) return Value(CurrencyVal{j.get<double>()});
      if (j.is_object() && j.contains("value")) return Value(CurrencyVal{j["value"].get<double>()});
      return std::nullopt;
    case Kind::measure: {
      if (j.is_number())  // bare numbers are SI base units
        return Value(MeasureVal{j.get<double>(), type.dimension, j.get<double>(), ""});
      if (j.is_object() && j.contains("value") && j.contains("unit")) {
        auto unit = unit_from_token(j["unit"].get<std::string>());
        if (!unit) return std::nullopt;
        double display = j["value"].get<double>();
        return Value(MeasureVal{unit_to_si(*unit, display), unit->dimension, display,
                                j["unit"].get<std::string>()});
      }
      return std::nullopt;
    }
    case Kind::entity_ref:
      if (j.is_string()) return Value(EntityId{type.table, j.get<std::string>()});
      if (j.is_object() && j.contains("id"))
        return Value(EntityId{type.table, j["id"].get<std::string>()});
      return std::nullopt;
    case Kind::record:
    case Kind::array:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Value> cell_from_json(const Json& j, const TypeTag& type) {
  if (j.is_null()) return Value::null();
  if (type.kind == TypeTag::Kind::array) {
    ValueList list;
    if (j.is_array()) {
      for (const auto& item : j) {
        auto v = scalar_from_json(item, *type.element);
        if (!v) return std::nullopt;
        list.push_back(std::move(*v));
      }
    } else {
      auto v = scalar_from_json(j, *type.element);  // scalar data in an array field
      if (!v) return std::nullopt;
      list.push_back(std::move(*v));
    }
    return Value(std::move(list));
  }
  if (j.is_array()) {  // array data in a scalar field: keep the first element
    if (j.empty()) return Value::null();
    return scalar_from_json(j.front(), type);
  }
  return scalar_from_json(j, type);
}

Json cell_to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<T, bool>) return x;
        else if constexpr (std::is_same_v<T, double>) return x;
        else if constexpr (std::is_same_v<T, MeasureVal>) {
          if (x.unit.empty()) return x.si;
          return Json{{"value", x.display}, {"unit", x.unit}};
        } else if constexpr (std::is_same_v<T, std::string>) return x;
        else if constexpr (std::is_same_v<T, DateVal>) return x.iso;
        else if constexpr (std::is_same_v<T, TimeVal>) return x.hms;
        else if constexpr (std::is_same_v<T, GeoPoint>) return Json{{"lat", x.lat}, {"lon", x.lon}};
        else if constexpr (std::is_same_v<T, CurrencyVal>) return x.amount;
        else if constexpr (std::is_same_v<T, EntityId>) return x.id;
        else if constexpr (std::is_same_v<T, ValueList>) {
          Json arr = Json::array();
          for (const auto& item : x) arr.push_back(cell_to_json(item));
          return arr;
        } else {
          return nullptr;  // query-only values never end up in cells
        }
      },
      v.v);
}

}  // namespace dbtalk::detail
