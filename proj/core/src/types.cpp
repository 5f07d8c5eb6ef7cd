#include "dbtalk/types.hpp"

#include <algorithm>
#include <sstream>

#include "dbtalk/errors.hpp"

namespace dbtalk {

const char* to_string(Dimension d) {
  switch (d) {
    case Dimension::time: return "time";
    case Dimension::duration: return "duration";
    case Dimension::distance: return "distance";
    case Dimension::length: return "length";
    case Dimension::currency: return "currency";
    case Dimension::weight: return "weight";
    case Dimension::speed: return "speed";
    case Dimension::temperature: return "temperature";
  }
  return "?";
}

std::optional<Dimension> dimension_from_string(const std::string& s) {
  static const std::pair<const char*, Dimension> table[] = {
      {"time", Dimension::time},         {"duration", Dimension::duration},
      {"distance", Dimension::distance}, {"length", Dimension::length},
      {"currency", Dimension::currency}, {"weight", Dimension::weight},
      {"speed", Dimension::speed},       {"temperature", Dimension::temperature},
  };
  for (const auto& [name, dim] : table)
    if (s == name) return dim;
  return std::nullopt;
}

TypeTag TypeTag::number() { return TypeTag{.kind = Kind::number}; }
TypeTag TypeTag::measure(Dimension d) { return TypeTag{.kind = Kind::measure, .dimension = d}; }
TypeTag TypeTag::string() { return TypeTag{.kind = Kind::string}; }
TypeTag TypeTag::boolean() { return TypeTag{.kind = Kind::boolean}; }

TypeTag TypeTag::enumeration(std::vector<std::string> members) {
  TypeTag t{.kind = Kind::enumeration};
  t.members = std::move(members);
  return t;
}

TypeTag TypeTag::date() { return TypeTag{.kind = Kind::date}; }
TypeTag TypeTag::time() { return TypeTag{.kind = Kind::time}; }
TypeTag TypeTag::location() { return TypeTag{.kind = Kind::location}; }
TypeTag TypeTag::currency() { return TypeTag{.kind = Kind::currency}; }

TypeTag TypeTag::entity_ref(std::string table) {
  TypeTag t{.kind = Kind::entity_ref};
  t.table = std::move(table);
  return t;
}

TypeTag TypeTag::record(std::vector<std::pair<std::string, TypeTag>> fields) {
  TypeTag t{.kind = Kind::record};
  std::sort(fields.begin(), fields.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  t.fields = std::move(fields);
  return t;
}

TypeTag TypeTag::array(TypeTag element) {
  if (element.kind == Kind::array)
    throw Error("array element type must not itself be an array");
  TypeTag t{.kind = Kind::array};
  t.element = std::make_shared<TypeTag>(std::move(element));
  return t;
}

bool TypeTag::operator==(const TypeTag& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::measure: return dimension == other.dimension;
    case Kind::entity_ref: return table == other.table;
    case Kind::enumeration: return members == other.members;
    case Kind::record: return fields == other.fields;
    case Kind::array: return *element == *other.element;
    default: return true;
  }
}

bool TypeTag::is_ordered() const {
  switch (kind) {
    case Kind::number:
    case Kind::measure:
    case Kind::currency:
    case Kind::date:
    case Kind::time:
      return true;
    default:
      return false;
  }
}

bool TypeTag::is_numeric() const {
  return kind == Kind::number || kind == Kind::measure || kind == Kind::currency;
}

std::string TypeTag::to_string() const {
  switch (kind) {
    case Kind::number: return "number";
    case Kind::string: return "string";
    case Kind::boolean: return "boolean";
    case Kind::date: return "date";
    case Kind::time: return "time";
    case Kind::location: return "location";
    case Kind::currency: return "currency";
    case Kind::measure: return std::string("measure(") + dbtalk::to_string(dimension) + ")";
    case Kind::entity_ref: return "entity(" + table + ")";
    case Kind::enumeration: {
      std::string out = "enum(";
      for (size_t i = 0; i < members.size(); ++i) {
        if (i) out += '|';
        out += members[i];
      }
      return out + ")";
    }
    case Kind::array: return "array(" + element->to_string() + ")";
    case Kind::record: {
      std::string out = "record(";
      for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i].first + ':' + fields[i].second.to_string();
      }
      return out + ")";
    }
  }
  return "?";
}

namespace {

std::string inner_of(const std::string& text, const std::string& head) {
  // "head(...)" -> "..."
  return text.substr(head.size() + 1, text.size() - head.size() - 2);
}

bool has_head(const std::string& text, const std::string& head) {
  return text.size() > head.size() + 1 && text.compare(0, head.size(), head) == 0 &&
         text[head.size()] == '(' && text.back() == ')';
}

}  // namespace

TypeTag TypeTag::from_string(const std::string& text) {
  if (text == "number") return number();
  if (text == "string") return string();
  if (text == "boolean") return boolean();
  if (text == "date") return date();
  if (text == "time") return time();
  if (text == "location") return location();
  if (text == "currency") return currency();
  if (has_head(text, "measure")) {
    auto dim = dimension_from_string(inner_of(text, "measure"));
    if (!dim) throw Error("unknown measure dimension in type: " + text);
    return measure(*dim);
  }
  if (has_head(text, "entity")) return entity_ref(inner_of(text, "entity"));
  if (has_head(text, "enum")) {
    std::vector<std::string> members;
    std::stringstream ss(inner_of(text, "enum"));
    std::string item;
    while (std::getline(ss, item, '|'))
      if (!item.empty()) members.push_back(item);
    return enumeration(std::move(members));
  }
  if (has_head(text, "array")) return array(from_string(inner_of(text, "array")));
  throw Error("unknown type tag: " + text);
}

namespace {

bool same_measure_group(Dimension a, Dimension b) {
  if (a == b) return true;
  auto is_len = [](Dimension d) { return d == Dimension::distance || d == Dimension::length; };
  return is_len(a) && is_len(b);
}

}  // namespace

bool comparable(const TypeTag& a, const TypeTag& b) {
  using K = TypeTag::Kind;
  if (a.kind == K::array || b.kind == K::array || a.kind == K::record || b.kind == K::record)
    return false;
  if (a.kind == b.kind) {
    switch (a.kind) {
      case K::measure: return same_measure_group(a.dimension, b.dimension);
      case K::entity_ref: return a.table == b.table;
      case K::enumeration: return true;  // same lexical space
      default: return true;
    }
  }
  auto stringish = [](const TypeTag& t) {
    return t.kind == K::string || t.kind == K::enumeration;
  };
  if (stringish(a) && stringish(b)) return true;
  auto moneyish = [](const TypeTag& t) {
    return t.kind == K::currency ||
           (t.kind == K::measure && t.dimension == Dimension::currency);
  };
  if (moneyish(a) && moneyish(b)) return true;
  return false;
}

}  // namespace dbtalk
