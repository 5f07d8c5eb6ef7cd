#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dbtalk {

/// Physical dimension of a Measure. `distance` and `length` share units and
/// are mutually comparable; they stay distinct because natural language uses
/// different comparison words for them.
enum class Dimension {
  time,
  duration,
  distance,
  length,
  currency,
  weight,
  speed,
  temperature,
};

const char* to_string(Dimension d);
std::optional<Dimension> dimension_from_string(const std::string& s);

/// Static type of a field or value.
struct TypeTag {
  enum class Kind {
    number,
    measure,
    string,
    boolean,
    enumeration,
    date,
    time,
    location,
    currency,
    entity_ref,
    record,
    array,
  };

  Kind kind = Kind::string;
  Dimension dimension = Dimension::length;             // measure only
  std::string table;                                   // entity_ref only
  std::vector<std::string> members;                    // enumeration only
  std::vector<std::pair<std::string, TypeTag>> fields; // record only, sorted by name
  std::shared_ptr<TypeTag> element;                    // array only, never itself an array

  static TypeTag number();
  static TypeTag measure(Dimension d);
  static TypeTag string();
  static TypeTag boolean();
  static TypeTag enumeration(std::vector<std::string> members);
  static TypeTag date();
  static TypeTag time();
  static TypeTag location();
  static TypeTag currency();
  static TypeTag entity_ref(std::string table);
  static TypeTag record(std::vector<std::pair<std::string, TypeTag>> fields);
  static TypeTag array(TypeTag element);  // throws Error on nested arrays

  bool operator==(const TypeTag& other) const;
  bool operator!=(const TypeTag& other) const { return !(*this == other); }

  bool is_array() const { return kind == Kind::array; }
  /// Totally ordered types: number, measure, currency, date, time.
  bool is_ordered() const;
  /// Types sum/avg accepts: number, measure, currency.
  bool is_numeric() const;

  /// Compact text form used in schema files, e.g. "measure(distance)",
  /// "entity(Review)", "enum(cheap|moderate|expensive)", "array(string)".
  std::string to_string() const;
  static TypeTag from_string(const std::string& text);  // throws Error
};

/// Two scalar types that may appear on the two sides of ==, >=, <=.
/// Enum matches string, and currency matches measure(currency);
/// distance and length measures match each other.
bool comparable(const TypeTag& a, const TypeTag& b);

/// Output row shape of a query; table row types always include
/// "id": entity_ref(owning table).
using RowType = std::map<std::string, TypeTag>;

}  // namespace dbtalk
