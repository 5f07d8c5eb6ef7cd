#pragma once

#include <string>
#include <variant>
#include <vector>

#include "dbtalk/types.hpp"

namespace dbtalk {

struct GeoPoint {
  double lat = 0;
  double lon = 0;
  bool operator==(const GeoPoint&) const = default;
};

/// A quantity in SI base units, remembering how it was written so the
/// canonical printer can reproduce the surface tokens ("10 mi").
struct MeasureVal {
  double si = 0;
  Dimension dimension = Dimension::length;
  double display = 0;
  std::string unit = "m";

  /// Equality is physical: same comparison group, same SI magnitude.
  bool operator==(const MeasureVal& other) const;
};

struct CurrencyVal {
  double amount = 0;  // base currency (usd)
  bool operator==(const CurrencyVal&) const = default;
};

struct DateVal {
  std::string iso;  // YYYY-MM-DD
  bool operator==(const DateVal&) const = default;
};

struct TimeVal {
  std::string hms;  // HH:MM:SS
  bool operator==(const TimeVal&) const = default;
};

struct EntityId {
  std::string table;
  std::string id;
  bool operator==(const EntityId&) const = default;
};

struct HereTok {
  bool operator==(const HereTok&) const = default;
};
struct NowTok {
  bool operator==(const NowTok&) const = default;
};

/// `lookup ( " name " , @Table )`. While a query is still in placeholder
/// form the name may be an unresolved slot instead of a literal.
struct LookupRef {
  std::string name;  // lowercased entity name
  std::string table;
  int placeholder = -1;  // >= 0: name is the slot VALUE_<placeholder>
  bool operator==(const LookupRef&) const = default;
};

struct FieldRef {
  std::string name;  // dotted path allowed
  bool operator==(const FieldRef&) const = default;
};

/// Typed hole VALUE_<index>, filled in by the augmenter.
struct Placeholder {
  int index = 0;
  bool operator==(const Placeholder&) const = default;
};

struct Value;
using ValueList = std::vector<Value>;

struct Value {
  // monostate is the null cell.
  std::variant<std::monostate, bool, double, MeasureVal, std::string, DateVal,
               TimeVal, GeoPoint, CurrencyVal, EntityId, HereTok, NowTok,
               LookupRef, FieldRef, ValueList, Placeholder>
      v;

  Value() = default;
  template <typename T>
  Value(T x) : v(std::move(x)) {}

  bool is_null() const { return std::holds_alternative<std::monostate>(v); }
  bool operator==(const Value& other) const { return v == other.v; }

  static Value null() { return Value(); }
  static Value number(double d) { return Value(d); }
  static Value string(std::string s) { return Value(std::move(s)); }
  static Value boolean(bool b) { return Value(b); }
  static Value field(std::string name) { return Value(FieldRef{std::move(name)}); }
  static Value here() { return Value(HereTok{}); }
  static Value now() { return Value(NowTok{}); }
};

/// Shortest decimal form that parses back to the same double ("4.5", "300").
std::string format_number(double value);

/// Lowercases ASCII in place-like fashion; used to normalize string literals,
/// entity names, and sentence tokens.
std::string to_lower(std::string_view s);

}  // namespace dbtalk
