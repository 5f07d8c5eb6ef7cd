#include "dbtalk/units.hpp"

#include <map>

#include "dbtalk/errors.hpp"

namespace dbtalk {

namespace {

const std::map<std::string, UnitDef>& unit_table() {
  static const std::map<std::string, UnitDef> table = {
      // distance / length (SI meters); bare literals read as length and the
      // type checker treats length and distance as one comparison group
      {"m", {Dimension::length, 1.0}},
      {"cm", {Dimension::length, 0.01}},
      {"km", {Dimension::length, 1000.0}},
      {"mi", {Dimension::length, 1609.344}},
      {"ft", {Dimension::length, 0.3048}},
      // duration (SI seconds); no "min" token, it is the aggregate keyword
      {"ms", {Dimension::duration, 0.001}},
      {"s", {Dimension::duration, 1.0}},
      {"sec", {Dimension::duration, 1.0}},
      {"minute", {Dimension::duration, 60.0}},
      {"h", {Dimension::duration, 3600.0}},
      {"hour", {Dimension::duration, 3600.0}},
      {"day", {Dimension::duration, 86400.0}},
      {"week", {Dimension::duration, 604800.0}},
      // weight (SI kilograms)
      {"g", {Dimension::weight, 0.001}},
      {"kg", {Dimension::weight, 1.0}},
      {"lb", {Dimension::weight, 0.45359237}},
      {"oz", {Dimension::weight, 0.028349523125}},
      // speed (SI meters per second)
      {"mps", {Dimension::speed, 1.0}},
      {"kmph", {Dimension::speed, 1000.0 / 3600.0}},
      {"mph", {Dimension::speed, 0.44704}},
      // temperature (SI kelvin)
      {"k", {Dimension::temperature, 1.0}},
      {"c", {Dimension::temperature, 1.0, 273.15}},
      {"f", {Dimension::temperature, 5.0 / 9.0, 459.67 * 5.0 / 9.0}},
      // currency (base usd)
      {"usd", {Dimension::currency, 1.0}},
  };
  return table;
}

}  // namespace

std::optional<UnitDef> unit_from_token(const std::string& token) {
  auto it = unit_table().find(token);
  if (it == unit_table().end()) return std::nullopt;
  return it->second;
}

double unit_to_si(const UnitDef& unit, double display) {
  return display * unit.factor + unit.offset;
}

double unit_from_si(const UnitDef& unit, double si) {
  return (si - unit.offset) / unit.factor;
}

std::string default_display_unit(Dimension d) {
  switch (d) {
    case Dimension::distance:
    case Dimension::length: return "mi";
    case Dimension::duration: return "h";
    case Dimension::weight: return "kg";
    case Dimension::speed: return "mph";
    case Dimension::temperature: return "c";
    case Dimension::currency: return "usd";
    case Dimension::time: return "h";
  }
  return "m";
}

MeasureVal make_measure(double display, const std::string& unit_token) {
  auto unit = unit_from_token(unit_token);
  if (!unit) throw Error("unknown unit: " + unit_token);
  return MeasureVal{unit_to_si(*unit, display), unit->dimension, display, unit_token};
}

}  // namespace dbtalk
