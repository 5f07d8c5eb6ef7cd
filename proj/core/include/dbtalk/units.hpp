#pragma once

#include <optional>
#include <string>

#include "dbtalk/types.hpp"
#include "dbtalk/value.hpp"

namespace dbtalk {

/// Conversion data for a surface unit token. Temperatures are affine;
/// everything else is a pure scale factor to the SI base unit.
struct UnitDef {
  Dimension dimension = Dimension::length;
  double factor = 1.0;
  double offset = 0.0;  // si = display * factor + offset
};

std::optional<UnitDef> unit_from_token(const std::string& token);

double unit_to_si(const UnitDef& unit, double display);
double unit_from_si(const UnitDef& unit, double si);

/// Preferred display unit per dimension when synthesizing values
/// ("mi" for distances, "usd" for currency, ...).
std::string default_display_unit(Dimension d);

MeasureVal make_measure(double display, const std::string& unit_token);  // throws Error on unknown unit

}  // namespace dbtalk
