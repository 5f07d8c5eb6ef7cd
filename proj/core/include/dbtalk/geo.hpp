#pragma once

#include "dbtalk/value.hpp"

namespace dbtalk {

inline constexpr double kEarthRadiusMeters = 6371000.0;

/// Great-circle (haversine) distance in meters.
double haversine_meters(const GeoPoint& a, const GeoPoint& b);

}  // namespace dbtalk
