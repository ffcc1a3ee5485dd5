#ifndef ERL_GEO_HPP
#define ERL_GEO_HPP

#include "erl/errors.hpp"

#include <cmath>
#include <compare>
#include <numbers>

namespace erl {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kGridSideM = 200.0;

/// WGS84 coordinate in degrees.
struct GeoPoint {
    double lon = 0.0;
    double lat = 0.0;
};

/// Planar coordinate in meters relative to the configured city center.
struct PlanePoint {
    double x = 0.0;
    double y = 0.0;
};

/// Index of one 200m x 200m grid cell.
struct GridCell {
    long ix = 0;
    long iy = 0;

    auto operator<=>(const GridCell&) const = default;
};

/// Center of a grid cell in plane coordinates.
inline PlanePoint cell_center(const GridCell& c) {
    return {c.ix * kGridSideM + kGridSideM / 2.0, c.iy * kGridSideM + kGridSideM / 2.0};
}

inline double deg2rad(double d) {
    return d * std::numbers::pi / 180.0;
}

/// Equirectangular projection about the city center.
/// x = R * dlon * cos(lat_center), y = R * dlat (angles in radians).
inline PlanePoint project(const GeoPoint& p, const GeoPoint& center) {
    if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || !std::isfinite(center.lon) ||
        !std::isfinite(center.lat)) {
        throw InvalidCoordinate("project: non-finite coordinate");
    }
    const double dlon = deg2rad(p.lon - center.lon);
    const double dlat = deg2rad(p.lat - center.lat);
    return {kEarthRadiusM * dlon * std::cos(deg2rad(center.lat)), kEarthRadiusM * dlat};
}

/// Inverse of project; valid near the center.
inline GeoPoint unproject(const PlanePoint& p, const GeoPoint& center) {
    const double dlat = p.y / kEarthRadiusM;
    const double dlon = p.x / (kEarthRadiusM * std::cos(deg2rad(center.lat)));
    return {center.lon + dlon * 180.0 / std::numbers::pi,
            center.lat + dlat * 180.0 / std::numbers::pi};
}

/// Containing 200m cell; boundary points belong to the higher-index cell.
inline GridCell cell_of(const PlanePoint& p) {
    return {static_cast<long>(std::floor(p.x / kGridSideM)),
            static_cast<long>(std::floor(p.y / kGridSideM))};
}

inline double euclid(const PlanePoint& a, const PlanePoint& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline bool valid_geo(double lon, double lat) {
    return std::isfinite(lon) && std::isfinite(lat) && lon >= -180.0 && lon <= 180.0 &&
           lat >= -90.0 && lat <= 90.0;
}

} // namespace erl

#endif
