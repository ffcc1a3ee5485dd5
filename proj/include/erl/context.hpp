#ifndef ERL_CONTEXT_HPP
#define ERL_CONTEXT_HPP

#include "erl/trajectory.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace erl {

enum class LandClass : std::uint8_t {
    traffic_route = 0,
    tree_cover = 1,
    grassland = 2,
    cropland = 3,
    building = 4,
    barren_S_V = 5,
    water = 6,
    moss_lichen = 7,
    nodata = 255,
};

inline constexpr int kNumLandClasses = 8;

extern const std::array<const char*, kNumLandClasses> kLandClassNames;

/// Pre-classified land cover grid. origin is the lower-left corner; pixel
/// (col,row) covers [origin.x + col*res, +res) x [origin.y + row*res, +res),
/// stored row-major from row 0.
struct LandCoverRaster {
    PlanePoint origin;
    double resolution = 1.0; // meters per pixel
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> classes; // width*height codes

    std::uint8_t at(std::size_t col, std::size_t row) const {
        return classes[row * width + col];
    }

    void save(const std::string& path_base) const; // writes .bin and .json
    static LandCoverRaster load(const std::string& path_base);
};

struct CoverRatios {
    std::array<double, kNumLandClasses> ratio{}; // indexed by LandClass code
    bool all_nodata = false;
};

/// Area proportion of each land class over the ERL's cells. Nodata and
/// off-raster pixels stay in the denominator, so the 8 ratios sum to <= 1.
CoverRatios cover_ratios(const Erl& erl, const LandCoverRaster& raster);

enum class PoiCategory : int {
    food = 0,
    road_fac,
    scenic_spots,
    public_fac,
    enterprise,
    shopping,
    trans_facility,
    financial,
    science_E,
    trans_F,
    car_S,
    car_R,
    business,
    subsistence,
    sports,
    health,
    government,
    accom,
};

inline constexpr int kNumPoiCategories = 18;

extern const std::array<const char*, kNumPoiCategories> kPoiCategoryNames;

/// Name lookup; returns -1 for unknown categories.
int poi_category_from_name(const std::string& name);

struct PoiRecord {
    PlanePoint pos;
    PoiCategory category;
};

/// 1km-bucketed spatial index over POI records.
class PoiIndex {
public:
    PoiIndex() = default;
    explicit PoiIndex(const std::vector<PoiRecord>& records);

    /// Per-category counts within radius (inclusive boundary) plus the total.
    struct Counts {
        std::array<int, kNumPoiCategories> per_category{};
        int all_poi = 0;
    };
    Counts query(const PlanePoint& center, double radius = 1000.0) const;

    std::size_t size() const { return total_; }

private:
    static constexpr double kBucketSide = 1000.0;
    std::map<std::pair<long, long>, std::vector<PoiRecord>> buckets_;
    std::size_t total_ = 0;
};

/// Parse a POI CSV with header lon,lat,category into projected records.
/// Unknown categories are skipped and counted.
std::vector<PoiRecord> load_poi_csv(std::istream& in, const GeoPoint& center,
                                    std::size_t* skipped = nullptr);

} // namespace erl

#endif
