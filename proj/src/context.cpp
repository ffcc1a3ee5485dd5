#include "erl/context.hpp"
#include "erl/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace erl {

const std::array<const char*, kNumLandClasses> kLandClassNames = {
    "traffic_route", "tree_cover", "grassland", "cropland",
    "building",      "barren_S_V", "water",     "moss_lichen",
};

const std::array<const char*, kNumPoiCategories> kPoiCategoryNames = {
    "food",      "road_fac",  "scenic_spots",   "public",      "enterprise",
    "shopping",  "trans_facility", "financial", "science_E",   "trans_F",
    "car_S",     "car_R",     "business",       "subsistence", "sports",
    "health",    "government", "accom",
};

int poi_category_from_name(const std::string& name) {
    for (int i = 0; i < kNumPoiCategories; ++i)
        if (name == kPoiCategoryNames[i]) return i;
    return -1;
}

void LandCoverRaster::save(const std::string& path_base) const {
    nlohmann::json sidecar;
    sidecar["origin_x"] = origin.x;
    sidecar["origin_y"] = origin.y;
    sidecar["resolution"] = resolution;
    sidecar["width"] = width;
    sidecar["height"] = height;
    nlohmann::json codes = nlohmann::json::object();
    for (int i = 0; i < kNumLandClasses; ++i) codes[kLandClassNames[i]] = i;
    codes["nodata"] = 255;
    sidecar["class_codes"] = codes;
    std::ofstream js(path_base + ".json");
    if (!js) throw DataError("cannot write raster sidecar: " + path_base + ".json");
    js << sidecar.dump(2) << "\n";

    std::ofstream bin(path_base + ".bin", std::ios::binary);
    if (!bin) throw DataError("cannot write raster data: " + path_base + ".bin");
    bin.write(reinterpret_cast<const char*>(classes.data()),
              static_cast<std::streamsize>(classes.size()));
}

LandCoverRaster LandCoverRaster::load(const std::string& path_base) {
    std::ifstream js(path_base + ".json");
    if (!js) throw DataError("cannot read raster sidecar: " + path_base + ".json");
    nlohmann::json sidecar = nlohmann::json::parse(js);
    LandCoverRaster r;
    r.origin = {sidecar.at("origin_x").get<double>(), sidecar.at("origin_y").get<double>()};
    r.resolution = sidecar.at("resolution").get<double>();
    r.width = sidecar.at("width").get<std::size_t>();
    r.height = sidecar.at("height").get<std::size_t>();
    if (r.resolution <= 0) throw DataError("raster resolution must be positive");
    std::ifstream bin(path_base + ".bin", std::ios::binary);
    if (!bin) throw DataError("cannot read raster data: " + path_base + ".bin");
    r.classes.assign(r.width * r.height, 255);
    bin.read(reinterpret_cast<char*>(r.classes.data()),
             static_cast<std::streamsize>(r.classes.size()));
    if (static_cast<std::size_t>(bin.gcount()) != r.classes.size())
        throw DataError("raster data size mismatch: " + path_base + ".bin");
    return r;
}

CoverRatios cover_ratios(const Erl& erl, const LandCoverRaster& raster) {
    const double res = raster.resolution;
    std::array<long long, kNumLandClasses> class_pixels{};
    long long total_pixels = 0;
    long long covered_pixels = 0;

    for (const auto& cell : erl.cells) {
        const double x0 = cell.ix * kGridSideM;
        const double y0 = cell.iy * kGridSideM;
        // pixel centers of the infinite grid anchored at the raster origin
        // that fall inside [x0, x0+200) x [y0, y0+200)
        const long col_lo = static_cast<long>(std::ceil((x0 - raster.origin.x) / res - 0.5));
        const long col_hi =
            static_cast<long>(std::ceil((x0 + kGridSideM - raster.origin.x) / res - 0.5));
        const long row_lo = static_cast<long>(std::ceil((y0 - raster.origin.y) / res - 0.5));
        const long row_hi =
            static_cast<long>(std::ceil((y0 + kGridSideM - raster.origin.y) / res - 0.5));
        for (long row = row_lo; row < row_hi; ++row) {
            for (long col = col_lo; col < col_hi; ++col) {
                ++total_pixels;
                if (col < 0 || row < 0 || col >= static_cast<long>(raster.width) ||
                    row >= static_cast<long>(raster.height))
                    continue; // off-raster, counts as nodata
                const std::uint8_t code =
                    raster.at(static_cast<std::size_t>(col), static_cast<std::size_t>(row));
                ++covered_pixels;
                if (code < kNumLandClasses) ++class_pixels[code];
            }
        }
    }

    CoverRatios out;
    out.all_nodata = covered_pixels == 0;
    if (total_pixels > 0) {
        for (int k = 0; k < kNumLandClasses; ++k)
            out.ratio[k] =
                static_cast<double>(class_pixels[k]) / static_cast<double>(total_pixels);
    }
    return out;
}

PoiIndex::PoiIndex(const std::vector<PoiRecord>& records) {
    for (const auto& r : records) {
        const long bx = static_cast<long>(std::floor(r.pos.x / kBucketSide));
        const long by = static_cast<long>(std::floor(r.pos.y / kBucketSide));
        buckets_[{bx, by}].push_back(r);
        ++total_;
    }
}

PoiIndex::Counts PoiIndex::query(const PlanePoint& center, double radius) const {
    Counts out;
    const long bx0 = static_cast<long>(std::floor((center.x - radius) / kBucketSide));
    const long bx1 = static_cast<long>(std::floor((center.x + radius) / kBucketSide));
    const long by0 = static_cast<long>(std::floor((center.y - radius) / kBucketSide));
    const long by1 = static_cast<long>(std::floor((center.y + radius) / kBucketSide));
    for (long bx = bx0; bx <= bx1; ++bx) {
        for (long by = by0; by <= by1; ++by) {
            auto it = buckets_.find({bx, by});
            if (it == buckets_.end()) continue;
            for (const auto& r : it->second) {
                if (euclid(r.pos, center) <= radius) {
                    ++out.per_category[static_cast<int>(r.category)];
                    ++out.all_poi;
                }
            }
        }
    }
    return out;
}

std::vector<PoiRecord> load_poi_csv(std::istream& in, const GeoPoint& center,
                                    std::size_t* skipped) {
    std::vector<PoiRecord> out;
    std::string line;
    bool first = true;
    std::size_t bad = 0;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            if (line.rfind("lon", 0) == 0) continue;
        }
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string lon_s, lat_s, cat_s;
        if (!std::getline(ss, lon_s, ',') || !std::getline(ss, lat_s, ',') ||
            !std::getline(ss, cat_s)) {
            ++bad;
            continue;
        }
        if (!cat_s.empty() && cat_s.back() == '\r') cat_s.pop_back();
        char* end = nullptr;
        const double lon = std::strtod(lon_s.c_str(), &end);
        const double lat = std::strtod(lat_s.c_str(), &end);
        const int cat = poi_category_from_name(cat_s);
        if (cat < 0 || !valid_geo(lon, lat)) {
            ++bad;
            continue;
        }
        out.push_back({project({lon, lat}, center), static_cast<PoiCategory>(cat)});
    }
    if (skipped) *skipped = bad;
    return out;
}

} // namespace erl
