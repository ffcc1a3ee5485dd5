#ifndef ERL_SYNTH_HPP
#define ERL_SYNTH_HPP

#include "erl/features.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace erl {

/// Per-category generation pattern. Distances and durations are sampled from
/// normals with the given mean/sd; ratios from uniform ranges.
struct CategoryPattern {
    // distance from city center, meters; a mixture of two modes
    double dist_mean_a = 10000, dist_sd_a = 3000;
    double dist_mean_b = 10000, dist_sd_b = 3000;
    double mode_a_share = 1.0;
    int min_cells = 1, max_cells = 4;
    double stay_mean_s = 3600, stay_sd_s = 1200;
    double grass_lo = 0.0, grass_hi = 0.2;
    double poi_rate = 50;        // POIs planted within 1km of the centroid
    double poi_rate_b = -1;      // rate when the far mode was drawn; <0 reuses poi_rate
    double extra_visit_rate = 4; // Poisson mean of non-caretaker visits/shift
    bool evening_peak = false;   // bias entries toward late hour slots
    std::int64_t sample_interval_s = 120;
};

struct SynthConfig {
    std::uint64_t seed = 42;
    std::array<int, kNumClasses> n_erls{150, 30, 45}; // ER, MR, PM
    std::string start_date = "2023-05-01";
    int n_days = 10; // two shifts per day
    double city_radius_m = 26000;
    GeoPoint center{104.0657, 30.6570};
    int tz_offset_hours = 8;
    double raster_resolution_m = 20;
    int background_poi = 4000;
    int retry_budget = 500;
    std::array<CategoryPattern, kNumClasses> pattern = default_patterns();

    static std::array<CategoryPattern, kNumClasses> default_patterns();
};

struct SynthSummary {
    int erls_planted = 0;
    std::size_t gps_points = 0;
    std::size_t poi_records = 0;
};

/// Write traces.csv, poi.csv, raster.{bin,json}, registry.json and
/// ground_truth.json under out_dir. Deterministic for a given seed.
SynthSummary generate(const SynthConfig& cfg, const std::string& out_dir);

} // namespace erl

#endif
