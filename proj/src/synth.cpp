#include "erl/synth.hpp"
#include "erl/context.hpp"
#include "erl/errors.hpp"
#include "erl/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

namespace erl {

std::array<CategoryPattern, kNumClasses> SynthConfig::default_patterns() {
    CategoryPattern er;
    er.dist_mean_a = 4000;
    er.dist_sd_a = 1500;
    er.dist_mean_b = 18000;
    er.dist_sd_b = 2500;
    er.mode_a_share = 0.6;
    er.min_cells = 1;
    er.max_cells = 4;
    er.stay_mean_s = 7000;
    er.stay_sd_s = 2800;
    er.grass_lo = 0.0;
    er.grass_hi = 0.3;
    er.poi_rate = 100;
    er.poi_rate_b = 8;
    er.extra_visit_rate = 4;
    er.sample_interval_s = 120;

    CategoryPattern mr;
    mr.dist_mean_a = 14000;
    mr.dist_sd_a = 3000;
    mr.dist_mean_b = 14000;
    mr.dist_sd_b = 3000;
    mr.mode_a_share = 1.0;
    mr.min_cells = 2;
    mr.max_cells = 5;
    mr.stay_mean_s = 6000;
    mr.stay_sd_s = 2000;
    mr.grass_lo = 0.35;
    mr.grass_hi = 0.75;
    mr.poi_rate = 8;
    mr.extra_visit_rate = 3;
    mr.sample_interval_s = 120;

    CategoryPattern pm;
    pm.dist_mean_a = 4000;
    pm.dist_sd_a = 1500;
    pm.dist_mean_b = 18000;
    pm.dist_sd_b = 2500;
    pm.mode_a_share = 0.4;
    pm.min_cells = 1;
    pm.max_cells = 4;
    pm.stay_mean_s = 8000;
    pm.stay_sd_s = 2800;
    pm.grass_lo = 0.0;
    pm.grass_hi = 0.3;
    pm.poi_rate = 8;
    pm.poi_rate_b = 100;
    pm.extra_visit_rate = 4;
    pm.sample_interval_s = 120;

    return {er, mr, pm};
}

namespace {

struct PlantedErl {
    std::string erl_id;
    int label = 0;
    std::vector<GridCell> cells; // sorted
    PlanePoint centroid;
    double grassland = 0.0;
    bool mode_a = true;
};

struct Visit {
    int erl = -1;       // index into planted list
    int cell = 0;       // index into that ERL's cells
    std::int64_t entry = 0;
    std::int64_t duration = 0;
};

void append_double(std::string& out, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.append(buf, p);
}

std::vector<PlantedErl> plant_erls(const SynthConfig& cfg, std::mt19937_64& rng) {
    std::vector<PlantedErl> planted;
    std::set<GridCell> blocked; // occupied cells plus a 1-cell buffer
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int label = 0; label < kNumClasses; ++label) {
        const auto& pat = cfg.pattern[static_cast<std::size_t>(label)];
        for (int i = 0; i < cfg.n_erls[static_cast<std::size_t>(label)]; ++i) {
            bool placed = false;
            for (int attempt = 0; attempt < cfg.retry_budget && !placed; ++attempt) {
                const bool mode_a = unit(rng) < pat.mode_a_share;
                std::normal_distribution<double> dist_d(
                    mode_a ? pat.dist_mean_a : pat.dist_mean_b,
                    mode_a ? pat.dist_sd_a : pat.dist_sd_b);
                const double r =
                    std::clamp(dist_d(rng), 600.0, cfg.city_radius_m - 600.0);
                const double theta = unit(rng) * 2.0 * std::numbers::pi;
                const PlanePoint seed_pt{r * std::cos(theta), r * std::sin(theta)};

                std::uniform_int_distribution<int> n_cells_d(pat.min_cells, pat.max_cells);
                const int n_cells = n_cells_d(rng);
                std::set<GridCell> cells{cell_of(seed_pt)};
                int guard = 0;
                while (static_cast<int>(cells.size()) < n_cells && guard++ < 50) {
                    auto it = cells.begin();
                    std::advance(it, static_cast<long>(rng() % cells.size()));
                    GridCell c = *it;
                    const int dir = static_cast<int>(rng() % 4);
                    if (dir == 0) c.ix += 1;
                    else if (dir == 1) c.ix -= 1;
                    else if (dir == 2) c.iy += 1;
                    else c.iy -= 1;
                    cells.insert(c);
                }
                bool clash = false;
                for (const auto& c : cells)
                    if (blocked.count(c)) {
                        clash = true;
                        break;
                    }
                if (clash) continue;

                for (const auto& c : cells)
                    for (long dx = -1; dx <= 1; ++dx)
                        for (long dy = -1; dy <= 1; ++dy)
                            blocked.insert({c.ix + dx, c.iy + dy});

                PlantedErl p;
                p.label = label;
                p.mode_a = mode_a;
                p.cells.assign(cells.begin(), cells.end());
                p.erl_id = hash_cells(p.cells);
                PlanePoint centroid{0, 0};
                for (const auto& c : p.cells) {
                    const auto cc = cell_center(c);
                    centroid.x += cc.x;
                    centroid.y += cc.y;
                }
                centroid.x /= static_cast<double>(p.cells.size());
                centroid.y /= static_cast<double>(p.cells.size());
                p.centroid = centroid;
                std::uniform_real_distribution<double> grass_d(pat.grass_lo, pat.grass_hi);
                p.grassland = grass_d(rng);
                planted.push_back(std::move(p));
                placed = true;
            }
            if (!placed)
                throw GenerationFailed("synth: could not place ERL without overlap");
        }
    }
    return planted;
}

void write_raster(const SynthConfig& cfg, const std::vector<PlantedErl>& planted,
                  std::mt19937_64& rng, const std::string& out_dir) {
    long ix_min = 0, ix_max = 0, iy_min = 0, iy_max = 0;
    bool first = true;
    for (const auto& p : planted)
        for (const auto& c : p.cells) {
            if (first) {
                ix_min = ix_max = c.ix;
                iy_min = iy_max = c.iy;
                first = false;
            }
            ix_min = std::min(ix_min, c.ix);
            ix_max = std::max(ix_max, c.ix);
            iy_min = std::min(iy_min, c.iy);
            iy_max = std::max(iy_max, c.iy);
        }
    const double res = cfg.raster_resolution_m;
    LandCoverRaster raster;
    raster.origin = {static_cast<double>(ix_min) * kGridSideM - 2 * kGridSideM,
                     static_cast<double>(iy_min) * kGridSideM - 2 * kGridSideM};
    raster.resolution = res;
    raster.width = static_cast<std::size_t>(
        ((ix_max - ix_min + 1) * static_cast<long>(kGridSideM) + 4 * 200) / res);
    raster.height = static_cast<std::size_t>(
        ((iy_max - iy_min + 1) * static_cast<long>(kGridSideM) + 4 * 200) / res);
    raster.classes.assign(raster.width * raster.height, 0);

    // background mix
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& px : raster.classes) {
        const double u = unit(rng);
        if (u < 0.40) px = static_cast<std::uint8_t>(LandClass::cropland);
        else if (u < 0.65) px = static_cast<std::uint8_t>(LandClass::tree_cover);
        else if (u < 0.85) px = static_cast<std::uint8_t>(LandClass::building);
        else if (u < 0.95) px = static_cast<std::uint8_t>(LandClass::traffic_route);
        else px = static_cast<std::uint8_t>(LandClass::water);
    }

    // ERL cells get a category-flavored composition
    for (const auto& p : planted) {
        const double g = p.grassland;
        for (const auto& c : p.cells) {
            const long col0 = static_cast<long>((c.ix * kGridSideM - raster.origin.x) / res);
            const long row0 = static_cast<long>((c.iy * kGridSideM - raster.origin.y) / res);
            const long span = static_cast<long>(kGridSideM / res);
            for (long row = row0; row < row0 + span; ++row) {
                for (long col = col0; col < col0 + span; ++col) {
                    if (col < 0 || row < 0 || col >= static_cast<long>(raster.width) ||
                        row >= static_cast<long>(raster.height))
                        continue;
                    const double u = unit(rng);
                    std::uint8_t px;
                    if (u < g) px = static_cast<std::uint8_t>(LandClass::grassland);
                    else if (u < g + (1 - g) * 0.6)
                        px = static_cast<std::uint8_t>(LandClass::barren_S_V);
                    else if (u < g + (1 - g) * 0.85)
                        px = static_cast<std::uint8_t>(LandClass::building);
                    else px = static_cast<std::uint8_t>(LandClass::traffic_route);
                    raster.classes[static_cast<std::size_t>(row) * raster.width +
                                   static_cast<std::size_t>(col)] = px;
                }
            }
        }
    }
    raster.save(out_dir + "/raster");
}

std::size_t write_poi(const SynthConfig& cfg, const std::vector<PlantedErl>& planted,
                      std::mt19937_64& rng, const std::string& out_dir) {
    // category mixes per ERL label; remaining mass spreads uniformly
    struct Mix {
        std::array<double, kNumPoiCategories> p{};
    };
    auto make_mix = [](std::initializer_list<std::pair<PoiCategory, double>> heavy) {
        Mix m;
        double used = 0;
        for (const auto& [cat, w] : heavy) {
            m.p[static_cast<std::size_t>(cat)] = w;
            used += w;
        }
        const double rest = (1.0 - used) / kNumPoiCategories;
        for (auto& v : m.p) v += rest;
        return m;
    };
    const std::array<Mix, kNumClasses> mixes = {
        make_mix({{PoiCategory::business, 0.18},
                  {PoiCategory::road_fac, 0.15},
                  {PoiCategory::enterprise, 0.14},
                  {PoiCategory::food, 0.10},
                  {PoiCategory::shopping, 0.08}}),
        make_mix({{PoiCategory::enterprise, 0.30},
                  {PoiCategory::road_fac, 0.18},
                  {PoiCategory::food, 0.12},
                  {PoiCategory::car_R, 0.10}}),
        make_mix({{PoiCategory::business, 0.18},
                  {PoiCategory::road_fac, 0.15},
                  {PoiCategory::enterprise, 0.14},
                  {PoiCategory::food, 0.10},
                  {PoiCategory::shopping, 0.08}}),
    };

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sample_cat = [&](const Mix& m) {
        double u = unit(rng);
        for (int i = 0; i < kNumPoiCategories; ++i) {
            u -= m.p[static_cast<std::size_t>(i)];
            if (u <= 0) return i;
        }
        return kNumPoiCategories - 1;
    };

    std::string csv = "lon,lat,category\n";
    std::size_t count = 0;
    auto emit = [&](const PlanePoint& pos, int cat) {
        const GeoPoint g = unproject(pos, cfg.center);
        append_double(csv, g.lon);
        csv += ',';
        append_double(csv, g.lat);
        csv += ',';
        csv += kPoiCategoryNames[static_cast<std::size_t>(cat)];
        csv += '\n';
        ++count;
    };

    for (const auto& p : planted) {
        const auto& pat = cfg.pattern[static_cast<std::size_t>(p.label)];
        const double rate =
            (!p.mode_a && pat.poi_rate_b >= 0) ? pat.poi_rate_b : pat.poi_rate;
        std::poisson_distribution<int> n_d(rate);
        const int n = n_d(rng);
        for (int i = 0; i < n; ++i) {
            const double rr = 1000.0 * std::sqrt(unit(rng));
            const double th = unit(rng) * 2.0 * std::numbers::pi;
            emit({p.centroid.x + rr * std::cos(th), p.centroid.y + rr * std::sin(th)},
                 sample_cat(mixes[static_cast<std::size_t>(p.label)]));
        }
    }
    const Mix background = make_mix({{PoiCategory::food, 0.2}, {PoiCategory::shopping, 0.15}});
    for (int i = 0; i < cfg.background_poi; ++i) {
        const double rr = cfg.city_radius_m * std::sqrt(unit(rng));
        const double th = unit(rng) * 2.0 * std::numbers::pi;
        emit({rr * std::cos(th), rr * std::sin(th)}, sample_cat(background));
    }

    std::ofstream out(out_dir + "/poi.csv", std::ios::binary);
    if (!out) throw DataError("synth: cannot write poi.csv");
    out << csv;
    return count;
}

} // namespace

SynthSummary generate(const SynthConfig& cfg, const std::string& out_dir) {
    if (cfg.n_days < 2) throw ConfigError("synth: study window must be >= 2 days");
    std::filesystem::create_directories(out_dir);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto planted = plant_erls(cfg, rng);
    write_raster(cfg, planted, rng, out_dir);
    SynthSummary summary;
    summary.erls_planted = static_cast<int>(planted.size());
    summary.poi_records = write_poi(cfg, planted, rng, out_dir);

    // registry + ground truth
    {
        Registry reg;
        for (const auto& p : planted)
            reg[p.erl_id] = static_cast<Label>(p.label);
        std::ofstream reg_out(out_dir + "/registry.json", std::ios::binary);
        write_registry_json(reg_out, reg);

        std::ofstream gt(out_dir + "/ground_truth.json", std::ios::binary);
        gt << "[\n";
        for (std::size_t i = 0; i < planted.size(); ++i) {
            const auto& p = planted[i];
            gt << "  {\"erl_id\":\"" << p.erl_id << "\",\"label\":\""
               << kLabelNames[static_cast<std::size_t>(p.label)] << "\",\"cells\":[";
            for (std::size_t c = 0; c < p.cells.size(); ++c) {
                gt << (c ? "," : "") << "[" << p.cells[c].ix << "," << p.cells[c].iy << "]";
            }
            gt << "]}" << (i + 1 < planted.size() ? "," : "") << "\n";
        }
        gt << "]\n";
    }

    // trajectories
    const auto start = parse_shift_key(cfg.start_date + "D");
    if (!start) throw ConfigError("synth: bad start_date: " + cfg.start_date);
    const int fleet = 900;

    std::string csv = "truck_id,unix_time,lon,lat\n";
    std::size_t points = 0;
    auto emit_point = [&](int truck, std::int64_t t, const PlanePoint& pos) {
        const GeoPoint g = unproject(pos, cfg.center);
        char id[12];
        std::snprintf(id, sizeof(id), "T%04d", truck);
        csv += id;
        csv += ',';
        csv += std::to_string(t);
        csv += ',';
        append_double(csv, g.lon);
        csv += ',';
        append_double(csv, g.lat);
        csv += '\n';
        ++points;
    };

    for (int day = 0; day < cfg.n_days; ++day) {
        for (int half = 0; half < 2; ++half) {
            const Shift shift{start->day + day,
                              half == 0 ? ShiftHalf::Day : ShiftHalf::Night};
            const std::int64_t shift_start = shift_start_utc(shift, cfg.tz_offset_hours);

            std::vector<Visit> visits;
            for (std::size_t e = 0; e < planted.size(); ++e) {
                const auto& p = planted[e];
                const auto& pat = cfg.pattern[static_cast<std::size_t>(p.label)];
                auto draw_visit = [&](int cell_idx) {
                    Visit v;
                    v.erl = static_cast<int>(e);
                    v.cell = cell_idx;
                    int slot;
                    if (pat.evening_peak && unit(rng) < 0.65)
                        slot = 8 + static_cast<int>(rng() % 3);
                    else
                        slot = static_cast<int>(rng() % 11);
                    v.entry = shift_start + slot * 3600 +
                              static_cast<std::int64_t>(unit(rng) * 3000);
                    std::normal_distribution<double> dur_d(pat.stay_mean_s, pat.stay_sd_s);
                    v.duration = static_cast<std::int64_t>(
                        std::clamp(dur_d(rng), 2400.0, 40000.0));
                    return v;
                };
                // caretaker pass keeps every cell active every shift
                for (std::size_t c = 0; c < p.cells.size(); ++c)
                    visits.push_back(draw_visit(static_cast<int>(c)));
                std::poisson_distribution<int> extra_d(pat.extra_visit_rate);
                const int extra = extra_d(rng);
                for (int i = 0; i < extra; ++i)
                    visits.push_back(
                        draw_visit(static_cast<int>(rng() % p.cells.size())));
            }

            std::shuffle(visits.begin(), visits.end(), rng);
            std::vector<std::vector<Visit>> per_truck(fleet);
            for (std::size_t i = 0; i < visits.size(); ++i)
                per_truck[i % fleet].push_back(visits[i]);

            for (int truck = 0; truck < fleet; ++truck) {
                auto& itinerary = per_truck[static_cast<std::size_t>(truck)];
                if (itinerary.empty()) continue;
                std::sort(itinerary.begin(), itinerary.end(),
                          [](const Visit& a, const Visit& b) { return a.entry < b.entry; });
                std::int64_t prev_end = 0;
                for (auto& v : itinerary) {
                    const std::int64_t t0 = std::max(v.entry, prev_end + 600);
                    const std::int64_t t1 = t0 + v.duration;
                    prev_end = t1;
                    const auto& p = planted[static_cast<std::size_t>(v.erl)];
                    const auto cc =
                        cell_center(p.cells[static_cast<std::size_t>(v.cell)]);
                    const auto& pat = cfg.pattern[static_cast<std::size_t>(p.label)];
                    for (std::int64_t t = t0; t < t1; t += pat.sample_interval_s) {
                        emit_point(truck, t,
                                   {cc.x + (unit(rng) - 0.5) * 100.0,
                                    cc.y + (unit(rng) - 0.5) * 100.0});
                    }
                    emit_point(truck, t1,
                               {cc.x + (unit(rng) - 0.5) * 100.0,
                                cc.y + (unit(rng) - 0.5) * 100.0});
                }
            }
        }
    }

    std::ofstream traces(out_dir + "/traces.csv", std::ios::binary);
    if (!traces) throw DataError("synth: cannot write traces.csv");
    traces << csv;
    summary.gps_points = points;
    return summary;
}

} // namespace erl
