#include "erl/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace erl {

void OdNetwork::add_trip(const std::string& from, const std::string& to) {
    if (from == to) return;
    edges[{from, to}] += 1;
}

int OdNetwork::degree(const std::string& erl_id) const {
    std::set<std::string> in, out;
    for (const auto& [edge, count] : edges) {
        (void)count;
        if (edge.first == erl_id) out.insert(edge.second);
        if (edge.second == erl_id) in.insert(edge.first);
    }
    return static_cast<int>(in.size() + out.size());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_double(const std::string& s, double& v) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e && !s.empty();
}

bool parse_i64(const std::string& s, std::int64_t& v) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e && !s.empty();
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace

std::map<std::string, std::vector<GpsPoint>> ingest_traces(std::istream& in,
                                                           IngestReport& report) {
    std::map<std::string, std::vector<GpsPoint>> trucks;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            if (line.rfind("truck_id", 0) == 0) continue; // header
        }
        if (line.empty()) continue;
        auto fields = split_csv(line);
        std::int64_t t;
        double lon, lat;
        if (fields.size() != 4 || fields[0].empty() || !parse_i64(fields[1], t) ||
            !parse_double(fields[2], lon) || !parse_double(fields[3], lat)) {
            ++report.malformed;
            if (report.reject_samples.size() < 10) report.reject_samples.push_back(line);
            continue;
        }
        if (!valid_geo(lon, lat)) {
            ++report.out_of_range;
            if (report.reject_samples.size() < 10) report.reject_samples.push_back(line);
            continue;
        }
        trucks[fields[0]].push_back({fields[0], t, {lon, lat}});
    }
    for (auto& [id, pts] : trucks) {
        (void)id;
        std::stable_sort(pts.begin(), pts.end(),
                         [](const GpsPoint& a, const GpsPoint& b) { return a.t < b.t; });
        std::vector<GpsPoint> dedup;
        dedup.reserve(pts.size());
        for (auto& p : pts) {
            if (!dedup.empty() && dedup.back().t == p.t) {
                ++report.duplicates;
                continue;
            }
            dedup.push_back(std::move(p));
        }
        pts = std::move(dedup);
        report.accepted += pts.size();
    }
    return trucks;
}

std::vector<StayPoint> detect_stay_points(const std::vector<GpsPoint>& points,
                                          const GeoPoint& center, double d_max,
                                          std::int64_t t_min) {
    std::vector<StayPoint> out;
    const std::size_t n = points.size();
    std::vector<PlanePoint> proj(n);
    for (std::size_t i = 0; i < n; ++i) proj[i] = project(points[i].pos, center);

    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && euclid(proj[j + 1], proj[i]) <= d_max) ++j;
        if (points[j].t - points[i].t >= t_min) {
            PlanePoint c{0, 0};
            for (std::size_t k = i; k <= j; ++k) {
                c.x += proj[k].x;
                c.y += proj[k].y;
            }
            const double m = static_cast<double>(j - i + 1);
            out.push_back({points[i].truck_id, points[i].t, points[j].t, {c.x / m, c.y / m}});
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

std::string hash_cells(const std::vector<GridCell>& sorted_cells) {
    // FNV-1a over the cell index stream
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::int64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= static_cast<std::uint64_t>(v >> (8 * b)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    for (const auto& c : sorted_cells) {
        mix(c.ix);
        mix(c.iy);
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "e%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<Erl> extract_erls(const std::vector<StayPoint>& stays, int min_days,
                              int min_stays_per_day, int tz_offset_hours) {
    // cell -> local day -> stay count
    std::map<GridCell, std::map<std::int64_t, int>> activity;
    const std::int64_t tz = static_cast<std::int64_t>(tz_offset_hours) * 3600;
    for (const auto& s : stays) {
        const std::int64_t day = floor_div(s.t_start + tz, 86400);
        activity[cell_of(s.pos)][day] += 1;
    }

    std::set<GridCell> kept;
    for (const auto& [cell, days] : activity) {
        int qualifying = 0;
        for (const auto& [day, count] : days) {
            (void)day;
            if (count >= min_stays_per_day) ++qualifying;
        }
        if (qualifying >= min_days) kept.insert(cell);
    }

    // 8-connected components over kept cells
    std::vector<Erl> erls;
    std::set<GridCell> visited;
    for (const auto& seed : kept) {
        if (visited.count(seed)) continue;
        std::vector<GridCell> component;
        std::vector<GridCell> stack{seed};
        visited.insert(seed);
        while (!stack.empty()) {
            GridCell c = stack.back();
            stack.pop_back();
            component.push_back(c);
            for (long dx = -1; dx <= 1; ++dx) {
                for (long dy = -1; dy <= 1; ++dy) {
                    if (dx == 0 && dy == 0) continue;
                    GridCell nb{c.ix + dx, c.iy + dy};
                    if (kept.count(nb) && !visited.count(nb)) {
                        visited.insert(nb);
                        stack.push_back(nb);
                    }
                }
            }
        }
        std::sort(component.begin(), component.end());
        PlanePoint centroid{0, 0};
        for (const auto& c : component) {
            auto cc = cell_center(c);
            centroid.x += cc.x;
            centroid.y += cc.y;
        }
        centroid.x /= static_cast<double>(component.size());
        centroid.y /= static_cast<double>(component.size());
        erls.push_back({hash_cells(component), std::move(component), centroid});
    }
    std::sort(erls.begin(), erls.end(),
              [](const Erl& a, const Erl& b) { return a.cells.front() < b.cells.front(); });
    return erls;
}

Shift shift_of(std::int64_t t_utc, int tz_offset_hours) {
    const std::int64_t local = t_utc + static_cast<std::int64_t>(tz_offset_hours) * 3600;
    const std::int64_t day = floor_div(local, 86400);
    const std::int64_t sod = local - day * 86400;
    if (sod >= 8 * 3600 && sod < 20 * 3600) return {day, ShiftHalf::Day};
    if (sod >= 20 * 3600) return {day, ShiftHalf::Night};
    return {day - 1, ShiftHalf::Night};
}

std::int64_t shift_start_utc(const Shift& s, int tz_offset_hours) {
    const std::int64_t start_local =
        s.day * 86400 + (s.half == ShiftHalf::Day ? 8 : 20) * 3600;
    return start_local - static_cast<std::int64_t>(tz_offset_hours) * 3600;
}

std::string format_date(std::int64_t z) {
    // civil-from-days (Howard Hinnant's algorithm)
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t m = mp + (mp < 10 ? 3 : -9);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04lld-%02lld-%02lld",
                  static_cast<long long>(y + (m <= 2)), static_cast<long long>(m),
                  static_cast<long long>(d));
    return buf;
}

std::string shift_key(const Shift& s) {
    return format_date(s.day) + (s.half == ShiftHalf::Day ? "D" : "N");
}

std::optional<Shift> parse_shift_key(const std::string& key) {
    if (key.size() != 11) return std::nullopt;
    const char half = key.back();
    if (half != 'D' && half != 'N') return std::nullopt;
    int y, m, d;
    if (std::sscanf(key.c_str(), "%d-%d-%d", &y, &m, &d) != 3) return std::nullopt;
    // days-from-civil
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;
    const std::int64_t mp = m + (m > 2 ? -3 : 9);
    const std::int64_t doy = (153 * mp + 2) / 5 + d - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    const std::int64_t day = era * 146097 + doe - 719468;
    const Shift s{day, half == 'D' ? ShiftHalf::Day : ShiftHalf::Night};
    if (shift_key(s) != key) return std::nullopt; // rejects out-of-range fields
    return s;
}

OdNetwork build_od(const std::vector<ErlStay>& stays, const Shift& shift,
                   int tz_offset_hours) {
    // group by truck, keep shift members, chain consecutive ERL stays
    std::map<std::string, std::vector<const ErlStay*>> by_truck;
    for (const auto& s : stays) {
        if (shift_of(s.stay.t_start, tz_offset_hours) == shift)
            by_truck[s.stay.truck_id].push_back(&s);
    }
    OdNetwork od;
    for (auto& [truck, list] : by_truck) {
        (void)truck;
        std::sort(list.begin(), list.end(), [](const ErlStay* a, const ErlStay* b) {
            return a->stay.t_start < b->stay.t_start;
        });
        const std::string* prev = nullptr;
        for (const auto* s : list) {
            if (!s->erl_id) continue;
            if (prev && *prev != *s->erl_id) od.add_trip(*prev, *s->erl_id);
            prev = &*s->erl_id;
        }
    }
    return od;
}

} // namespace erl
