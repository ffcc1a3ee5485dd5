#include "erl/features.hpp"
#include "erl/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace erl {

const std::array<const char*, kNumClasses> kLabelNames = {"ER", "MR", "PM"};

std::optional<Label> label_from_name(const std::string& name) {
    for (int i = 0; i < kNumClasses; ++i)
        if (name == kLabelNames[i]) return static_cast<Label>(i);
    return std::nullopt;
}

namespace {

std::array<const char*, kNumFeatures> make_feature_names() {
    std::array<const char*, kNumFeatures> names{};
    names[0] = "num_grid";
    names[1] = "distance_LR";
    names[2] = "distance_UL";
    names[3] = "distance_center";
    for (int i = 0; i < kNumLandClasses; ++i) names[kIdxLandCover + i] = kLandClassNames[i];
    for (int i = 0; i < kNumPoiCategories; ++i) names[kIdxPoi + i] = kPoiCategoryNames[i];
    names[kIdxAllPoi] = "all_poi";
    static const char* stay_names[12] = {"stay_1", "stay_2", "stay_3", "stay_4",
                                         "stay_5", "stay_6", "stay_7", "stay_8",
                                         "stay_9", "stay_10", "stay_11", "stay_12"};
    static const char* flow_names[12] = {"flow_1", "flow_2", "flow_3", "flow_4",
                                         "flow_5", "flow_6", "flow_7", "flow_8",
                                         "flow_9", "flow_10", "flow_11", "flow_12"};
    for (int t = 0; t < 12; ++t) {
        names[kIdxStay + t] = stay_names[t];
        names[kIdxFlow + t] = flow_names[t];
    }
    names[kIdxAllStay] = "all_stay";
    names[kIdxAllFlow] = "all_flow";
    names[kIdxDegree] = "degree";
    names[kIdxStayTime] = "stay_time";
    return names;
}

} // namespace

const std::array<const char*, kNumFeatures> kFeatureNames = make_feature_names();

int feature_index(const std::string& name) {
    for (int i = 0; i < kNumFeatures; ++i)
        if (name == kFeatureNames[i]) return i;
    return -1;
}

std::array<double, 4> geographic_features(const Erl& erl) {
    long ix_min = erl.cells.front().ix, ix_max = ix_min;
    long iy_min = erl.cells.front().iy, iy_max = iy_min;
    for (const auto& c : erl.cells) {
        ix_min = std::min(ix_min, c.ix);
        ix_max = std::max(ix_max, c.ix);
        iy_min = std::min(iy_min, c.iy);
        iy_max = std::max(iy_max, c.iy);
    }
    return {static_cast<double>(erl.cells.size()),
            kGridSideM * static_cast<double>(ix_max - ix_min + 1),
            kGridSideM * static_cast<double>(iy_max - iy_min + 1),
            euclid(erl.centroid, {0, 0})};
}

std::array<double, 28> transport_features(const std::vector<StayPoint>& stays_in_erl,
                                          const Shift& shift, int tz_offset_hours,
                                          const OdNetwork& od, const std::string& erl_id) {
    std::array<double, 28> out{};
    double* stay_t = out.data();       // [0..11]
    double& all_stay = out[12];
    double* flow_t = out.data() + 13;  // [13..24]
    double& all_flow = out[25];
    double& degree = out[26];
    double& stay_time = out[27];

    const std::int64_t start = shift_start_utc(shift, tz_offset_hours);
    double total_duration = 0;
    std::size_t n = 0;
    for (const auto& s : stays_in_erl) {
        if (shift_of(s.t_start, tz_offset_hours) != shift) continue;
        ++n;
        total_duration += static_cast<double>(s.duration());
        const std::int64_t entry_slot = (s.t_start - start) / 3600; // 0-based
        if (entry_slot >= 0 && entry_slot < 12) flow_t[entry_slot] += 1;
        for (int t = 0; t < 12; ++t) {
            const std::int64_t slot_lo = start + t * 3600;
            const std::int64_t slot_hi = slot_lo + 3600;
            if (s.t_start < slot_hi && s.t_end > slot_lo) stay_t[t] += 1;
        }
    }
    for (int t = 0; t < 12; ++t) {
        all_stay += stay_t[t];
        all_flow += flow_t[t];
    }
    degree = od.degree(erl_id);
    stay_time = n ? total_duration / static_cast<double>(n) : 0.0;
    return out;
}

Sample assemble(const Erl& erl, const Shift& shift, const LandCoverRaster& raster,
                const PoiIndex& poi, const OdNetwork& od,
                const std::vector<StayPoint>& stays_in_erl, const Registry& registry,
                int tz_offset_hours) {
    Sample s;
    s.erl_id = erl.erl_id;
    s.shift = shift;

    const auto geo = geographic_features(erl);
    std::copy(geo.begin(), geo.end(), s.features.begin() + kIdxGeo);

    const auto cover = cover_ratios(erl, raster);
    s.coverage_warning = cover.all_nodata;
    std::copy(cover.ratio.begin(), cover.ratio.end(), s.features.begin() + kIdxLandCover);

    const auto counts = poi.query(erl.centroid, 1000.0);
    for (int i = 0; i < kNumPoiCategories; ++i)
        s.features[kIdxPoi + i] = counts.per_category[i];
    s.features[kIdxAllPoi] = counts.all_poi;

    const auto transport = transport_features(stays_in_erl, shift, tz_offset_hours, od,
                                              erl.erl_id);
    std::copy(transport.begin(), transport.end(), s.features.begin() + kIdxStay);

    if (auto it = registry.find(erl.erl_id); it != registry.end()) s.label = it->second;
    return s;
}

namespace {

void write_double(std::ostream& out, double v) {
    // shortest round-trip representation, stable across runs
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.write(buf, p - buf);
}

} // namespace

void write_feature_csv(std::ostream& out, const std::vector<Sample>& samples) {
    out << "erl_id,shift";
    for (const auto* name : kFeatureNames) out << ',' << name;
    out << ",label\n";
    for (const auto& s : samples) {
        out << s.erl_id << ',' << shift_key(s.shift);
        for (double v : s.features) {
            out << ',';
            write_double(out, v);
        }
        out << ',' << (s.label ? kLabelNames[static_cast<int>(*s.label)] : "") << '\n';
    }
}

std::vector<Sample> read_feature_csv(std::istream& in) {
    std::vector<Sample> out;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty feature table");
    // validate the header column order
    {
        std::istringstream hs(line);
        std::string col;
        std::getline(hs, col, ',');
        if (col != "erl_id") throw DataError("feature table: bad header");
        std::getline(hs, col, ',');
        if (col != "shift") throw DataError("feature table: bad header");
        for (int i = 0; i < kNumFeatures; ++i) {
            if (!std::getline(hs, col, ',') || col != kFeatureNames[i])
                throw DataError("feature table: header column mismatch at feature " +
                                std::to_string(i));
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Sample s;
        std::string field;
        if (!std::getline(ss, s.erl_id, ',')) throw DataError("feature table: bad row");
        if (!std::getline(ss, field, ',')) throw DataError("feature table: bad row");
        auto shift = parse_shift_key(field);
        if (!shift) throw DataError("feature table: bad shift key: " + field);
        s.shift = *shift;
        for (int i = 0; i < kNumFeatures; ++i) {
            if (!std::getline(ss, field, ','))
                throw DataError("feature table: short row");
            s.features[i] = std::strtod(field.c_str(), nullptr);
        }
        if (std::getline(ss, field, ',') && !field.empty()) {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            s.label = label_from_name(field);
            if (!field.empty() && !s.label)
                throw DataError("feature table: unknown label: " + field);
        }
        out.push_back(std::move(s));
    }
    return out;
}

Registry load_registry_json(std::istream& in) {
    nlohmann::json j = nlohmann::json::parse(in);
    Registry reg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto label = label_from_name(it.value().get<std::string>());
        if (!label) throw DataError("registry: unknown label for " + it.key());
        reg[it.key()] = *label;
    }
    return reg;
}

void write_registry_json(std::ostream& out, const Registry& reg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, label] : reg) j[id] = kLabelNames[static_cast<int>(label)];
    out << j.dump(2) << "\n";
}

void write_erls_json(std::ostream& out, const std::vector<Erl>& erls) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : erls) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& c : e.cells) cells.push_back({c.ix, c.iy});
        arr.push_back({{"erl_id", e.erl_id},
                       {"cells", cells},
                       {"centroid", {e.centroid.x, e.centroid.y}}});
    }
    out << arr.dump(2) << "\n";
}

std::vector<Erl> read_erls_json(std::istream& in) {
    nlohmann::json arr = nlohmann::json::parse(in);
    std::vector<Erl> out;
    for (const auto& j : arr) {
        Erl e;
        e.erl_id = j.at("erl_id").get<std::string>();
        for (const auto& c : j.at("cells"))
            e.cells.push_back({c.at(0).get<long>(), c.at(1).get<long>()});
        e.centroid = {j.at("centroid").at(0).get<double>(),
                      j.at("centroid").at(1).get<double>()};
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace erl
