#ifndef ERL_FEATURES_HPP
#define ERL_FEATURES_HPP

#include "erl/context.hpp"
#include "erl/trajectory.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace erl {

enum class Label : int { ER = 0, MR = 1, PM = 2 };

inline constexpr int kNumClasses = 3;
extern const std::array<const char*, kNumClasses> kLabelNames;
std::optional<Label> label_from_name(const std::string& name);

/// The canonical feature vector: 4 geographic + 8 land cover + 19 POI
/// + 28 transport entries, in that fixed order.
inline constexpr int kNumFeatures = 59;
extern const std::array<const char*, kNumFeatures> kFeatureNames;
int feature_index(const std::string& name); // -1 if unknown

// index anchors into the canonical order
inline constexpr int kIdxGeo = 0;        // num_grid..distance_center
inline constexpr int kIdxLandCover = 4;  // 8 ratios
inline constexpr int kIdxPoi = 12;       // 18 categories
inline constexpr int kIdxAllPoi = 30;
inline constexpr int kIdxStay = 31;      // stay_1..stay_12
inline constexpr int kIdxAllStay = 43;
inline constexpr int kIdxFlow = 44;      // flow_1..flow_12
inline constexpr int kIdxAllFlow = 56;
inline constexpr int kIdxDegree = 57;
inline constexpr int kIdxStayTime = 58;

using FeatureVector = std::array<double, kNumFeatures>;

struct Sample {
    std::string erl_id;
    Shift shift;
    FeatureVector features{};
    std::optional<Label> label;
    bool coverage_warning = false; // raster did not cover the ERL
};

/// erl_id -> known category.
using Registry = std::map<std::string, Label>;

/// num_grid, distance_LR, distance_UL, distance_center.
std::array<double, 4> geographic_features(const Erl& erl);

/// stay_1..12, all_stay, flow_1..12, all_flow, degree, stay_time over one
/// shift. Stays are assigned to the shift containing their start; stay_t uses
/// half-open interval overlap with hour slot t, flow_t counts stay beginnings.
std::array<double, 28> transport_features(const std::vector<StayPoint>& stays_in_erl,
                                          const Shift& shift, int tz_offset_hours,
                                          const OdNetwork& od, const std::string& erl_id);

Sample assemble(const Erl& erl, const Shift& shift, const LandCoverRaster& raster,
                const PoiIndex& poi, const OdNetwork& od,
                const std::vector<StayPoint>& stays_in_erl, const Registry& registry,
                int tz_offset_hours);

/// Feature-table CSV: erl_id, shift, 59 feature columns, optional label.
void write_feature_csv(std::ostream& out, const std::vector<Sample>& samples);
std::vector<Sample> read_feature_csv(std::istream& in);

Registry load_registry_json(std::istream& in);
void write_registry_json(std::ostream& out, const Registry& reg);

void write_erls_json(std::ostream& out, const std::vector<Erl>& erls);
std::vector<Erl> read_erls_json(std::istream& in);

} // namespace erl

#endif
