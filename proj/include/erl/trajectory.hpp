#ifndef ERL_TRAJECTORY_HPP
#define ERL_TRAJECTORY_HPP

#include "erl/geo.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace erl {

struct GpsPoint {
    std::string truck_id;
    std::int64_t t = 0; // UTC seconds
    GeoPoint pos;
};

struct StayPoint {
    std::string truck_id;
    std::int64_t t_start = 0;
    std::int64_t t_end = 0;
    PlanePoint pos; // centroid of member points

    std::int64_t duration() const { return t_end - t_start; }
};

struct Erl {
    std::string erl_id;
    std::vector<GridCell> cells; // sorted, unique, one 8-connected component
    PlanePoint centroid;         // mean of cell centers
};

enum class ShiftHalf { Day, Night };

/// One 12-hour observation window. Day covers [08:00, 20:00) local,
/// Night covers [20:00, 08:00 next day) and is keyed by its starting date.
struct Shift {
    std::int64_t day = 0; // local calendar day, days since epoch
    ShiftHalf half = ShiftHalf::Day;

    auto operator<=>(const Shift&) const = default;
};

struct OdNetwork {
    // directed edge (from, to) -> trip count; no self-loops
    std::map<std::pair<std::string, std::string>, int> edges;

    void add_trip(const std::string& from, const std::string& to);
    /// Distinct in-neighbors plus distinct out-neighbors.
    int degree(const std::string& erl_id) const;
};

struct IngestReport {
    std::size_t accepted = 0;
    std::size_t duplicates = 0;
    std::size_t out_of_range = 0;
    std::size_t malformed = 0;
    std::vector<std::string> reject_samples; // first few offending lines
};

/// Parse a trace CSV (header truck_id,unix_time,lon,lat) into time-sorted
/// per-truck point lists. Bad rows are counted, never fatal.
std::map<std::string, std::vector<GpsPoint>> ingest_traces(std::istream& in,
                                                           IngestReport& report);

/// Greedy left-to-right stay-point scan: grow a window from an anchor while
/// every member stays within d_max meters of the anchor; emit when the window
/// spans at least t_min seconds.
std::vector<StayPoint> detect_stay_points(const std::vector<GpsPoint>& points,
                                          const GeoPoint& center, double d_max,
                                          std::int64_t t_min);

/// Cells active on >= min_days distinct local days (>= min_stays_per_day stays
/// each) grouped into 8-connected components.
std::vector<Erl> extract_erls(const std::vector<StayPoint>& stays, int min_days,
                              int min_stays_per_day, int tz_offset_hours);

Shift shift_of(std::int64_t t_utc, int tz_offset_hours);

/// UTC second at which the shift's 12-hour window begins.
std::int64_t shift_start_utc(const Shift& s, int tz_offset_hours);

std::string shift_key(const Shift& s); // "YYYY-MM-DDD" / "YYYY-MM-DDN"
std::optional<Shift> parse_shift_key(const std::string& key);

std::string format_date(std::int64_t days_since_epoch);

/// Stay points already mapped to an ERL (or none).
struct ErlStay {
    StayPoint stay;
    std::optional<std::string> erl_id;
};

/// Chain each truck's consecutive ERL-contained stays within one shift into
/// directed trips. Stays outside every ERL are skipped when chaining; repeated
/// same-ERL stays collapse (no self-loops).
OdNetwork build_od(const std::vector<ErlStay>& stays, const Shift& shift,
                   int tz_offset_hours);

/// Content hash of a sorted cell set, used as the ERL identity.
std::string hash_cells(const std::vector<GridCell>& sorted_cells);

} // namespace erl

#endif
