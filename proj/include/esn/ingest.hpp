#pragma once

#include "esn/fact_base.hpp"
#include "esn/numeric.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace esn {

struct LogMeta {
    std::string scenario_id;
    Numeric time_step = Numeric::from_milli(100);
    Numeric start_time{};
    /// Wall-clock offset of t = 0, kept for display only.
    Numeric epoch_offset{};
    std::string ego;
    std::string variant;
    std::optional<std::uint64_t> seed;
    /// query id -> expected outcome ("pass", "violated", "error").
    std::map<std::string, std::string> labels;
};

struct TrajectoryRecord {
    Numeric t;
    std::string object_id;
    std::string object_class;
    Numeric x, y, z, vx, vy, vz, heading;
    std::optional<std::string> abs_status;
    std::optional<std::string> turn_signal;
    std::vector<std::string> events;
};

/// kind: driver_state (value = state), voice_command / touch_event
/// (value = text), brake_pedal_pressed (no value).
struct CockpitRecord {
    Numeric t;
    std::string kind;
    std::string id;
    std::string value;
};

/// kind: traffic_light_state / spat (id = light or lane, value = color),
/// v2x_warning (value = warning kind).
struct RoadsideRecord {
    Numeric t;
    std::string kind;
    std::string id;
    std::string value;
};

struct MapRecord {
    std::string lane_id;
    Numeric y_min, y_max, x_start, x_end, speed_limit;
};

struct StopLineRecord {
    std::string id;
    std::string lane_id;
    Numeric x;
};

using LogRecord = std::variant<TrajectoryRecord, CockpitRecord, RoadsideRecord, MapRecord, StopLineRecord>;

struct ScenarioLog {
    LogMeta meta;
    std::vector<LogRecord> records;
    /// 1-based source line of each record (0 when built in memory).
    std::vector<std::size_t> lines;

    void add(LogRecord r) {
        records.push_back(std::move(r));
        lines.push_back(0);
    }
};

/// Reads JSONL: a `meta` line first, then one record per line. Blank lines
/// are skipped. Throws SchemaError{record line, field}.
ScenarioLog parse_log(std::string_view text);
ScenarioLog read_log_file(const std::string& path);
std::string write_log(const ScenarioLog& log);

struct IngestReport {
    /// Newly inserted facts per signature ("position/4", "map_lane/6", ...).
    std::map<std::string, std::size_t> facts_emitted;
    /// Skipped records with reasons.
    std::vector<std::string> records_dropped;
    std::map<std::string, std::size_t> derived;  // acceleration, jerk, speed, ttc_deci

    std::size_t total_emitted() const;
};

/// Maps records to facts in `fb` (times become integer deciseconds from
/// start_time). Throws SchemaError, NonMonotonicTimeError, GridError.
void asp_ify_into(const ScenarioLog& log, FactBase& fb, IngestReport& report);
std::pair<FactBase, IngestReport> asp_ify(const ScenarioLog& log);

/// Speed, acceleration and jerk (forward differences of vx over
/// `time_step`), and ttc_deci for same-lane closing pairs. Returns only the
/// new facts. Throws MissingGridError when a track has holes.
FactBase derive_kinematics(const FactBase& fb, Numeric time_step);

struct IngestResult {
    FactBase facts;
    IngestReport report;
    LogMeta meta;
};

/// asp_ify followed by derive_kinematics.
IngestResult ingest(const ScenarioLog& log);

/// Seconds to integer deciseconds from `start`. Throws GridError.
std::int64_t to_deciseconds(Numeric t, Numeric start);

// ---- synthetic scenarios ---------------------------------------------

enum class Variant { compliant, violating };

const char* to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view s);

/// SC-01, SC-02, SC-04, SC-12, SC-13, SC-20.
const std::vector<std::string>& scenario_ids();

/// Deterministic given (id, variant, seed). Throws UnknownScenarioId.
ScenarioLog generate_scenario(std::string_view id, Variant variant, std::uint64_t seed);

} // namespace esn
