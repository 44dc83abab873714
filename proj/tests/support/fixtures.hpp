#pragma once

#include "esn/fact_base.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <utility>

namespace esn::testing {

FactBase facts_of(const std::string& src);

/// Six facts satisfying the braking-response body at T_light = 120 (TTC 25,
/// the only brake at 127, outside the 5-deci window).
FactBase braking_base();

/// Positions put the ego 12 m behind the lead at T = 120; the lead's brake
/// light comes on at 120, TTC is 25 deci and the ego brakes at 120 + offset.
FactBase boundary_base(int brake_offset);

/// Random ego trace: lanes with speed limits, positions, speeds and
/// ttc_deci facts, including values that sit exactly on the thresholds.
FactBase random_trace(std::uint64_t seed);

using TimedViolations = std::set<std::pair<std::string, std::int64_t>>;

/// Imperative Q-02 check: (vehicle, T) where the ego's speed exceeds the
/// limit of a lane box containing it.
TimedViolations scan_speed_limit(const FactBase& fb);
/// Imperative Q-04 check: (vehicle, T) with ttc_deci below 15.
TimedViolations scan_min_ttc(const FactBase& fb);

} // namespace esn::testing
