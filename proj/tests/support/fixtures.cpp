#include "support/fixtures.hpp"

#include "esn/parser.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace esn::testing {

FactBase facts_of(const std::string& src) {
    FactBase fb;
    for (const auto& f : parse_program(src).facts) fb.insert(f);
    return fb;
}

FactBase braking_base() {
    return facts_of(R"(
is_following(ego, lead, 120).
occurs(brake_light_on(lead), 120).
holds(ttc_deci(ego, lead, 25), 120).
occurs(brake_pedal_pressed(ego), 127).
object_property(ego, class, car).
object_property(lead, class, car).
)");
}

FactBase boundary_base(int brake_offset) {
    FactBase fb = facts_of(R"(
ego(ego).
holds(position(ego, 100, -1.75, 0.5), 120).
holds(position(lead, 112, -1.75, 0.5), 120).
occurs(brake_light_on(lead), 120).
holds(ttc_deci(ego, lead, 25), 120).
)");
    fb.insert(parse_term("occurs(brake_pedal_pressed(ego), " + std::to_string(120 + brake_offset) + ")"));
    return fb;
}

namespace {

Term num(std::int64_t milli) { return Term::number(Numeric::from_milli(milli)); }
Term at(std::int64_t t) { return Term::number(Numeric::from_int(t)); }

std::int64_t milli(const Term& t) { return t.as_number().milli(); }

} // namespace

FactBase random_trace(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    FactBase fb;
    fb.insert(parse_term("ego(ego)"));

    struct Lane {
        std::int64_t y0, y1, x0, x1, limit;
    };
    std::vector<Lane> lanes;
    std::int64_t y = -3500 * pick(0, 2);
    int n_lanes = static_cast<int>(pick(1, 3));
    for (int i = 0; i < n_lanes; ++i) {
        Lane l{y, y + 3500, -pick(0, 50) * 1000, pick(100, 300) * 1000, pick(8000, 16000)};
        lanes.push_back(l);
        y += 3500;
        fb.insert(Term::compound("map_lane", {Term::symbol("lane_" + std::to_string(i)), num(l.y0), num(l.y1), num(l.x0),
                                              num(l.x1), num(l.limit)}));
    }

    // about half the traces stay within every limit / above the TTC threshold
    std::int64_t cap = lanes[0].limit;
    for (const auto& l : lanes) cap = std::min(cap, l.limit);
    bool fast = pick(0, 1) == 1;
    bool close = pick(0, 1) == 1;

    std::vector<std::string> others = {"car_01", "car_02"};
    int ticks = static_cast<int>(pick(20, 60));
    for (int t = 0; t < ticks; ++t) {
        const Lane& l = lanes[static_cast<std::size_t>(pick(0, n_lanes - 1))];
        std::int64_t px = pick(-60, 320) * 1000 + pick(0, 999);
        std::int64_t py = pick(l.y0 - 500, l.y1 + 500);
        std::int64_t speed = pick(0, 3) == 0 ? cap : pick(0, fast ? 20000 : cap);
        fb.insert(Term::compound("holds", {Term::compound("position", {Term::symbol("ego"), num(px), num(py), num(500)}), at(t)}));
        fb.insert(Term::compound("holds", {Term::compound("speed", {Term::symbol("ego"), num(speed)}), at(t)}));
        for (const auto& o : others) {
            if (pick(0, 2) != 0) continue;
            std::int64_t ttc = pick(0, 4) == 0 ? 15 : pick(close ? 0 : 15, 60);
            std::string follower = pick(0, 1) ? "ego" : o;
            std::string lead = follower == "ego" ? o : "ego";
            fb.insert(Term::compound("holds", {Term::compound("ttc_deci", {Term::symbol(follower), Term::symbol(lead),
                                                                           Term::number(Numeric::from_int(ttc))}),
                                               at(t)}));
        }
    }
    return fb;
}

TimedViolations scan_speed_limit(const FactBase& fb) {
    std::vector<Fact> lanes;
    for (const auto& f : fb.facts()) {
        if (f.is_compound() && f.name() == "map_lane" && f.arity() == 6) lanes.push_back(f);
    }
    std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> position;  // T -> (x, y)
    std::map<std::int64_t, std::int64_t> speed;
    for (const auto& f : fb.facts()) {
        if (!f.is_compound() || f.name() != "holds") continue;
        const Term& inner = f.arg(0);
        if (inner.arg(0).name() != "ego") continue;
        std::int64_t t = f.arg(1).as_number().round_to_int();
        if (inner.name() == "position") position[t] = {milli(inner.arg(1)), milli(inner.arg(2))};
        if (inner.name() == "speed") speed[t] = milli(inner.arg(1));
    }
    TimedViolations out;
    for (const auto& [t, v] : speed) {
        auto p = position.find(t);
        if (p == position.end()) continue;
        auto [x, y] = p->second;
        // max over the lanes containing the ego of (speed - limit)
        std::optional<std::int64_t> worst;
        for (const auto& l : lanes) {
            if (milli(l.arg(1)) <= y && y < milli(l.arg(2)) && milli(l.arg(3)) <= x && x <= milli(l.arg(4))) {
                std::int64_t excess = v - milli(l.arg(5));
                worst = worst ? std::max(*worst, excess) : excess;
            }
        }
        if (worst && *worst > 0) out.insert({"ego", t});
    }
    return out;
}

TimedViolations scan_min_ttc(const FactBase& fb) {
    std::map<std::pair<std::string, std::int64_t>, std::int64_t> minimum;
    for (const auto& f : fb.facts()) {
        if (!f.is_compound() || f.name() != "holds" || f.arg(0).name() != "ttc_deci") continue;
        auto key = std::make_pair(f.arg(0).arg(0).name(), f.arg(1).as_number().round_to_int());
        std::int64_t v = milli(f.arg(0).arg(2));
        auto it = minimum.find(key);
        if (it == minimum.end() || v < it->second) minimum[key] = v;
    }
    TimedViolations out;
    for (const auto& [key, v] : minimum) {
        if (v < 15000) out.insert(key);
    }
    return out;
}

} // namespace esn::testing
