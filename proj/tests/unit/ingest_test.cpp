#include <doctest.h>

#include "esn/error.hpp"
#include "esn/ingest.hpp"
#include "esn/parser.hpp"

#include <cmath>
#include <map>

using namespace esn;

namespace {

const char* kMeta = R"({"type": "meta", "scenario_id": "T-1", "time_step": 0.1})";

std::string traj(double t, const char* id, double x, double vx, double y = -1.75, const char* cls = "car") {
    char buf[400];
    std::snprintf(buf, sizeof buf,
                  R"({"type": "trajectory", "t": %.1f, "object_id": "%s", "class": "%s", "x": %.3f, "y": %.3f, "z": 0.5, )"
                  R"("vx": %.3f, "vy": 0, "vz": 0, "heading": 0})",
                  t, id, cls, x, y, vx);
    return buf;
}

std::string lines(std::initializer_list<std::string> ls) {
    std::string out;
    for (const auto& l : ls) out += l + "\n";
    return out;
}

std::size_t count(const FactBase& fb, const char* fluent, std::uint32_t arity) {
    return fb.fluent_bucket(PredicateKey("holds", 2), PredicateKey(fluent, arity)).size();
}

} // namespace

TEST_CASE("trajectory record becomes position, velocity, heading") {
    auto log = parse_log(lines({kMeta,
                                R"({"type": "trajectory", "t": 0.1, "object_id": "car_01", "class": "car", "x": 15.2, )"
                                R"("y": 45.8, "z": 0.5, "vx": 3.0, "vy": 0.0, "vz": 0.0, "heading": 90.0})"}));
    auto [fb, report] = asp_ify(log);
    CHECK(fb.contains(parse_term("holds(position(car_01, 15.2, 45.8, 0.5), 1)")));
    CHECK(fb.contains(parse_term("holds(velocity(car_01, 3, 0, 0), 1)")));
    CHECK(fb.contains(parse_term("holds(heading(car_01, 90), 1)")));
    CHECK(fb.contains(parse_term("object_property(car_01, class, car)")));
    CHECK(report.total_emitted() == fb.size());
}

TEST_CASE("cockpit and roadside records") {
    auto log = parse_log(lines({
        kMeta,
        R"({"type": "cockpit", "t": 0.2, "kind": "brake_pedal_pressed", "id": "car_02"})",
        R"({"type": "cockpit", "t": 0.3, "kind": "driver_state", "id": "car_02", "payload": {"state": "distracted"}})",
        R"({"type": "cockpit", "t": 0.4, "kind": "voice_command", "id": "car_02", "payload": {"text": "call home"}})",
        R"({"type": "roadside", "t": 0.5, "kind": "traffic_light_state", "id": "lane_001", "payload": {"color": "red"}})",
        R"({"type": "roadside", "t": 0.5, "kind": "spat", "id": "tl_a", "payload": {"color": "green"}})",
        R"({"type": "roadside", "t": 0.6, "kind": "v2x_warning", "payload": {"warning": "red_light_ahead"}})",
        R"({"type": "map", "lane_id": "lane_001", "y_min": 0, "y_max": 3.5, "x_start": 0, "x_end": 100, "speed_limit": 13.411})",
    }));
    auto [fb, report] = asp_ify(log);
    CHECK(fb.contains(parse_term("occurs(brake_pedal_pressed(car_02), 2)")));
    CHECK(fb.contains(parse_term("holds(driver_state(car_02, distracted), 3)")));
    CHECK(fb.contains(parse_term("occurs(voice_command(\"call home\"), 4)")));
    CHECK(fb.contains(parse_term("holds(traffic_light_state(lane_001, red), 5)")));
    CHECK(fb.contains(parse_term("holds(traffic_light_state(tl_a, green), 5)")));
    CHECK(fb.contains(parse_term("occurs(v2x_warning(red_light_ahead), 6)")));
    CHECK(fb.contains(parse_term("map_lane(lane_001, 0, 3.5, 0, 100, 13.411)")));
    CHECK(fb.size() == 7);
    CHECK(report.total_emitted() == 7);
}

TEST_CASE("empty log") {
    auto [fb, report] = asp_ify(parse_log(lines({kMeta})));
    CHECK(fb.empty());
    CHECK(report.total_emitted() == 0);
    CHECK(report.records_dropped.empty());
    CHECK(ingest(parse_log(lines({kMeta}))).facts.empty());
}

TEST_CASE("time conversion") {
    Numeric zero{};
    CHECK(to_deciseconds(Numeric::from_milli(1300), zero) == 13);
    CHECK(to_deciseconds(Numeric::from_int(1622541987) + Numeric::from_milli(100), Numeric::from_int(1622541987)) == 1);
    CHECK_THROWS_AS(to_deciseconds(Numeric::from_milli(1250), zero), GridError);
    CHECK_THROWS_AS(to_deciseconds(Numeric::from_milli(-100), zero), GridError);
}

TEST_CASE("schema errors carry the record line and field") {
    auto expect = [](const std::string& text, std::size_t line, const std::string& field) {
        try {
            parse_log(text);
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            CHECK(e.record == line);
            CHECK(e.field == field);
        }
    };
    expect(lines({kMeta, R"({"type": "trajectory", "t": 0.1, "object_id": "car_01"})"}), 2, "class");
    expect(lines({kMeta, "", R"({"type": "warp"})"}), 3, "type");
    expect(lines({kMeta, R"({"type": "trajectory", "t": 0.1, "object_id": "Car", "class": "car"})"}), 2, "object_id");
    expect(lines({R"({"type": "map"})"}), 1, "type");
    expect(lines({kMeta, "{not json"}), 2, "<json>");
    expect(lines({R"({"type": "meta", "scenario_id": "x", "time_step": 0.15})"}), 1, "time_step");
}

TEST_CASE("time ordering and grid errors") {
    auto backwards = parse_log(lines({kMeta, traj(0.2, "a", 0, 1), traj(0.1, "a", 0, 1)}));
    CHECK_THROWS_AS(asp_ify(backwards), NonMonotonicTimeError);
    // different objects are independent streams
    CHECK_NOTHROW(asp_ify(parse_log(lines({kMeta, traj(0.2, "a", 0, 1), traj(0.1, "b", 0, 1)}))));
    auto off_grid = parse_log(lines({kMeta, traj(0.0, "a", 0, 1)}) + R"({"type": "cockpit", "t": 0.15, "kind": "brake_pedal_pressed", "id": "a"})" "\n");
    CHECK_THROWS_AS(asp_ify(off_grid), GridError);
    auto hole = parse_log(lines({kMeta, traj(0.0, "a", 0, 1), traj(0.1, "a", 0.1, 1), traj(0.3, "a", 0.3, 1)}));
    CHECK_NOTHROW(asp_ify(hole));
    CHECK_THROWS_AS(ingest(hole), MissingGridError);
}

TEST_CASE("time-to-collision") {
    // A at x=0 doing 10 m/s, B at x=25 doing 5 m/s: 25 m / 5 m/s = 5.0 s = 50 deci
    auto log = parse_log(lines({R"({"type": "map", "lane_id": "l", "y_min": -3.5, "y_max": 0, "x_start": -10, "x_end": 500, "speed_limit": 30})",
                                traj(0.0, "a", 0, 10), traj(0.0, "b", 25, 5), traj(0.0, "c", 40, 5), traj(0.0, "d", 60, 5, 1.75)}).insert(0, std::string(kMeta) + "\n"));
    FactBase fb = ingest(log).facts;
    CHECK(fb.contains(parse_term("holds(ttc_deci(a, b, 50), 0)")));
    CHECK(fb.contains(parse_term("holds(ttc_deci(a, c, 80), 0)")));
    // equal speeds: not closing; d is in no lane
    CHECK(count(fb, "ttc_deci", 3) == 2);

    // clamped to 999
    auto far = parse_log(lines({kMeta, traj(0.0, "a", 0, 5.1), traj(0.0, "b", 500, 5)}));
    CHECK(ingest(far).facts.contains(parse_term("holds(ttc_deci(a, b, 999), 0)")));
}

TEST_CASE("constant velocity gives zero acceleration and jerk") {
    std::vector<std::string> ls{kMeta};
    for (int k = 0; k < 6; ++k) ls.push_back(traj(k * 0.1, "a", 2.0 * k * 0.1, 2.0));
    std::string text;
    for (auto& l : ls) text += l + "\n";
    IngestResult r = ingest(parse_log(text));
    // forward differences: the last point has no acceleration, the last two no jerk
    CHECK(count(r.facts, "acceleration", 2) == 5);
    CHECK(count(r.facts, "jerk", 2) == 4);
    for (const auto& f : r.facts.fluent_bucket(PredicateKey("holds", 2), PredicateKey("acceleration", 2)))
        CHECK(f.arg(0).arg(1).as_number() == Numeric{});
    for (const auto& f : r.facts.fluent_bucket(PredicateKey("holds", 2), PredicateKey("jerk", 2)))
        CHECK(f.arg(0).arg(1).as_number() == Numeric{});
    CHECK(r.report.derived.at("acceleration") == 5);
    CHECK(r.report.derived.at("jerk") == 4);
}

TEST_CASE("finite differences against a closed form") {
    // vx(t) = 1 + 2t + t^2 at t = 0.0 .. 0.5: a(t) = (vx(t+h) - vx(t)) / h = 2 + 2t + h
    std::string text = std::string(kMeta) + "\n";
    for (int k = 0; k < 6; ++k) {
        double t = k * 0.1;
        text += traj(t, "a", 0, 1 + 2 * t + t * t) + "\n";
    }
    FactBase fb = ingest(parse_log(text)).facts;
    for (int k = 0; k < 5; ++k) {
        double t = k * 0.1;
        auto expect = Numeric::from_double(2 + 2 * t + 0.1);
        CHECK(fb.contains(Term::compound("holds", {Term::compound("acceleration", {Term::symbol("a"), Term::number(expect)}),
                                                   Term::number(Numeric::from_int(k))})));
    }
    // jerk of a linear acceleration is 2
    CHECK(fb.contains(parse_term("holds(jerk(a, 2), 0)")));
}

TEST_CASE("accounting and idempotence on generated logs") {
    for (const auto& id : scenario_ids()) {
        ScenarioLog log = generate_scenario(id, Variant::violating, 11);
        std::size_t trajectories = 0;
        for (const auto& r : log.records) trajectories += std::holds_alternative<TrajectoryRecord>(r);
        FactBase fb;
        IngestReport report;
        asp_ify_into(log, fb, report);
        CHECK(count(fb, "position", 4) == trajectories);
        CHECK(count(fb, "velocity", 4) == trajectories);
        CHECK(count(fb, "heading", 2) == trajectories);
        CHECK(report.total_emitted() == fb.size());

        std::size_t before = fb.size();
        IngestReport again;
        asp_ify_into(log, fb, again);
        CHECK(fb.size() == before);
        CHECK(again.total_emitted() == 0);

        IngestResult full = ingest(log);
        CHECK(full.report.total_emitted() == full.facts.size());
    }
}

TEST_CASE("log round trip") {
    ScenarioLog log = generate_scenario("SC-04", Variant::compliant, 2);
    std::string text = write_log(log);
    ScenarioLog back = parse_log(text);
    CHECK(write_log(back) == text);
    CHECK(back.meta.labels == log.meta.labels);
    CHECK(ingest(back).facts == ingest(log).facts);
}

TEST_CASE("generators are deterministic") {
    for (const auto& id : scenario_ids()) {
        for (Variant v : {Variant::compliant, Variant::violating}) {
            CHECK(write_log(generate_scenario(id, v, 9)) == write_log(generate_scenario(id, v, 9)));
        }
        CHECK(write_log(generate_scenario(id, Variant::compliant, 9)) != write_log(generate_scenario(id, Variant::compliant, 10)));
    }
    CHECK_THROWS_AS(generate_scenario("SC-99", Variant::compliant, 1), UnknownScenarioId);
    CHECK(parse_variant("violating") == Variant::violating);
    CHECK_FALSE(parse_variant("other").has_value());
}

TEST_CASE("emergency braking scenario facts") {
    // lead car_01 brakes at T_b = 40 deci; TTC there is g0 / 5 m/s with g0 in [11.5, 13.5]
    for (Variant v : {Variant::violating, Variant::compliant}) {
        FactBase fb = ingest(generate_scenario("SC-13", v, 7)).facts;
        CHECK(fb.contains(parse_term("occurs(brake_light_on(car_01), 40)")));
        auto ttc = fb.fluent_bucket(PredicateKey("holds", 2), PredicateKey("ttc_deci", 3));
        bool found = false;
        for (const auto& f : ttc) {
            if (f.arg(1) == Term::number(Numeric::from_int(40)) && f.arg(0).arg(0).name() == "ego" && f.arg(0).arg(1).name() == "car_01") {
                auto d = f.arg(0).arg(2).as_number().round_to_int();
                CHECK(d >= 23);
                CHECK(d < 30);
                found = true;
            }
        }
        CHECK(found);
        auto brakes = fb.fluent_bucket(PredicateKey("occurs", 2), PredicateKey("brake_pedal_pressed", 1));
        REQUIRE(brakes.size() == 1);
        std::int64_t t_brake = brakes[0].arg(1).as_number().round_to_int();
        CHECK(t_brake == (v == Variant::compliant ? 43 : 46));
    }
}
