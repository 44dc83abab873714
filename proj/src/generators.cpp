#include "esn/error.hpp"
#include "esn/ingest.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace esn {

const char* to_string(Variant v) { return v == Variant::compliant ? "compliant" : "violating"; }

std::optional<Variant> parse_variant(std::string_view s) {
    if (s == "compliant") return Variant::compliant;
    if (s == "violating") return Variant::violating;
    return std::nullopt;
}

const std::vector<std::string>& scenario_ids() {
    static const std::vector<std::string> ids = {"SC-01", "SC-02", "SC-04", "SC-12", "SC-13", "SC-20"};
    return ids;
}

namespace {

constexpr double kDt = 0.1;
constexpr double kUrbanLimit = 13.411;   // 30 mph
constexpr double kHighwayLimit = 33.333;  // 120 km/h

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    // Built from raw 64-bit draws so sequences match across standard libraries.
    double uniform(double lo, double hi) {
        double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

private:
    std::mt19937_64 gen_;
};

/// Piecewise-constant acceleration. Before time 0 the initial speed holds.
class SpeedProfile {
public:
    explicit SpeedProfile(double v0) : v_end_(v0), v0_(v0) {}

    SpeedProfile& hold(double duration) { return push(duration, 0.0); }
    SpeedProfile& accel(double duration, double a) { return push(duration, a); }
    /// Accelerates (or brakes) at `a` until reaching `target`.
    SpeedProfile& ramp_to(double target, double a) { return push((target - v_end_) / a, a); }
    /// Instantaneous speed change (a pedestrian starting to walk).
    SpeedProfile& jump_to(double v) {
        segments_.push_back({t_end_, 0.0, v, 0.0, d_end_});
        v_end_ = v;
        return *this;
    }

    double speed(double t) const {
        if (t < 0) return v0_;
        const Segment* s = find(t);
        if (!s) return v_end_;
        return s->v_start + s->a * (t - s->t0);
    }

    double distance(double t) const {
        if (t < 0) return v0_ * t;
        const Segment* s = find(t);
        if (!s) return d_end_ + v_end_ * (t - t_end_);
        double u = t - s->t0;
        return s->d_start + s->v_start * u + 0.5 * s->a * u * u;
    }

    double end_time() const { return t_end_; }

private:
    struct Segment {
        double t0, duration, v_start, a, d_start;
    };

    SpeedProfile& push(double duration, double a) {
        segments_.push_back({t_end_, duration, v_end_, a, d_end_});
        d_end_ += v_end_ * duration + 0.5 * a * duration * duration;
        v_end_ += a * duration;
        t_end_ += duration;
        return *this;
    }

    const Segment* find(double t) const {
        for (const auto& s : segments_) {
            if (t < s.t0 + s.duration) return &s;
        }
        return nullptr;
    }

    std::vector<Segment> segments_;
    double t_end_ = 0.0;
    double d_end_ = 0.0;
    double v_end_;
    double v0_;
};

struct Pose {
    double x, y, heading_deg;
};

/// Straight lines and circular arcs chained from a start pose.
class Path {
public:
    Path(double x, double y, double heading_deg) : start_{x, y, heading_deg} {}

    Path& line(double length) {
        pieces_.push_back({length, 0.0});
        return *this;
    }
    /// Positive angle turns left.
    Path& arc(double radius, double angle_deg) {
        pieces_.push_back({radius * std::abs(angle_deg) * std::numbers::pi / 180.0, angle_deg > 0 ? 1.0 / radius : -1.0 / radius});
        return *this;
    }

    Pose at(double s) const {
        Pose p = start_;
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            const Piece& piece = pieces_[i];
            bool last = i + 1 == pieces_.size();
            double len = (last || s < piece.length) ? s : piece.length;
            advance(p, piece.curvature, len);
            s -= len;
            if (s <= 0) break;
        }
        return p;
    }

private:
    struct Piece {
        double length;
        double curvature;
    };

    static void advance(Pose& p, double k, double len) {
        double h = p.heading_deg * std::numbers::pi / 180.0;
        if (k == 0.0) {
            p.x += len * std::cos(h);
            p.y += len * std::sin(h);
            return;
        }
        double dh = k * len;
        p.x += (std::sin(h + dh) - std::sin(h)) / k;
        p.y += (std::cos(h) - std::cos(h + dh)) / k;
        p.heading_deg += dh * 180.0 / std::numbers::pi;
    }

    Pose start_;
    std::vector<Piece> pieces_;
};

struct Actor {
    Actor(std::string id_, std::string cls_, Path path_, SpeedProfile profile_)
        : id(std::move(id_)), cls(std::move(cls_)), path(std::move(path_)), profile(std::move(profile_)) {}

    std::string id;
    std::string cls;
    Path path;
    SpeedProfile profile;
    double z = 0.5;
    double delay = 0.0;  // profile time = scenario time - delay
    std::optional<std::string> turn_signal;
    bool abs = false;
    std::vector<std::pair<double, std::string>> events;
    /// Optional explicit pose override (cut-in lateral motion).
    std::function<Pose(double t, const Pose& base, double speed, double& vx, double& vy)> shape;
};

Numeric n(double v) { return Numeric::from_double(v); }

std::int64_t tick(double t) { return static_cast<std::int64_t>(std::llround(t / kDt)); }

Numeric at_tick(std::int64_t k) { return Numeric::from_milli(k * 100); }

void add_lane(ScenarioLog& log, const char* id, double y0, double y1, double x0, double x1, double limit) {
    log.add(MapRecord{id, n(y0), n(y1), n(x0), n(x1), n(limit)});
}

/// Samples every actor on the 0.1 s grid for ticks [0, last].
void sample(ScenarioLog& log, std::vector<Actor>& actors, std::int64_t last) {
    for (std::int64_t k = 0; k <= last; ++k) {
        double t = static_cast<double>(k) * kDt;
        for (auto& a : actors) {
            double tau = t - a.delay;
            double s = a.profile.distance(tau);
            double v = a.profile.speed(tau);
            Pose p = a.path.at(s);
            double h = p.heading_deg * std::numbers::pi / 180.0;
            double vx = v * std::cos(h), vy = v * std::sin(h);
            if (a.shape) p = a.shape(t, p, v, vx, vy);
            TrajectoryRecord r;
            r.t = at_tick(k);
            r.object_id = a.id;
            r.object_class = a.cls;
            r.x = n(p.x);
            r.y = n(p.y);
            r.z = n(a.z);
            r.vx = n(vx);
            r.vy = n(vy);
            r.vz = n(0.0);
            r.heading = n(p.heading_deg);
            r.turn_signal = a.turn_signal;
            if (a.abs) {
                double next = a.profile.speed(tau + kDt);
                r.abs_status = n(next).milli() < n(v).milli() ? "engaged" : "off";
            }
            for (const auto& [et, name] : a.events) {
                if (tick(et) == k) r.events.push_back(name);
            }
            log.add(std::move(r));
        }
    }
}

void brake_pedal(ScenarioLog& log, const std::string& id, double t) {
    log.add(CockpitRecord{at_tick(tick(t)), "brake_pedal_pressed", id, {}});
}

void driver_state(ScenarioLog& log, const std::string& id, double t, const char* state) {
    log.add(CockpitRecord{at_tick(tick(t)), "driver_state", id, state});
}

// ---- SC-01: unprotected left turn across oncoming traffic ---------------

ScenarioLog sc01(Variant variant, Rng& rng) {
    ScenarioLog log;
    add_lane(log, "lane_east", -3.5, 0.0, -100.0, 300.0, kUrbanLimit);
    add_lane(log, "lane_west", 0.0, 3.5, -100.0, 300.0, kUrbanLimit);
    add_lane(log, "lane_north", 3.5, 100.0, 0.0, 3.5, kUrbanLimit);
    add_lane(log, "parking", -6.0, -3.5, -100.0, 300.0, 0.0);
    log.add(StopLineRecord{"stop_east", "lane_east", n(-5.0)});

    // ego stops short of the line, creeps up to it, then turns left
    Actor ego("ego", "car", Path(-40.0, -1.75, 0.0), SpeedProfile(8.0));
    ego.path.line(35.0).arc(6.75, 90.0).line(200.0);
    ego.profile.hold(1.875).accel(4.0, -2.0).hold(2.0).accel(2.0, 2.0);
    ego.turn_signal = "left";
    const double turn_start = 1.875 + 4.0 + 2.0 + 2.0;

    double o1_x = rng.uniform(50.0, 70.0);
    double gap = variant == Variant::compliant ? rng.uniform(125.0, 140.0) : rng.uniform(30.0, 45.0);
    Actor o1("car_01", "car", Path(o1_x, 1.75, 180.0), SpeedProfile(12.0));
    o1.path.line(1000.0);
    double o2_x = -5.0 + gap + 12.0 * turn_start;
    Actor o2("car_02", "car", Path(o2_x, 1.75, 180.0), SpeedProfile(12.0));
    o2.path.line(1000.0);
    Actor truck("truck_01", "truck", Path(-20.0, -4.75, 0.0), SpeedProfile(0.0));
    truck.path.line(1.0);
    truck.z = 1.5;

    std::vector<Actor> actors{ego, o1, o2, truck};
    sample(log, actors, tick(turn_start + 5.0));
    log.meta.labels = {{"Q-06", variant == Variant::compliant ? "pass" : "violated"},
                       {"Q-01", "pass"}, {"Q-02", "pass"}, {"Q-03", "pass"}, {"Q-F3", "pass"},
                       {"Q-05", "error"}, {"Q-08", "error"}};
    return log;
}

// ---- SC-02: pedestrian steps out from behind a parked van ---------------

ScenarioLog sc02(Variant variant, Rng& rng) {
    ScenarioLog log;
    add_lane(log, "lane_east", -3.5, 0.0, -100.0, 200.0, kUrbanLimit);
    add_lane(log, "parking", -6.0, -3.5, -100.0, 200.0, 0.0);

    double t_walk = rng.uniform(1.5, 2.5);
    Actor ped("ped_01", "pedestrian", Path(35.0, -5.0, 90.0), SpeedProfile(0.0));
    ped.path.line(100.0);
    ped.profile.hold(t_walk).jump_to(1.5);
    ped.z = 0.9;
    const double t_enter = t_walk + 1.0;  // reaches the lane edge at y = -3.5

    // the violating ego approaches fast and brakes only once the pedestrian is in the lane
    bool fast = variant == Variant::violating;
    Actor ego("ego", "car", Path(fast ? -21.0 : -15.0, -1.75, 0.0), SpeedProfile(fast ? 12.0 : 4.0));
    ego.path.line(1000.0);
    if (fast) ego.profile.hold(t_enter).ramp_to(0.0, -6.0);
    Actor van("van_01", "van", Path(30.0, -4.75, 0.0), SpeedProfile(0.0));
    van.path.line(1.0);
    van.z = 1.2;

    std::vector<Actor> actors{ego, ped, van};
    sample(log, actors, tick(t_walk + 4.5));
    if (variant == Variant::violating) brake_pedal(log, "ego", t_enter);
    log.meta.labels = {{"Q-08", variant == Variant::compliant ? "pass" : "violated"},
                       {"Q-02", "pass"}, {"Q-06", "pass"}, {"Q-F3", "pass"},
                       {"Q-01", "error"}, {"Q-03", "error"}, {"Q-05", "error"}};
    return log;
}

// ---- SC-04: red-light runner at a signalised junction --------------------

ScenarioLog sc04(Variant variant, Rng& rng) {
    ScenarioLog log;
    add_lane(log, "lane_east", -3.5, 0.0, -100.0, 300.0, kUrbanLimit);
    add_lane(log, "lane_north", -100.0, -3.5, 0.0, 3.5, kUrbanLimit);
    log.add(StopLineRecord{"stop_east", "lane_east", n(-5.0)});

    const double green = 2.0;
    double cruise = variant == Variant::compliant ? rng.uniform(10.0, 12.5) : rng.uniform(15.0, 18.0);
    Actor ego("ego", "car", Path(-8.0, -1.75, 0.0), SpeedProfile(0.0));
    ego.path.line(1000.0);
    ego.profile.hold(green).ramp_to(cruise, 2.5);

    Actor runner("car_runner", "car", Path(1.75, -42.0, 90.0), SpeedProfile(14.0));
    runner.path.line(1000.0);

    std::vector<Actor> actors{ego, runner};
    const double end = 10.0;
    sample(log, actors, tick(end));
    for (std::int64_t k = 0; k <= tick(end); ++k) {
        double t = static_cast<double>(k) * kDt;
        log.add(RoadsideRecord{at_tick(k), "traffic_light_state", "tl_east", t < green ? "red" : "green"});
        log.add(RoadsideRecord{at_tick(k), "traffic_light_state", "tl_north", t < green ? "green" : "red"});
    }
    log.add(RoadsideRecord{at_tick(tick(2.5)), "v2x_warning", "rsu_01", "red_light_ahead"});
    log.meta.labels = {{"Q-02", variant == Variant::compliant ? "pass" : "violated"},
                       {"Q-01", "pass"}, {"Q-06", "pass"}, {"Q-F3", "pass"},
                       {"Q-03", "error"}, {"Q-05", "error"}, {"Q-08", "error"}};
    return log;
}

// ---- SC-12: cut-in with minimal headway, then the intruder brakes --------

ScenarioLog sc12(Variant variant, Rng& rng) {
    ScenarioLog log;
    add_lane(log, "lane_right", -3.5, 0.0, -200.0, 5000.0, kHighwayLimit);
    add_lane(log, "lane_left", 0.0, 3.5, -200.0, 5000.0, kHighwayLimit);

    double g0 = rng.uniform(11.5, 13.5);
    const double cut_start = 2.0, cut_len = 1.5;
    const double t_b = cut_start + cut_len + 0.5;
    // NPC x at t_b equals ego x + g0; both speeds constant until then
    double npc_x0 = 25.0 * t_b + g0 - 20.0 * t_b;

    Actor ego("ego", "car", Path(0.0, -1.75, 0.0), SpeedProfile(25.0));
    ego.path.line(5000.0);
    double brake_at = variant == Variant::compliant ? t_b + 0.2 : t_b + 0.8;
    double decel = variant == Variant::compliant ? -6.0 : -8.0;
    ego.profile.hold(brake_at).ramp_to(8.0, decel);

    Actor npc("car_cut", "car", Path(npc_x0, 1.75, 0.0), SpeedProfile(20.0));
    npc.path.line(5000.0);
    npc.profile.hold(t_b).ramp_to(10.0, -3.0);
    npc.events = {{t_b, "brake_light_on"}};
    npc.shape = [=](double t, const Pose& base, double, double& vx, double& vy) {
        Pose p = base;
        const double lateral = -3.5 / cut_len;
        if (t <= cut_start) return p;
        if (t < cut_start + cut_len) {
            p.y = 1.75 + lateral * (t - cut_start);
            vy = lateral;
            p.heading_deg = std::atan2(vy, vx) * 180.0 / std::numbers::pi;
            return p;
        }
        p.y = -1.75;
        return p;
    };

    std::vector<Actor> actors{ego, npc};
    sample(log, actors, tick(t_b + 5.0));
    brake_pedal(log, "ego", brake_at);
    driver_state(log, "ego", 0.0, "attentive");
    if (variant == Variant::violating) driver_state(log, "ego", t_b, "distracted");
    const char* target = variant == Variant::compliant ? "pass" : "violated";
    log.meta.labels = {{"Q-F3", target}, {"Q-04", target},
                       {"Q-02", "pass"}, {"Q-06", "pass"},
                       {"Q-01", "error"}, {"Q-03", "error"}, {"Q-05", "error"}, {"Q-08", "error"}};
    return log;
}

// ---- SC-13: lead vehicle brakes hard in a braking cascade ---------------

ScenarioLog sc13(Variant variant, Rng& rng) {
    ScenarioLog log;
    add_lane(log, "lane_right", -3.5, 0.0, -200.0, 5000.0, kHighwayLimit);

    double g0 = rng.uniform(11.5, 13.5);
    const double t_b = 4.0;
    double lead_x0 = g0 + 5.0 * t_b;

    Actor ego("ego", "car", Path(0.0, -1.75, 0.0), SpeedProfile(25.0));
    ego.path.line(5000.0);
    double brake_at = variant == Variant::compliant ? t_b + 0.3 : t_b + 0.6;
    ego.profile.hold(brake_at).ramp_to(0.0, -9.0);
    ego.abs = true;

    auto lead = [&](const char* id, double x0, double brake) {
        Actor a(id, "car", Path(x0, -1.75, 0.0), SpeedProfile(20.0));
        a.path.line(5000.0);
        a.profile.hold(brake).ramp_to(0.0, -6.0);
        a.events = {{brake, "brake_light_on"}};
        return a;
    };
    std::vector<Actor> actors{ego, lead("car_01", lead_x0, t_b), lead("car_02", lead_x0 + 25.0, t_b - 0.5),
                              lead("car_03", lead_x0 + 50.0, t_b - 1.0)};
    sample(log, actors, tick(t_b + 1.6));
    brake_pedal(log, "ego", brake_at);
    log.meta.labels = {{"Q-F3", variant == Variant::compliant ? "pass" : "violated"},
                       {"Q-02", "pass"}, {"Q-05", "pass"}, {"Q-06", "pass"},
                       {"Q-01", "error"}, {"Q-03", "error"}, {"Q-08", "error"}};
    return log;
}

// ---- SC-20: platoon following through stop-and-go waves ------------------

ScenarioLog sc20(Variant variant, Rng& rng) {
    ScenarioLog log;
    add_lane(log, "lane_right", -3.5, 0.0, -200.0, 5000.0, kHighwayLimit);

    double gap0 = variant == Variant::compliant ? rng.uniform(30.0, 40.0) : rng.uniform(20.5, 21.5);
    double delay = variant == Variant::compliant ? 1.0 : 2.0;
    auto wave = [](SpeedProfile& p) {
        for (int i = 0; i < 2; ++i) p.hold(3.0).accel(5.0, -2.0).hold(4.0).accel(5.0, 2.0).hold(6.0);
    };
    std::vector<double> brake_times = {3.0, 26.0};

    Actor lead("car_lead", "car", Path(100.0, -1.75, 0.0), SpeedProfile(15.0));
    lead.path.line(5000.0);
    wave(lead.profile);
    for (double t : brake_times) lead.events.emplace_back(t, "brake_light_on");

    Actor ego("ego", "car", Path(100.0 - gap0, -1.75, 0.0), SpeedProfile(15.0));
    ego.path.line(5000.0);
    wave(ego.profile);
    ego.delay = delay;
    // with a delayed copy of the profile, the start must move back by the lag
    ego.path = Path(100.0 - gap0 + 15.0 * delay, -1.75, 0.0);
    ego.path.line(5000.0);

    Actor rear("car_rear", "car", Path(100.0 - gap0 - 30.0 + 15.0 * (delay + 1.0), -1.75, 0.0), SpeedProfile(15.0));
    rear.path.line(5000.0);
    wave(rear.profile);
    rear.delay = delay + 1.0;

    std::vector<Actor> actors{lead, ego, rear};
    sample(log, actors, tick(46.0 + delay + 2.0));
    const char* target = variant == Variant::compliant ? "pass" : "violated";
    log.meta.labels = {{"Q-04", target},
                       {"Q-F3", "pass"}, {"Q-02", "pass"}, {"Q-06", "pass"},
                       {"Q-01", "error"}, {"Q-03", "error"}, {"Q-05", "error"}, {"Q-08", "error"}};
    return log;
}

std::uint64_t scenario_salt(std::string_view id) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : id) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    return h;
}

} // namespace

ScenarioLog generate_scenario(std::string_view id, Variant variant, std::uint64_t seed) {
    Rng rng(seed ^ scenario_salt(id));
    ScenarioLog log;
    if (id == "SC-01") log = sc01(variant, rng);
    else if (id == "SC-02") log = sc02(variant, rng);
    else if (id == "SC-04") log = sc04(variant, rng);
    else if (id == "SC-12") log = sc12(variant, rng);
    else if (id == "SC-13") log = sc13(variant, rng);
    else if (id == "SC-20") log = sc20(variant, rng);
    else throw UnknownScenarioId(std::string(id));
    log.meta.scenario_id = std::string(id);
    log.meta.time_step = Numeric::from_milli(100);
    log.meta.start_time = Numeric{};
    log.meta.epoch_offset = Numeric::from_int(1622541987);
    log.meta.ego = "ego";
    log.meta.variant = to_string(variant);
    log.meta.seed = seed;
    return log;
}

} // namespace esn
