#include "esn/error.hpp"
#include "esn/ingest.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace esn {

namespace {

Term sym(const std::string& s) { return Term::symbol(s); }
Term num(Numeric n) { return Term::number(n); }
Term deci(std::int64_t t) { return Term::number(Numeric::from_int(t)); }

Term holds(Term fluent, std::int64_t t) { return Term::compound("holds", {std::move(fluent), deci(t)}); }
Term occurs(Term event, std::int64_t t) { return Term::compound("occurs", {std::move(event), deci(t)}); }

void emit(FactBase& fb, IngestReport& report, const Term& fact) {
    if (fb.insert(fact)) ++report.facts_emitted[fact_signature(fact).to_string()];
}

std::string where(std::size_t line) { return line ? "record at line " + std::to_string(line) : "record"; }

} // namespace

std::size_t IngestReport::total_emitted() const {
    std::size_t n = 0;
    for (const auto& [k, v] : facts_emitted) n += v;
    return n;
}

std::int64_t to_deciseconds(Numeric t, Numeric start) {
    std::int64_t diff = (t - start).milli();
    if (diff < 0) throw GridError("time " + t.to_string() + " is before the scenario start " + start.to_string());
    if (diff % 100 != 0) throw GridError("time " + t.to_string() + " is not a whole number of deciseconds");
    return diff / 100;
}

void asp_ify_into(const ScenarioLog& log, FactBase& fb, IngestReport& report) {
    const LogMeta& meta = log.meta;
    if (!meta.ego.empty()) emit(fb, report, Term::compound("ego", {sym(meta.ego)}));
    std::map<std::string, std::int64_t> last;
    auto check_order = [&](const std::string& stream, std::int64_t t, std::size_t line) {
        auto [it, fresh] = last.emplace(stream, t);
        if (!fresh) {
            if (t <= it->second)
                throw NonMonotonicTimeError(where(line) + ": time " + std::to_string(t) + " for " + stream +
                                            " does not increase (previous " + std::to_string(it->second) + ")");
            it->second = t;
        }
    };

    for (std::size_t i = 0; i < log.records.size(); ++i) {
        std::size_t line = i < log.lines.size() ? log.lines[i] : 0;
        const LogRecord& rec = log.records[i];
        if (const auto* r = std::get_if<TrajectoryRecord>(&rec)) {
            std::int64_t T = 0;
            try {
                T = to_deciseconds(r->t, meta.start_time);
            } catch (const GridError& e) {
                throw GridError(where(line) + ": " + e.what());
            }
            if (((r->t - meta.start_time).milli()) % meta.time_step.milli() != 0)
                throw GridError(where(line) + ": trajectory time " + r->t.to_string() + " is off the " +
                                meta.time_step.to_string() + " s grid");
            check_order("trajectory " + r->object_id, T, line);
            Term id = sym(r->object_id);
            emit(fb, report, holds(Term::compound("position", {id, num(r->x), num(r->y), num(r->z)}), T));
            emit(fb, report, holds(Term::compound("velocity", {id, num(r->vx), num(r->vy), num(r->vz)}), T));
            emit(fb, report, holds(Term::compound("heading", {id, num(r->heading)}), T));
            emit(fb, report, Term::compound("object_property", {id, sym("class"), sym(r->object_class)}));
            if (r->abs_status) emit(fb, report, holds(Term::compound("abs_status", {id, sym(*r->abs_status)}), T));
            if (r->turn_signal) emit(fb, report, holds(Term::compound("turn_signal", {id, sym(*r->turn_signal)}), T));
            for (const auto& e : r->events) emit(fb, report, occurs(Term::compound(e, {id}), T));
        } else if (const auto* c = std::get_if<CockpitRecord>(&rec)) {
            std::int64_t T = 0;
            try {
                T = to_deciseconds(c->t, meta.start_time);
            } catch (const GridError& e) {
                throw GridError(where(line) + ": " + e.what());
            }
            check_order("cockpit " + c->kind + " " + c->id, T, line);
            Term id = sym(c->id);
            if (c->kind == "driver_state") {
                emit(fb, report, holds(Term::compound("driver_state", {id, sym(c->value)}), T));
            } else if (c->kind == "voice_command") {
                emit(fb, report, occurs(Term::compound("voice_command", {Term::string(c->value)}), T));
            } else if (c->kind == "touch_event") {
                emit(fb, report, occurs(Term::compound("touch_event", {Term::string(c->value)}), T));
            } else if (c->kind == "brake_pedal_pressed") {
                emit(fb, report, occurs(Term::compound("brake_pedal_pressed", {id}), T));
            } else {
                report.records_dropped.push_back(where(line) + ": unknown cockpit kind " + c->kind);
            }
        } else if (const auto* s = std::get_if<RoadsideRecord>(&rec)) {
            std::int64_t T = 0;
            try {
                T = to_deciseconds(s->t, meta.start_time);
            } catch (const GridError& e) {
                throw GridError(where(line) + ": " + e.what());
            }
            check_order("roadside " + s->kind + " " + s->id, T, line);
            if (s->kind == "traffic_light_state" || s->kind == "spat") {
                emit(fb, report, holds(Term::compound("traffic_light_state", {sym(s->id), sym(s->value)}), T));
            } else if (s->kind == "v2x_warning") {
                emit(fb, report, occurs(Term::compound("v2x_warning", {sym(s->value)}), T));
            } else {
                report.records_dropped.push_back(where(line) + ": unknown roadside kind " + s->kind);
            }
        } else if (const auto* m = std::get_if<MapRecord>(&rec)) {
            emit(fb, report,
                 Term::compound("map_lane", {sym(m->lane_id), num(m->y_min), num(m->y_max), num(m->x_start),
                                             num(m->x_end), num(m->speed_limit)}));
        } else if (const auto* sl = std::get_if<StopLineRecord>(&rec)) {
            emit(fb, report, Term::compound("stop_line", {sym(sl->id), sym(sl->lane_id), num(sl->x)}));
        }
    }
}

std::pair<FactBase, IngestReport> asp_ify(const ScenarioLog& log) {
    FactBase fb;
    IngestReport report;
    asp_ify_into(log, fb, report);
    return {std::move(fb), std::move(report)};
}

namespace {

struct Sample {
    bool has_position = false;
    Numeric x, y, z;
    bool has_velocity = false;
    Numeric vx, vy, vz;
};

struct Lane {
    const std::string* id;
    Numeric y0, y1, x0, x1;
};

} // namespace

FactBase derive_kinematics(const FactBase& fb, Numeric time_step) {
    FactBase out;
    const std::int64_t step = time_step.milli() / 100;
    if (step <= 0 || time_step.milli() % 100 != 0) throw GridError("time step must be a positive multiple of 0.1 s");

    // object -> time -> sample, ordered for determinism
    std::map<Term, std::map<std::int64_t, Sample>, TermLess> tracks;
    auto time_of = [](const Term& t) -> std::optional<std::int64_t> {
        if (!t.is_number() || !t.as_number().is_integer()) return std::nullopt;
        return t.as_number().milli() / 1000;
    };
    PredicateKey holds_key("holds", 2);
    for (const auto& f : fb.fluent_bucket(holds_key, PredicateKey("position", 4))) {
        auto T = time_of(f.arg(1));
        const Term& p = f.arg(0);
        if (!T || !p.arg(1).is_number() || !p.arg(2).is_number() || !p.arg(3).is_number()) continue;
        Sample& s = tracks[p.arg(0)][*T];
        s.has_position = true;
        s.x = p.arg(1).as_number();
        s.y = p.arg(2).as_number();
        s.z = p.arg(3).as_number();
    }
    for (const auto& f : fb.fluent_bucket(holds_key, PredicateKey("velocity", 4))) {
        auto T = time_of(f.arg(1));
        const Term& v = f.arg(0);
        if (!T || !v.arg(1).is_number() || !v.arg(2).is_number() || !v.arg(3).is_number()) continue;
        Sample& s = tracks[v.arg(0)][*T];
        s.has_velocity = true;
        s.vx = v.arg(1).as_number();
        s.vy = v.arg(2).as_number();
        s.vz = v.arg(3).as_number();
    }

    std::vector<Lane> lanes;
    for (const auto& f : fb.bucket(PredicateKey("map_lane", 6))) {
        bool numeric = true;
        for (std::size_t i = 1; i <= 4; ++i) numeric = numeric && f.arg(i).is_number();
        if (!numeric) continue;
        lanes.push_back(Lane{f.arg(0).name_ptr(), f.arg(1).as_number(), f.arg(2).as_number(), f.arg(3).as_number(),
                             f.arg(4).as_number()});
    }

    for (const auto& [id, samples] : tracks) {
        std::vector<std::pair<std::int64_t, Numeric>> acc;
        std::int64_t prev_t = 0;
        const Sample* prev = nullptr;
        for (const auto& [T, s] : samples) {
            if (!s.has_velocity) continue;
            Numeric speed = (s.vx * s.vx + s.vy * s.vy + s.vz * s.vz).sqrt();
            out.insert(holds(Term::compound("speed", {id, num(speed)}), T));
            if (prev) {
                if (T - prev_t != step)
                    throw MissingGridError("track of " + id.to_string() + " jumps from " + std::to_string(prev_t) +
                                           " to " + std::to_string(T) + " deciseconds");
                acc.emplace_back(prev_t, (s.vx - prev->vx) / time_step);
            }
            prev = &s;
            prev_t = T;
        }
        for (std::size_t i = 0; i < acc.size(); ++i) {
            out.insert(holds(Term::compound("acceleration", {id, num(acc[i].second)}), acc[i].first));
            if (i + 1 < acc.size()) {
                Numeric jerk = (acc[i + 1].second - acc[i].second) / time_step;
                out.insert(holds(Term::compound("jerk", {id, num(jerk)}), acc[i].first));
            }
        }
    }

    // time -> objects present with position and velocity
    std::map<std::int64_t, std::vector<std::pair<const Term*, const Sample*>>> by_time;
    for (const auto& [id, samples] : tracks) {
        for (const auto& [T, s] : samples) {
            if (s.has_position && s.has_velocity) by_time[T].emplace_back(&id, &s);
        }
    }
    auto lanes_of = [&](const Sample& s) {
        std::vector<const std::string*> out_lanes;
        for (const auto& l : lanes) {
            if (l.y0 <= s.y && s.y < l.y1 && l.x0 <= s.x && s.x <= l.x1) out_lanes.push_back(l.id);
        }
        return out_lanes;
    };
    for (const auto& [T, objs] : by_time) {
        std::vector<std::vector<const std::string*>> lane_sets;
        for (const auto& o : objs) lane_sets.push_back(lanes_of(*o.second));
        for (std::size_t a = 0; a < objs.size(); ++a) {
            for (std::size_t b = 0; b < objs.size(); ++b) {
                if (a == b) continue;
                const Sample& A = *objs[a].second;
                const Sample& B = *objs[b].second;
                bool same_lane;
                if (lanes.empty()) {
                    same_lane = A.y == B.y && A.z == B.z;
                } else {
                    same_lane = std::any_of(lane_sets[a].begin(), lane_sets[a].end(), [&](const std::string* l) {
                        return std::find(lane_sets[b].begin(), lane_sets[b].end(), l) != lane_sets[b].end();
                    });
                }
                if (!same_lane) continue;
                std::int64_t gap = (B.x - A.x).milli();
                if (gap == 0) continue;
                std::int64_t dir = gap > 0 ? 1 : -1;
                std::int64_t own = A.vx.milli() * dir;
                std::int64_t closing = (A.vx - B.vx).milli() * dir;
                if (own <= 0 || closing <= 0) continue;
                __int128 ttc = rounded_div(static_cast<__int128>(gap * dir) * 10, closing);
                std::int64_t clamped = static_cast<std::int64_t>(std::clamp<__int128>(ttc, 0, 999));
                out.insert(holds(Term::compound("ttc_deci", {*objs[a].first, *objs[b].first,
                                                             deci(clamped)}),
                                 T));
            }
        }
    }
    return out;
}

IngestResult ingest(const ScenarioLog& log) {
    IngestResult r;
    r.meta = log.meta;
    asp_ify_into(log, r.facts, r.report);
    FactBase derived = derive_kinematics(r.facts, log.meta.time_step);
    for (const auto& f : derived.facts()) {
        if (r.facts.insert(f)) {
            std::string sig = fact_signature(f).name ? *fact_signature(f).name : "";
            ++r.report.facts_emitted[fact_signature(f).to_string()];
            ++r.report.derived[sig];
        }
    }
    return r;
}

} // namespace esn
