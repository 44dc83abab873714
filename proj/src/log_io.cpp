#include "esn/error.hpp"
#include "esn/ingest.hpp"
#include "esn/resources.hpp"

#include <json.hpp>

#include <cctype>

namespace esn {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

bool is_symbol_text(const std::string& s) {
    if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return s != "not" && s != "sqrt";
}

class Reader {
public:
    Reader(const json& j, std::size_t line) : j_(j), line_(line) {}

    bool has(const char* field) const { return j_.contains(field) && !j_[field].is_null(); }

    const json& get(const char* field) const {
        if (!has(field)) throw SchemaError(line_, field, "missing");
        return j_[field];
    }

    Numeric number(const char* field) const {
        const json& v = get(field);
        if (!v.is_number()) throw SchemaError(line_, field, "expected a number");
        try {
            if (v.is_number_integer()) return Numeric::from_int(v.get<std::int64_t>());
            return Numeric::from_double(v.get<double>());
        } catch (const NumericOverflow&) {
            throw SchemaError(line_, field, "number out of range");
        }
    }

    std::string text(const char* field) const {
        const json& v = get(field);
        if (!v.is_string()) throw SchemaError(line_, field, "expected a string");
        return v.get<std::string>();
    }

    std::string symbol(const char* field) const {
        std::string s = text(field);
        if (!is_symbol_text(s)) throw SchemaError(line_, field, "'" + s + "' is not a lowercase identifier");
        return s;
    }

    std::optional<std::string> optional_symbol(const char* field) const {
        if (!has(field)) return std::nullopt;
        return symbol(field);
    }

    const json& payload() const {
        static const json empty = json::object();
        if (!has("payload")) return empty;
        const json& p = j_["payload"];
        if (!p.is_object()) throw SchemaError(line_, "payload", "expected an object");
        return p;
    }

    std::string payload_symbol(const char* field) const {
        Reader inner(payload(), line_);
        if (!inner.has(field)) throw SchemaError(line_, std::string("payload.") + field, "missing");
        const json& v = payload()[field];
        if (!v.is_string() || !is_symbol_text(v.get<std::string>()))
            throw SchemaError(line_, std::string("payload.") + field, "expected a lowercase identifier");
        return v.get<std::string>();
    }

    std::string payload_text(const char* field) const {
        Reader inner(payload(), line_);
        if (!inner.has(field)) throw SchemaError(line_, std::string("payload.") + field, "missing");
        const json& v = payload()[field];
        if (!v.is_string()) throw SchemaError(line_, std::string("payload.") + field, "expected a string");
        return v.get<std::string>();
    }

    std::size_t line() const { return line_; }

private:
    const json& j_;
    std::size_t line_;
};

LogMeta read_meta(const Reader& r, const json& j) {
    LogMeta m;
    m.scenario_id = r.text("scenario_id");
    if (r.has("time_step")) m.time_step = r.number("time_step");
    if (m.time_step.milli() <= 0 || m.time_step.milli() % 100 != 0)
        throw SchemaError(r.line(), "time_step", "must be a positive multiple of 0.1 s");
    if (r.has("start_time")) m.start_time = r.number("start_time");
    if (r.has("epoch_offset")) m.epoch_offset = r.number("epoch_offset");
    if (r.has("ego")) m.ego = r.symbol("ego");
    if (r.has("variant")) m.variant = r.text("variant");
    if (r.has("seed")) {
        const json& s = j["seed"];
        if (!s.is_number_unsigned() && !s.is_number_integer()) throw SchemaError(r.line(), "seed", "expected an integer");
        m.seed = s.get<std::uint64_t>();
    }
    if (r.has("labels")) {
        const json& l = j["labels"];
        if (!l.is_object()) throw SchemaError(r.line(), "labels", "expected an object");
        for (auto it = l.begin(); it != l.end(); ++it) {
            if (!it.value().is_string()) throw SchemaError(r.line(), "labels." + it.key(), "expected a string");
            std::string v = it.value().get<std::string>();
            if (v != "pass" && v != "violated" && v != "error")
                throw SchemaError(r.line(), "labels." + it.key(), "expected pass, violated or error");
            m.labels[it.key()] = v;
        }
    }
    return m;
}

LogRecord read_record(const Reader& r, const std::string& type) {
    if (type == "trajectory") {
        TrajectoryRecord t;
        t.t = r.number("t");
        t.object_id = r.symbol("object_id");
        t.object_class = r.symbol("class");
        t.x = r.number("x");
        t.y = r.number("y");
        t.z = r.number("z");
        t.vx = r.number("vx");
        t.vy = r.number("vy");
        t.vz = r.number("vz");
        t.heading = r.number("heading");
        t.abs_status = r.optional_symbol("abs_status");
        t.turn_signal = r.optional_symbol("turn_signal");
        if (r.has("events")) {
            const json& ev = r.get("events");
            if (!ev.is_array()) throw SchemaError(r.line(), "events", "expected an array");
            for (const auto& e : ev) {
                if (!e.is_string() || !is_symbol_text(e.get<std::string>()))
                    throw SchemaError(r.line(), "events", "expected lowercase identifiers");
                t.events.push_back(e.get<std::string>());
            }
        }
        return t;
    }
    if (type == "cockpit") {
        CockpitRecord c;
        c.t = r.number("t");
        c.kind = r.symbol("kind");
        c.id = r.symbol("id");
        if (c.kind == "driver_state") c.value = r.payload_symbol("state");
        else if (c.kind == "voice_command" || c.kind == "touch_event") c.value = r.payload_text("text");
        else if (c.kind != "brake_pedal_pressed") throw SchemaError(r.line(), "kind", "unknown cockpit kind " + c.kind);
        return c;
    }
    if (type == "roadside") {
        RoadsideRecord s;
        s.t = r.number("t");
        s.kind = r.symbol("kind");
        if (s.kind == "traffic_light_state" || s.kind == "spat") {
            s.id = r.symbol("id");
            s.value = r.payload_symbol("color");
        } else if (s.kind == "v2x_warning") {
            if (r.has("id")) s.id = r.symbol("id");
            s.value = r.payload_symbol("warning");
        } else {
            throw SchemaError(r.line(), "kind", "unknown roadside kind " + s.kind);
        }
        return s;
    }
    if (type == "map") {
        MapRecord m;
        m.lane_id = r.symbol("lane_id");
        m.y_min = r.number("y_min");
        m.y_max = r.number("y_max");
        m.x_start = r.number("x_start");
        m.x_end = r.number("x_end");
        m.speed_limit = r.number("speed_limit");
        return m;
    }
    if (type == "stop_line") {
        StopLineRecord s;
        s.id = r.symbol("id");
        s.lane_id = r.symbol("lane_id");
        s.x = r.number("x");
        return s;
    }
    throw SchemaError(r.line(), "type", "unknown record type '" + type + "'");
}

double d(Numeric n) { return n.to_double(); }

} // namespace

ScenarioLog parse_log(std::string_view text) {
    ScenarioLog log;
    bool have_meta = false;
    std::size_t line = 0, pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line;
        if (raw.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json j;
        try {
            j = json::parse(raw);
        } catch (const json::parse_error& e) {
            throw SchemaError(line, "<json>", e.what());
        }
        if (!j.is_object()) throw SchemaError(line, "<json>", "expected an object");
        Reader r(j, line);
        std::string type = r.text("type");
        if (!have_meta) {
            if (type != "meta") throw SchemaError(line, "type", "first record must be meta");
            log.meta = read_meta(r, j);
            have_meta = true;
            continue;
        }
        if (type == "meta") throw SchemaError(line, "type", "duplicate meta record");
        log.records.push_back(read_record(r, type));
        log.lines.push_back(line);
    }
    if (!have_meta) throw SchemaError(0, "type", "log has no meta record");
    return log;
}

ScenarioLog read_log_file(const std::string& path) { return parse_log(read_file(path)); }

std::string write_log(const ScenarioLog& log) {
    std::string out;
    ojson meta;
    meta["type"] = "meta";
    meta["scenario_id"] = log.meta.scenario_id;
    meta["time_step"] = d(log.meta.time_step);
    meta["start_time"] = d(log.meta.start_time);
    meta["epoch_offset"] = d(log.meta.epoch_offset);
    if (!log.meta.ego.empty()) meta["ego"] = log.meta.ego;
    if (!log.meta.variant.empty()) meta["variant"] = log.meta.variant;
    if (log.meta.seed) meta["seed"] = *log.meta.seed;
    ojson labels = ojson::object();
    for (const auto& [k, v] : log.meta.labels) labels[k] = v;
    meta["labels"] = labels;
    out += meta.dump() + "\n";

    for (const auto& rec : log.records) {
        ojson j;
        if (const auto* t = std::get_if<TrajectoryRecord>(&rec)) {
            j["type"] = "trajectory";
            j["t"] = d(t->t);
            j["object_id"] = t->object_id;
            j["class"] = t->object_class;
            j["x"] = d(t->x);
            j["y"] = d(t->y);
            j["z"] = d(t->z);
            j["vx"] = d(t->vx);
            j["vy"] = d(t->vy);
            j["vz"] = d(t->vz);
            j["heading"] = d(t->heading);
            if (t->abs_status) j["abs_status"] = *t->abs_status;
            if (t->turn_signal) j["turn_signal"] = *t->turn_signal;
            if (!t->events.empty()) j["events"] = t->events;
        } else if (const auto* c = std::get_if<CockpitRecord>(&rec)) {
            j["type"] = "cockpit";
            j["t"] = d(c->t);
            j["kind"] = c->kind;
            j["id"] = c->id;
            if (c->kind == "driver_state") j["payload"] = {{"state", c->value}};
            else if (c->kind == "voice_command" || c->kind == "touch_event") j["payload"] = {{"text", c->value}};
        } else if (const auto* s = std::get_if<RoadsideRecord>(&rec)) {
            j["type"] = "roadside";
            j["t"] = d(s->t);
            j["kind"] = s->kind;
            if (!s->id.empty()) j["id"] = s->id;
            if (s->kind == "v2x_warning") j["payload"] = {{"warning", s->value}};
            else j["payload"] = {{"color", s->value}};
        } else if (const auto* m = std::get_if<MapRecord>(&rec)) {
            j["type"] = "map";
            j["lane_id"] = m->lane_id;
            j["y_min"] = d(m->y_min);
            j["y_max"] = d(m->y_max);
            j["x_start"] = d(m->x_start);
            j["x_end"] = d(m->x_end);
            j["speed_limit"] = d(m->speed_limit);
        } else if (const auto* sl = std::get_if<StopLineRecord>(&rec)) {
            j["type"] = "stop_line";
            j["id"] = sl->id;
            j["lane_id"] = sl->lane_id;
            j["x"] = d(sl->x);
        }
        out += j.dump() + "\n";
    }
    return out;
}

} // namespace esn
