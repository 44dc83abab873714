#include "support/privacy_cases.hpp"

#include "esn/engine.hpp"
#include "esn/ingest.hpp"
#include "esn/parser.hpp"
#include "esn/privacy.hpp"

namespace esn::testing {

namespace {

std::string random_policy(std::mt19937_64& rng) {
    std::string text = "#allow in_region/2.\n";
    for (const char* p : {"object_property/3", "traffic_light_state/2", "brake_light_on/1", "ego/1", "map_lane/6"}) {
        if (rng() % 2) text += std::string("#allow ") + p + ".\n";
    }
    for (const char* p : {"position/4", "velocity/4", "heading/2", "speed/2", "acceleration/2", "driver_state/2"})
        text += std::string("#deny ") + p + ".\n";
    for (const char* p : {"ttc_deci/3", "abs_status/2", "turn_signal/2", "jerk/2"}) {
        if (rng() % 2) text += std::string("#deny ") + p + ".\n";
    }
    text += R"(
holds(in_region(V, R), T) :-
    holds(position(V, X, Y, Z), T),
    region_box(R, X0, X1, Y0, Y1),
    X0 <= X,
    X <= X1,
    Y0 <= Y,
    Y <= Y1.
)";
    return text;
}

RegionMap random_regions(std::mt19937_64& rng) {
    RegionMap m;
    int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
        std::int64_t x0 = static_cast<std::int64_t>(rng() % 200) - 60;
        std::int64_t y0 = static_cast<std::int64_t>(rng() % 16) - 10;
        m.regions.push_back({"region_" + std::to_string(i), Numeric::from_int(x0),
                             Numeric::from_int(x0 + 5 + static_cast<std::int64_t>(rng() % 80)), Numeric::from_int(y0),
                             Numeric::from_int(y0 + 1 + static_cast<std::int64_t>(rng() % 10))});
    }
    return m;
}

} // namespace

Density density(const FactBase& fb) {
    Density out;
    for (const auto& f : fb.fluent_bucket(PredicateKey("holds", 2), PredicateKey("in_region", 2))) {
        out[{f.arg(0).arg(1).name(), f.arg(1).as_number().round_to_int()}].insert(f.arg(0).arg(0).name());
    }
    return out;
}

PrivacyTrial privacy_trial(std::mt19937_64& rng) {
    const auto& ids = scenario_ids();
    PrivacyTrial out;
    out.scenario = ids[static_cast<std::size_t>(rng() % ids.size())];
    Variant v = rng() % 2 ? Variant::violating : Variant::compliant;
    FactBase raw = ingest(generate_scenario(out.scenario, v, 1 + rng() % 50)).facts;
    ExportPolicy policy = parse_policy(random_policy(rng));
    RegionMap regions = random_regions(rng);

    FactBase view = export_view(raw, policy, regions);
    out.exported = view.size();
    out.leaks = verify_no_leak(view, policy).findings.size();
    for (const auto& f : view.facts()) out.disallowed += !policy.allowed.count(fact_signature(f));

    FactBase with_regions = raw;
    for (const auto& f : region_facts(regions)) with_regions.insert(f);
    Density direct = density(evaluate(policy.abstraction_rules, with_regions).derived);
    out.same_density = density(view) == direct;
    out.populated = !direct.empty();

    FactBase more = raw;
    more.insert(parse_term("holds(position(extra_car, 1, -1, 0.5), 3)"));
    FactBase bigger = export_view(more, policy, regions);
    out.monotone = true;
    for (const auto& f : view.facts()) out.monotone = out.monotone && bigger.contains(f);
    return out;
}

} // namespace esn::testing
