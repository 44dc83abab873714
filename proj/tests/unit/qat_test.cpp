#include <doctest.h>

#include "esn/error.hpp"
#include "esn/events.hpp"
#include "esn/parser.hpp"
#include "esn/qat.hpp"
#include "support/files.hpp"
#include "support/fixtures.hpp"

#include <algorithm>

using namespace esn;
using esn::testing::facts_of;

namespace {

std::vector<std::string> ids(const std::vector<TestSpec>& specs) {
    std::vector<std::string> out;
    for (const auto& s : specs) out.push_back(s.query_id);
    return out;
}

std::vector<std::string> rendered(const Verdict& v) {
    std::vector<std::string> out;
    for (const auto& x : v.violations) out.push_back(x.fact.to_string() + "\n" + format_proof(x.proof));
    return out;
}

testing::TimedViolations timed(const Verdict& v) {
    testing::TimedViolations out;
    for (const auto& x : v.violations) out.insert({x.fact.arg(0).name(), x.fact.arg(1).as_number().round_to_int()});
    return out;
}

} // namespace

TEST_CASE("query library") {
    auto lib = load_query_library();
    CHECK(ids(lib) == std::vector<std::string>{"Q-01", "Q-02", "Q-03", "Q-04", "Q-05", "Q-06", "Q-08", "Q-F3"});
    Stratification s;
    for (const auto& spec : lib) {
        CHECK(spec.query.shows == std::vector<PredicateKey>{PredicateKey("violation", 2)});
        CHECK_NOTHROW(s = stratify(merge_query(load_stdlib(), spec.query)));
    }
    auto f3 = std::find_if(lib.begin(), lib.end(), [](const TestSpec& s) { return s.query_id == "Q-F3"; });
    CHECK(f3->query == parse_query(testing::read_text("tests/data/braking_response.esn")));
    CHECK(load_query("Q-16").counterfactual);
    CHECK_THROWS_AS(load_query("Q-99"), Error);
}

TEST_CASE("speed limit passes when every speed is within the limit") {
    FactBase fb = facts_of(R"(
ego(ego).
map_lane(l, -3.5, 0, 0, 100, 13.411).
holds(position(ego, 10, -1.75, 0.5), 0).
holds(speed(ego, 13.411), 0).
holds(position(ego, 11, -1.75, 0.5), 1).
holds(speed(ego, 9), 1).
)");
    CHECK(run_test(load_query("Q-02"), fb).outcome == Outcome::pass);
    fb.insert(parse_term("holds(position(ego, 12, -1.75, 0.5), 2)"));
    fb.insert(parse_term("holds(speed(ego, 13.412), 2)"));
    Verdict v = run_test(load_query("Q-02"), fb);
    CHECK(v.outcome == Outcome::violated);
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0].fact == parse_term("violation(ego, 2)"));
}

TEST_CASE("TTC of 12 deci is below 1.5 s") {
    FactBase fb = facts_of("holds(ttc_deci(ego, lead, 12), 7).");
    Verdict v = run_test(load_query("Q-04"), fb);
    CHECK(v.outcome == Outcome::violated);
    CHECK(v.violations.at(0).proof.checks == std::vector<std::string>{"12 < 15"});
    CHECK(run_test(load_query("Q-04"), facts_of("holds(ttc_deci(ego, lead, 15), 7).")).outcome == Outcome::pass);
}

TEST_CASE("empty fact base") {
    CHECK(run_test(load_query("Q-F3"), FactBase{}).outcome == Outcome::pass);
    CHECK(run_test(load_query("Q-04"), FactBase{}).outcome == Outcome::pass);
    // required data missing is an error, never a vacuous pass
    Verdict v = run_test(load_query("Q-05"), FactBase{});
    CHECK(v.outcome == Outcome::error);
    CHECK(v.diagnostic.find("abs_status") != std::string::npos);
}

TEST_CASE("braking response on generated emergency braking") {
    TestSpec f3 = load_query("Q-F3");
    Verdict bad = run_test(f3, ingest(generate_scenario("SC-13", Variant::violating, 7)).facts, "SC-13");
    CHECK(bad.outcome == Outcome::violated);
    REQUIRE(bad.violations.size() == 1);
    CHECK(bad.violations[0].fact == parse_term("violation(ego, 40)"));
    const ProofTree& p = bad.violations[0].proof;
    CHECK(p.rule_id == "violation/2#1");
    std::string text = format_proof(p);
    CHECK(text.find("occurs(brake_light_on(car_01), 40)") != std::string::npos);
    CHECK(text.find("holds(ttc_deci(ego, car_01, ") != std::string::npos);
    CHECK(p.checks.at(1) == "not ego_braked_in_window(ego, 40)");

    Verdict ok = run_test(f3, ingest(generate_scenario("SC-13", Variant::compliant, 7)).facts, "SC-13");
    CHECK(ok.outcome == Outcome::pass);
    CHECK(ok.violations.empty());
}

TEST_CASE("verdicts are deterministic") {
    FactBase fb = ingest(generate_scenario("SC-12", Variant::violating, 2)).facts;
    for (const auto& spec : load_query_library()) {
        CHECK(verdict_json(run_test(spec, fb, "SC-12")) == verdict_json(run_test(spec, fb, "SC-12")));
    }
}

TEST_CASE("shared library layer matches whole-program evaluation") {
    FactBase fb = ingest(generate_scenario("SC-01", Variant::violating, 4)).facts;
    Program lib = load_stdlib();
    for (const auto& spec : load_query_library()) {
        Verdict v = run_test(spec, fb);
        if (v.outcome == Outcome::error) continue;
        std::vector<Fact> shown;
        for (const auto& x : v.violations) shown.push_back(x.fact);
        CHECK(shown == solve(lib, spec.query, fb));
    }
}

TEST_CASE("what-if on the brake window") {
    FactBase fb = testing::boundary_base(8);
    std::vector<Fact> before = fb.sorted();
    RulePatch widen = parse_patch(R"({"rebind": {"brake_window": 15}})");
    auto [baseline, patched] = what_if(load_query("Q-16"), fb, widen);
    CHECK(baseline.outcome == Outcome::violated);
    CHECK(patched.outcome == Outcome::pass);
    CHECK(fb.sorted() == before);
    CHECK(verdict_json(baseline) == verdict_json(run_test(load_query("Q-16"), fb)));

    // the verbatim query has a literal window: replace the rule instead
    RulePatch replace = parse_patch(R"({
        "remove": ["ego_braked_in_window/2#1"],
        "add": "ego_braked_in_window(Ego, T_start) :- Deadline = T_start + 15, occurs(brake_pedal_pressed(Ego), T_brake), T_brake > T_start, T_brake <= Deadline."
    })");
    auto [b2, p2] = what_if(load_query("Q-F3"), fb, replace);
    CHECK(b2.outcome == Outcome::violated);
    CHECK(p2.outcome == Outcome::pass);

    // 16 > 15 stays violated under the wider window
    auto [b3, p3] = what_if(load_query("Q-16"), testing::boundary_base(16), widen);
    CHECK(b3.outcome == Outcome::violated);
    CHECK(p3.outcome == Outcome::violated);
}

TEST_CASE("empty patch gives identical verdicts") {
    FactBase fb = ingest(generate_scenario("SC-13", Variant::violating, 1)).facts;
    auto [a, b] = what_if(load_query("Q-F3"), fb, RulePatch{});
    CHECK(a.outcome == b.outcome);
    CHECK(rendered(a) == rendered(b));
    auto [c, d] = what_if(load_query("Q-F3"), fb, parse_patch("{}"));
    CHECK(verdict_json(c) == verdict_json(d));
}

TEST_CASE("invalid patches") {
    FactBase fb = testing::boundary_base(3);
    TestSpec q = load_query("Q-F3");
    CHECK_THROWS_AS(what_if(q, fb, parse_patch(R"({"remove": ["nope/1#1"]})")), PatchError);
    CHECK_THROWS_AS(what_if(q, fb, parse_patch(R"({"rebind": {"no_such_param": 1}})")), PatchError);
    CHECK_THROWS_AS(what_if(q, fb, parse_patch(R"({"add": "a(X) :- is_braking(X, T), not b(X). b(X) :- is_braking(X, T), not a(X)."})")),
                    PatchError);
    CHECK_THROWS_AS(parse_patch("[1, 2]"), PatchError);
    CHECK_THROWS_AS(parse_patch(R"({"add": "p(1)."})"), PatchError);
    CHECK_THROWS_AS(parse_patch(R"({"rebind": {"w": "fast"}})"), PatchError);
    // a recursive rule with arithmetic can run away
    CHECK_THROWS_AS(what_if(q, fb, parse_patch(R"({"add": "later(V, T) :- occurs(brake_light_on(V), T). later(V, U) :- later(V, T), U = T + 1."})")),
                    PatchError);
}

TEST_CASE("corpus over five seeds") {
    auto specs = load_query_library();
    auto grid = corpus_grid(scenario_ids(), 1, 5);
    CorpusReport report = run_corpus(specs, grid, 2);
    CHECK(report.cells.size() == 480);
    CHECK(report.labeled() > 400);
    CHECK(report.agreed() == report.labeled());
    CHECK(report.agreement() == 1.0);
    // missing abs_status stream
    for (const auto& c : report.cells) {
        if (c.query_id == "Q-05" && c.entry.scenario_id == "SC-01") CHECK(c.outcome == Outcome::error);
    }
    CHECK(corpus_report_json(report) == corpus_report_json(run_corpus(specs, grid, 1)));
    std::string text = corpus_report_text(report);
    CHECK(text.find("agreement: ") != std::string::npos);
    CHECK(text.find("MISMATCH") == std::string::npos);
}

TEST_CASE("empty corpus") {
    CorpusReport report = run_corpus(load_query_library(), {});
    CHECK(report.cells.empty());
    CHECK(report.labeled() == 0);
    auto j = corpus_report_json(report);
    CHECK(j.find("\"cells\": []") != std::string::npos);
}

TEST_CASE("pointwise encodings agree with max and min scans") {
    TestSpec q02 = load_query("Q-02");
    TestSpec q04 = load_query("Q-04");
    int violated2 = 0, violated4 = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        FactBase fb = testing::random_trace(seed);
        Harness h(fb);
        Verdict v2 = h.run(q02);
        Verdict v4 = h.run(q04);
        auto s2 = testing::scan_speed_limit(fb);
        auto s4 = testing::scan_min_ttc(fb);
        CHECK(timed(v2) == s2);
        CHECK(timed(v4) == s4);
        CHECK((v2.outcome == Outcome::violated) == !s2.empty());
        CHECK((v4.outcome == Outcome::violated) == !s4.empty());
        violated2 += !s2.empty();
        violated4 += !s4.empty();
    }
    MESSAGE("traces violating Q-02: " << violated2 << ", Q-04: " << violated4);
    CHECK(violated2 > 10);
    CHECK(violated2 < 90);
    CHECK(violated4 > 10);
}

TEST_CASE("spec files with sidecars") {
    TestSpec s = load_spec_file(testing::source_path("queries/q05_abs.esn"));
    CHECK(s.query_id == "Q-05");
    CHECK(s.requires_facts.size() == 1);
    TestSpec bare = load_spec_file(testing::source_path("tests/data/braking_response.esn"));
    CHECK(bare.query_id == "braking_response");
    CHECK(bare.requires_facts.empty());
}
