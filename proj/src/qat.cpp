#include "esn/qat.hpp"

#include "esn/analysis.hpp"
#include "esn/error.hpp"
#include "esn/events.hpp"
#include "esn/parser.hpp"
#include "esn/resources.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace esn {

using nlohmann::ordered_json;

const char* to_string(Outcome o) {
    switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::violated: return "violated";
    case Outcome::error: return "error";
    }
    return "error";
}

std::optional<Outcome> parse_outcome(std::string_view s) {
    if (s == "pass") return Outcome::pass;
    if (s == "violated") return Outcome::violated;
    if (s == "error") return Outcome::error;
    return std::nullopt;
}

// ---- specs and patches ---------------------------------------------------

namespace {

nlohmann::json parse_json(std::string_view text, const std::string& what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(what + ": invalid JSON: " + e.what());
    }
}

TestSpec spec_from(std::string_view query_text, std::string_view sidecar, const std::string& origin) {
    auto j = parse_json(sidecar, origin);
    TestSpec s;
    try {
        s.query_id = j.at("query_id").get<std::string>();
        s.title = j.value("title", std::string{});
        s.target_scenarios = j.value("targets", std::vector<std::string>{});
        for (const auto& r : j.value("requires", std::vector<std::string>{})) s.requires_facts.push_back(parse_term(r));
        s.counterfactual = j.value("counterfactual", false);
    } catch (const nlohmann::json::exception& e) {
        throw Error(origin + ": " + e.what());
    }
    s.query = parse_query(query_text);
    return s;
}

std::vector<TestSpec> shipped_specs() {
    std::vector<TestSpec> out;
    for (const auto& [path, text] : embedded_files()) {
        if (!path.starts_with("queries/") || !path.ends_with(".json")) continue;
        std::string esn_path = path.substr(0, path.size() - 5) + ".esn";
        auto query = embedded_file(esn_path);
        if (!query) throw Error("query file missing for " + path);
        out.push_back(spec_from(*query, text, path));
    }
    std::sort(out.begin(), out.end(), [](const TestSpec& a, const TestSpec& b) { return a.query_id < b.query_id; });
    return out;
}

} // namespace

std::vector<TestSpec> load_query_library() {
    std::vector<TestSpec> out;
    for (auto& s : shipped_specs()) {
        if (!s.counterfactual) out.push_back(std::move(s));
    }
    return out;
}

TestSpec load_query(std::string_view query_id) {
    for (auto& s : shipped_specs()) {
        if (s.query_id == query_id) return s;
    }
    throw Error("unknown query id: " + std::string(query_id));
}

TestSpec load_spec_file(const std::string& esn_path) {
    std::string text = read_file(esn_path);
    std::filesystem::path sidecar = std::filesystem::path(esn_path).replace_extension(".json");
    if (std::filesystem::exists(sidecar)) return spec_from(text, read_file(sidecar.string()), sidecar.string());
    return make_spec(std::filesystem::path(esn_path).stem().string(), text);
}

TestSpec make_spec(std::string query_id, std::string_view query_text) {
    TestSpec s;
    s.query_id = std::move(query_id);
    s.query = parse_query(query_text);
    return s;
}

RulePatch parse_patch(std::string_view json_text) {
    auto j = parse_json(json_text, "patch");
    if (!j.is_object()) throw PatchError("patch must be a JSON object");
    RulePatch p;
    try {
        if (j.contains("remove")) p.remove = j.at("remove").get<std::vector<std::string>>();
        if (j.contains("add")) {
            std::string text;
            const auto& a = j.at("add");
            if (a.is_string()) {
                text = a.get<std::string>();
            } else {
                for (const auto& r : a) text += r.get<std::string>() + "\n";
            }
            Program added = parse_fragment(text);
            if (!added.facts.empty() || !added.shows.empty())
                throw PatchError("patch may only add rules");
            p.add = std::move(added.rules);
        }
        if (j.contains("rebind")) {
            for (const auto& [name, value] : j.at("rebind").items()) {
                std::string literal = value.is_string() ? value.get<std::string>() : value.dump();
                auto n = Numeric::parse(literal);
                if (!n) throw PatchError("rebind value for " + name + " is not a number: " + literal);
                p.rebind.emplace_back(name, *n);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw PatchError(std::string("malformed patch: ") + e.what());
    } catch (const PatchError&) {
        throw;
    } catch (const Error& e) {
        throw PatchError(std::string("malformed patch: ") + e.what());
    }
    return p;
}

RulePatch load_patch(const std::string& path) { return parse_patch(read_file(path)); }

Program apply_patch(const Program& program, const RulePatch& patch) {
    Program out = program;
    std::set<std::string> removed(patch.remove.begin(), patch.remove.end());
    std::set<std::string> seen;
    out.rules.clear();
    for (std::size_t i = 0; i < program.rules.size(); ++i) {
        std::string id = rule_id(program.rules, i);
        if (removed.count(id)) {
            seen.insert(id);
            continue;
        }
        out.rules.push_back(program.rules[i]);
    }
    for (const auto& id : removed) {
        if (!seen.count(id)) throw PatchError("unknown rule id: " + id);
    }
    for (const auto& [name, value] : patch.rebind) {
        bool found = false;
        for (auto& f : out.facts) {
            if (f.predicate().to_string() == "param/2" && f.arg(0).is_symbol() && f.arg(0).name() == name) {
                f = Term::compound("param", {f.arg(0), Term::number(value)});
                found = true;
            }
        }
        if (!found) throw PatchError("unknown param: " + name);
    }
    out.rules.insert(out.rules.end(), patch.add.begin(), patch.add.end());
    try {
        check_mixed_predicates(out);
        plan_demands(out.rules);
        stratify(out);
    } catch (const PatchError&) {
        throw;
    } catch (const Error& e) {
        throw PatchError(std::string("patched program rejected: ") + e.what());
    }
    return out;
}

// ---- harness -------------------------------------------------------------

namespace {

bool present(const FactBase& fb, const Term& pattern) {
    std::span<const Fact> candidates;
    if (is_temporal_wrapper(pattern.predicate()) && pattern.arg(0).is_callable())
        candidates = fb.fluent_bucket(pattern.predicate(), pattern.arg(0).predicate());
    else
        candidates = fb.bucket(pattern.predicate());
    return std::any_of(candidates.begin(), candidates.end(),
                       [&](const Fact& f) { return match(pattern, f).has_value(); });
}

std::set<std::string> param_names(const Program& p) {
    std::set<std::string> out;
    for (const auto& f : p.facts) {
        if (f.predicate().to_string() == "param/2" && f.arg(0).is_symbol()) out.insert(f.arg(0).name());
    }
    return out;
}

void collect(Verdict& v, const EvalResult& r, const std::vector<PredicateKey>& shows) {
    for (const auto& f : r.select(shows)) v.violations.push_back({f, explain(r, f)});
    v.outcome = v.violations.empty() ? Outcome::pass : Outcome::violated;
    v.stats = r.stats;
}

} // namespace

Harness::Harness(FactBase facts, std::string scenario_id)
    : Harness(std::move(facts), load_stdlib(), std::move(scenario_id)) {}

Harness::Harness(FactBase facts, Program rules, std::string scenario_id)
    : facts_(std::move(facts)), rules_(std::move(rules)), scenario_id_(std::move(scenario_id)) {}

std::shared_ptr<const EvalResult> Harness::base_layer() const {
    if (!layer_) layer_ = std::make_shared<const EvalResult>(evaluate(rules_, facts_));
    return layer_;
}

Verdict Harness::run(const TestSpec& spec, const RulePatch& patch) const {
    Verdict v;
    v.query_id = spec.query_id;
    v.scenario_id = scenario_id_;
    for (const auto& pattern : spec.requires_facts) {
        if (!present(facts_, pattern)) {
            v.outcome = Outcome::error;
            v.diagnostic = "missing required facts: " + pattern.to_string();
            return v;
        }
    }

    // Queries that override a library param, and every patched run, need the
    // whole program re-evaluated; the rest reuse the shared library layer.
    std::set<std::string> lib_params = param_names(rules_);
    bool overrides = false;
    for (const auto& name : param_names(spec.query)) overrides = overrides || lib_params.count(name);

    std::optional<Program> patched;
    if (!patch.empty()) patched = apply_patch(merge_query(rules_, spec.query), patch);

    try {
        if (patched) {
            collect(v, evaluate(*patched, facts_), spec.query.shows);
        } else if (overrides) {
            collect(v, evaluate(merge_query(rules_, spec.query), facts_), spec.query.shows);
        } else {
            collect(v, evaluate(spec.query, base_layer()), spec.query.shows);
        }
    } catch (const Error& e) {
        v.violations.clear();
        v.outcome = Outcome::error;
        v.diagnostic = e.what();
    }
    return v;
}

Verdict run_test(const TestSpec& spec, const FactBase& facts, std::string scenario_id) {
    return Harness(facts, std::move(scenario_id)).run(spec);
}

std::pair<Verdict, Verdict> what_if(const TestSpec& spec, const FactBase& facts, const RulePatch& patch) {
    Harness h(facts);
    Verdict patched = h.run(spec, patch);
    Verdict baseline = h.run(spec);
    return {std::move(baseline), std::move(patched)};
}

// ---- corpus --------------------------------------------------------------

std::size_t CorpusReport::labeled() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.labeled(); }));
}

std::size_t CorpusReport::agreed() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.agrees(); }));
}

double CorpusReport::agreement() const {
    std::size_t n = labeled();
    return n == 0 ? 1.0 : static_cast<double>(agreed()) / static_cast<double>(n);
}

std::map<std::string, double> CorpusReport::timing() const {
    std::map<std::string, double> out;
    for (const auto& c : cells) out[c.query_id] += c.millis;
    return out;
}

std::vector<CorpusEntry> corpus_grid(const std::vector<std::string>& scenarios, std::uint64_t first_seed,
                                     std::uint64_t last_seed) {
    std::vector<CorpusEntry> out;
    for (const auto& s : scenarios) {
        for (Variant v : {Variant::compliant, Variant::violating}) {
            for (std::uint64_t seed = first_seed; seed <= last_seed; ++seed) out.push_back({s, v, seed});
        }
    }
    return out;
}

namespace {

std::vector<CorpusCell> run_entry(const std::vector<TestSpec>& specs, const CorpusEntry& e) {
    using clock = std::chrono::steady_clock;
    std::vector<CorpusCell> cells;
    std::optional<Harness> harness;
    std::map<std::string, std::string> labels;
    std::string failure;
    try {
        ScenarioLog log = generate_scenario(e.scenario_id, e.variant, e.seed);
        labels = log.meta.labels;
        harness.emplace(ingest(log).facts, e.scenario_id);
    } catch (const Error& err) {
        failure = err.what();
    }
    for (const auto& spec : specs) {
        CorpusCell c;
        c.entry = e;
        c.query_id = spec.query_id;
        if (auto it = labels.find(spec.query_id); it != labels.end()) c.expected = parse_outcome(it->second);
        if (!harness) {
            c.outcome = Outcome::error;
            c.diagnostic = failure;
        } else {
            auto t0 = clock::now();
            Verdict v = harness->run(spec);
            c.millis = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            c.outcome = v.outcome;
            c.violations = v.violations.size();
            c.diagnostic = v.diagnostic;
        }
        cells.push_back(std::move(c));
    }
    return cells;
}

bool cell_less(const CorpusCell& a, const CorpusCell& b) {
    return std::tie(a.entry.scenario_id, a.entry.variant, a.entry.seed, a.query_id) <
           std::tie(b.entry.scenario_id, b.entry.variant, b.entry.seed, b.query_id);
}

} // namespace

CorpusReport run_corpus(const std::vector<TestSpec>& specs, const std::vector<CorpusEntry>& corpus, unsigned threads) {
    CorpusReport report;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(corpus.size(), 1)));
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < corpus.size(); i = next++) {
            auto cells = run_entry(specs, corpus[i]);
            std::lock_guard lock(mu);
            for (auto& c : cells) report.cells.push_back(std::move(c));
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    std::sort(report.cells.begin(), report.cells.end(), cell_less);
    return report;
}

// ---- reports ---------------------------------------------------------------

namespace {

ordered_json proof_json(const ProofTree& t) {
    ordered_json j;
    j["fact"] = t.root.to_string();
    j["rule"] = t.rule_id;
    j["checks"] = t.checks;
    ordered_json kids = ordered_json::array();
    for (const auto& c : t.children) kids.push_back(proof_json(c));
    j["children"] = std::move(kids);
    return j;
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

} // namespace

std::string verdict_json(const Verdict& v) {
    ordered_json j;
    j["query_id"] = v.query_id;
    j["scenario_id"] = v.scenario_id;
    j["outcome"] = to_string(v.outcome);
    if (!v.diagnostic.empty()) j["diagnostic"] = v.diagnostic;
    ordered_json vs = ordered_json::array();
    for (const auto& x : v.violations) {
        ordered_json e;
        e["fact"] = x.fact.to_string();
        e["proof"] = proof_json(x.proof);
        vs.push_back(std::move(e));
    }
    j["violations"] = std::move(vs);
    j["stats"] = {{"facts_derived", v.stats.facts_derived},
                  {"rule_firings", v.stats.rule_firings},
                  {"iterations", v.stats.iterations}};
    return j.dump(2) + "\n";
}

std::string verdict_text(const Verdict& v) {
    std::ostringstream os;
    os << v.query_id;
    if (!v.scenario_id.empty()) os << " on " << v.scenario_id;
    os << ": " << to_string(v.outcome);
    if (!v.diagnostic.empty()) os << " (" << v.diagnostic << ")";
    os << "\n";
    for (const auto& x : v.violations) os << "\n" << format_proof(x.proof);
    return os.str();
}

std::string corpus_report_json(const CorpusReport& report, bool with_timing) {
    ordered_json j;
    ordered_json cells = ordered_json::array();
    for (const auto& c : report.cells) {
        ordered_json e;
        e["scenario_id"] = c.entry.scenario_id;
        e["variant"] = to_string(c.entry.variant);
        e["seed"] = c.entry.seed;
        e["query_id"] = c.query_id;
        e["outcome"] = to_string(c.outcome);
        e["expected"] = c.expected ? ordered_json(to_string(*c.expected)) : ordered_json(nullptr);
        e["violations"] = c.violations;
        if (!c.diagnostic.empty()) e["diagnostic"] = c.diagnostic;
        cells.push_back(std::move(e));
    }
    j["cells"] = std::move(cells);
    j["summary"] = {{"cells", report.cells.size()},
                    {"labeled", report.labeled()},
                    {"agreed", report.agreed()},
                    {"agreement", report.agreement()}};
    if (with_timing) {
        ordered_json t = ordered_json::object();
        for (const auto& [q, ms] : report.timing()) t[q] = ms;
        j["timing_ms"] = std::move(t);
    }
    return j.dump(2) + "\n";
}

std::string corpus_report_text(const CorpusReport& report, bool with_timing) {
    std::vector<std::array<std::string, 7>> rows;
    rows.push_back({"scenario", "variant", "seed", "query", "outcome", "expected", "violations"});
    for (const auto& c : report.cells) {
        std::string expected = c.expected ? to_string(*c.expected) : "-";
        if (c.expected && !c.agrees()) expected += " MISMATCH";
        rows.push_back({c.entry.scenario_id, to_string(c.entry.variant), std::to_string(c.entry.seed), c.query_id,
                        to_string(c.outcome), expected, std::to_string(c.violations)});
    }
    std::array<std::size_t, 7> width{};
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    std::ostringstream os;
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            os << r[i];
            if (i + 1 < r.size()) os << std::string(width[i] - r[i].size() + 2, ' ');
        }
        os << "\n";
    }
    os << "\nagreement: " << report.agreed() << "/" << report.labeled() << " labeled cells ("
       << fixed(100.0 * report.agreement(), 1) << "%), " << report.cells.size() << " cells\n";
    if (with_timing) {
        for (const auto& [q, ms] : report.timing()) os << "time " << q << ": " << fixed(ms, 1) << " ms\n";
    }
    return os.str();
}

} // namespace esn
