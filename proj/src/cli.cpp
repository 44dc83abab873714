#include "esn/cli.hpp"

#include "esn/engine.hpp"
#include "esn/error.hpp"
#include "esn/events.hpp"
#include "esn/ingest.hpp"
#include "esn/parser.hpp"
#include "esn/privacy.hpp"
#include "esn/qat.hpp"
#include "esn/resources.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace esn {

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kError = 2;

struct Inputs {
    FactBase facts;
    std::vector<Rule> rules;
    std::vector<LogMeta> metas;
};

/// `.jsonl` inputs are ingested; anything else is parsed as ESN source whose
/// facts join the base and whose rules join the rule sets.
Inputs load_inputs(const std::vector<std::string>& paths) {
    Inputs in;
    for (const auto& path : paths) {
        if (path.ends_with(".jsonl")) {
            IngestResult r = ingest(read_log_file(path));
            in.facts.merge(r.facts);
            in.metas.push_back(r.meta);
            continue;
        }
        Program p = parse_program(read_file(path));
        for (const auto& f : p.facts) in.facts.insert(f);
        in.rules.insert(in.rules.end(), p.rules.begin(), p.rules.end());
    }
    return in;
}

Program rules_for(const std::string& rulesets, const std::vector<Rule>& extra) {
    Program lib;
    if (rulesets != "none" && !rulesets.empty()) lib = load_rulesets(rulesets);
    Program own;
    for (const auto& r : extra) {
        // a copy of a library rule (e.g. a listing pasted into a facts file) is not a redefinition
        if (std::find(lib.rules.begin(), lib.rules.end(), r) == lib.rules.end()) own.rules.push_back(r);
    }
    return own.rules.empty() ? lib : merge_rulesets({lib, own});
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write file: " + path);
    f << text;
}

std::string facts_text(const FactBase& fb) {
    Program p;
    p.facts = fb.sorted();
    return format_program(p);
}

ojson proof_json(const ProofTree& t) {
    ojson j;
    j["fact"] = t.root.to_string();
    j["rule"] = t.rule_id;
    j["checks"] = t.checks;
    ojson kids = ojson::array();
    for (const auto& c : t.children) kids.push_back(proof_json(c));
    j["children"] = std::move(kids);
    return j;
}

std::string ingest_report_text(const IngestReport& r) {
    std::ostringstream os;
    os << "facts emitted: " << r.total_emitted() << "\n";
    for (const auto& [sig, n] : r.facts_emitted) os << "  " << sig << ": " << n << "\n";
    os << "derived:\n";
    for (const auto& [sig, n] : r.derived) os << "  " << sig << ": " << n << "\n";
    os << "records dropped: " << r.records_dropped.size() << "\n";
    for (const auto& d : r.records_dropped) os << "  " << d << "\n";
    return os.str();
}

ojson ingest_report_json(const IngestReport& r) {
    ojson j;
    j["facts_emitted"] = r.facts_emitted;
    j["derived"] = r.derived;
    j["records_dropped"] = r.records_dropped;
    j["total_emitted"] = r.total_emitted();
    return j;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

TestSpec spec_by_name(const std::string& name) {
    if (name.ends_with(".esn")) return load_spec_file(name);
    return load_query(name);
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Extensible Scenarios Notation toolkit: ingest driving logs, derive events, run queries as tests."};
    app.require_subcommand(1);
    app.fallthrough();
    std::string format = "text";
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Convert a JSONL log to ESN facts");
    std::string log_path, out_path;
    ingest_cmd->add_option("log", log_path, "Scenario log (.jsonl)")->required();
    ingest_cmd->add_option("-o,--out", out_path, "Fact dump destination (default stdout)");

    // query / explain
    std::vector<std::string> query_inputs;
    std::string rulesets = "geometry,kinematic_events,fusion";
    bool with_proofs = false;
    auto* query_cmd = app.add_subcommand("query", "Evaluate a query; exit 1 when it shows any fact");
    query_cmd->add_option("inputs", query_inputs, "Fact files (.esn or .jsonl) followed by the query (.esn)")
        ->required()
        ->expected(1, -1);
    query_cmd->add_option("--rulesets", rulesets, "Comma-separated rule sets or .esn paths, or 'none'");
    query_cmd->add_flag("--explain", with_proofs, "Print a proof tree for each shown fact");

    std::string explain_fact;
    auto* explain_cmd = app.add_subcommand("explain", "Print proof trees for shown facts");
    explain_cmd->add_option("inputs", query_inputs, "Fact files followed by the query (.esn)")->required()->expected(1, -1);
    explain_cmd->add_option("--rulesets", rulesets, "Comma-separated rule sets or .esn paths, or 'none'");
    explain_cmd->add_option("--fact", explain_fact, "Explain only this fact");

    // test
    std::vector<std::string> test_queries, test_logs;
    std::string test_scenarios, seeds = "1..5", variant_name;
    unsigned threads = 0;
    bool timing = false;
    auto* test_cmd = app.add_subcommand("test", "Run queries as tests over logs or the generated corpus");
    test_cmd->add_option("--query", test_queries, "Query ids or .esn spec files (default: the library)");
    auto* log_opt = test_cmd->add_option("--log", test_logs, "Scenario logs to test instead of the generated corpus");
    test_cmd->add_option("--scenarios", test_scenarios, "Comma-separated scenario ids (default: all)")->excludes(log_opt);
    test_cmd->add_option("--seeds", seeds, "Seed range A..B or a single seed")->excludes(log_opt);
    test_cmd->add_option("--variant", variant_name, "Only this variant")
        ->check(CLI::IsMember({"compliant", "violating"}))
        ->excludes(log_opt);
    test_cmd->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    test_cmd->add_flag("--timing", timing, "Include per-query timing (not byte-stable)");

    // whatif
    std::vector<std::string> whatif_inputs;
    std::string whatif_query, patch_path;
    auto* whatif_cmd = app.add_subcommand("whatif", "Compare a query before and after a rule patch");
    whatif_cmd->add_option("inputs", whatif_inputs, "Fact files (.esn or .jsonl)")->required()->expected(1, -1);
    whatif_cmd->add_option("--query", whatif_query, "Query id or .esn spec file")->required();
    whatif_cmd->add_option("--patch", patch_path, "Patch file (JSON)")->required();

    // export
    std::vector<std::string> export_inputs;
    std::string policy_name = "downtown", regions_path;
    auto* export_cmd = app.add_subcommand("export", "Write a policy-filtered abstract view of the facts");
    export_cmd->add_option("inputs", export_inputs, "Fact files (.esn or .jsonl)")->required()->expected(1, -1);
    export_cmd->add_option("--policy", policy_name, "Shipped policy name or .esn path");
    export_cmd->add_option("--regions", regions_path, "Region map (.jsonl)")->required();
    export_cmd->add_option("-o,--out", out_path, "Export destination (default stdout)");

    // gen
    std::string scenario, gen_variant = "compliant";
    std::uint64_t seed = 1;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic scenario log");
    gen_cmd->add_option("scenario", scenario, "Scenario id")->required()->check(CLI::IsMember(scenario_ids()));
    gen_cmd->add_option("--variant", gen_variant, "compliant or violating")->check(CLI::IsMember({"compliant", "violating"}));
    gen_cmd->add_option("--seed", seed, "Random seed");
    gen_cmd->add_option("-o,--out", out_path, "Log destination (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kPass : kError;
    }

    const bool json = format == "json";
    try {
        if (*ingest_cmd) {
            IngestResult r = ingest(read_log_file(log_path));
            write_output(out_path, facts_text(r.facts), out);
            if (json)
                err << ingest_report_json(r.report).dump(2) << "\n";
            else
                err << ingest_report_text(r.report);
            return kPass;
        }

        if (*query_cmd || *explain_cmd) {
            std::vector<std::string> fact_paths(query_inputs.begin(), query_inputs.end() - 1);
            Inputs in = load_inputs(fact_paths);
            Program query = parse_query(read_file(query_inputs.back()));
            Program merged = merge_query(rules_for(rulesets, in.rules), query);
            EvalResult r = evaluate(merged, in.facts);
            std::vector<Fact> shown = r.select(query.shows);
            if (*explain_cmd && !explain_fact.empty()) shown = {parse_term(explain_fact)};
            bool proofs = with_proofs || *explain_cmd;
            if (json) {
                ojson j;
                j["facts"] = ojson::array();
                for (const auto& f : shown) j["facts"].push_back(f.to_string());
                if (proofs) {
                    j["proofs"] = ojson::array();
                    for (const auto& f : shown) j["proofs"].push_back(proof_json(explain(r, f)));
                }
                out << j.dump(2) << "\n";
            } else {
                for (const auto& f : shown) {
                    out << f.to_string() << "\n";
                    if (proofs) out << format_proof(explain(r, f)) << "\n";
                }
            }
            if (*explain_cmd) return kPass;
            return shown.empty() ? kPass : kViolation;
        }

        if (*test_cmd) {
            std::vector<TestSpec> specs;
            if (test_queries.empty()) specs = load_query_library();
            for (const auto& q : test_queries) specs.push_back(spec_by_name(q));

            CorpusReport report;
            if (!test_logs.empty()) {
                for (const auto& path : test_logs) {
                    ScenarioLog log = read_log_file(path);
                    Harness h(ingest(log).facts, log.meta.scenario_id);
                    CorpusEntry entry{log.meta.scenario_id, parse_variant(log.meta.variant).value_or(Variant::compliant),
                                      log.meta.seed.value_or(0)};
                    for (const auto& spec : specs) {
                        Verdict v = h.run(spec);
                        CorpusCell c;
                        c.entry = entry;
                        c.query_id = spec.query_id;
                        c.outcome = v.outcome;
                        c.violations = v.violations.size();
                        c.diagnostic = v.diagnostic;
                        if (auto it = log.meta.labels.find(spec.query_id); it != log.meta.labels.end())
                            c.expected = parse_outcome(it->second);
                        report.cells.push_back(std::move(c));
                    }
                }
            } else {
                std::vector<std::string> scenarios = test_scenarios.empty() ? scenario_ids() : split_list(test_scenarios);
                std::uint64_t lo = 1, hi = 1;
                if (auto dots = seeds.find(".."); dots != std::string::npos) {
                    lo = std::stoull(seeds.substr(0, dots));
                    hi = std::stoull(seeds.substr(dots + 2));
                } else {
                    lo = hi = std::stoull(seeds);
                }
                std::vector<CorpusEntry> grid = corpus_grid(scenarios, lo, hi);
                if (!variant_name.empty()) {
                    Variant only = *parse_variant(variant_name);
                    std::erase_if(grid, [&](const CorpusEntry& e) { return e.variant != only; });
                }
                report = run_corpus(specs, grid, threads);
            }
            out << (json ? corpus_report_json(report, timing) : corpus_report_text(report, timing));
            // with labels the test is agreement; without, any counterexample fails
            if (report.labeled() > 0) return report.agreed() == report.labeled() ? kPass : kViolation;
            for (const auto& c : report.cells) {
                if (c.outcome == Outcome::violated) return kViolation;
            }
            return kPass;
        }

        if (*whatif_cmd) {
            Inputs in = load_inputs(whatif_inputs);
            TestSpec spec = spec_by_name(whatif_query);
            RulePatch patch = load_patch(patch_path);
            auto [baseline, patched] = what_if(spec, in.facts, patch);
            if (json) {
                ojson j;
                j["baseline"] = ojson::parse(verdict_json(baseline));
                j["patched"] = ojson::parse(verdict_json(patched));
                out << j.dump(2) << "\n";
            } else {
                out << "baseline: " << verdict_text(baseline) << "patched:  " << verdict_text(patched);
            }
            if (patched.outcome == Outcome::error) return kError;
            return patched.outcome == Outcome::violated ? kViolation : kPass;
        }

        if (*export_cmd) {
            Inputs in = load_inputs(export_inputs);
            ExportPolicy policy = load_policy(policy_name);
            FactBase view = export_view(in.facts, policy, load_region_map(regions_path));
            LeakReport leaks = verify_no_leak(view, policy);
            write_output(out_path, facts_text(view), out);
            if (json) {
                ojson j;
                j["findings"] = ojson::array();
                for (const auto& f : leaks.findings) j["findings"].push_back(f.to_string());
                j["counts"] = leaks.counts;
                err << j.dump(2) << "\n";
            } else {
                err << "exported facts: " << view.size() << ", leaks: " << leaks.findings.size() << "\n";
            }
            return leaks.clean() ? kPass : kError;
        }

        if (*gen_cmd) {
            ScenarioLog log = generate_scenario(scenario, *parse_variant(gen_variant), seed);
            write_output(out_path, write_log(log), out);
            return kPass;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kError;
    }
    return kError;
}

} // namespace esn
