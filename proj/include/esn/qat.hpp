#pragma once

#include "esn/ast.hpp"
#include "esn/engine.hpp"
#include "esn/fact_base.hpp"
#include "esn/ingest.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace esn {

struct TestSpec {
    std::string query_id;
    std::string title;
    Program query;
    std::vector<std::string> target_scenarios;
    /// Patterns that must each match at least one input fact; otherwise the
    /// verdict is `error` (missing data is never a pass).
    std::vector<Term> requires_facts;
    bool counterfactual = false;
};

enum class Outcome { pass, violated, error };

const char* to_string(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view s);

struct Violation {
    Fact fact;
    ProofTree proof;
};

struct Verdict {
    std::string query_id;
    std::string scenario_id;
    Outcome outcome = Outcome::pass;
    std::vector<Violation> violations;
    EvalStats stats;
    std::string diagnostic;
};

struct RulePatch {
    /// Rule ids as produced by rule_id(), e.g. "ego_braked_in_window/2#1".
    std::vector<std::string> remove;
    std::vector<Rule> add;
    std::vector<std::pair<std::string, Numeric>> rebind;

    bool empty() const { return remove.empty() && add.empty() && rebind.empty(); }
};

/// {"remove": [ids], "add": "rules text" | [texts], "rebind": {name: number}}
RulePatch parse_patch(std::string_view json_text);
RulePatch load_patch(const std::string& path);

/// The shipped corpus queries (Q-01..Q-06, Q-08, Q-F3), sorted by id.
std::vector<TestSpec> load_query_library();
/// Any shipped query by id, including counterfactual templates (Q-16).
TestSpec load_query(std::string_view query_id);
/// A query file plus its JSON sidecar (same stem, `.json`), if present.
TestSpec load_spec_file(const std::string& esn_path);
TestSpec make_spec(std::string query_id, std::string_view query_text);

/// Runs specs against one fact base. The standard library is evaluated once
/// and shared by every unpatched query.
class Harness {
public:
    explicit Harness(FactBase facts, std::string scenario_id = {});
    Harness(FactBase facts, Program rules, std::string scenario_id);

    /// Engine errors become outcome `error`; an invalid patch throws PatchError.
    Verdict run(const TestSpec& spec, const RulePatch& patch = {}) const;

    const FactBase& facts() const { return facts_; }

private:
    std::shared_ptr<const EvalResult> base_layer() const;

    FactBase facts_;
    Program rules_;
    std::string scenario_id_;
    mutable std::shared_ptr<const EvalResult> layer_;
};

Verdict run_test(const TestSpec& spec, const FactBase& facts, std::string scenario_id = {});

/// (baseline, patched) over the same facts; `facts` is not modified.
std::pair<Verdict, Verdict> what_if(const TestSpec& spec, const FactBase& facts, const RulePatch& patch);

/// Applies a patch to a merged program. PatchError on unknown rule ids or
/// params, or when the result no longer stratifies.
Program apply_patch(const Program& program, const RulePatch& patch);

struct CorpusEntry {
    std::string scenario_id;
    Variant variant = Variant::compliant;
    std::uint64_t seed = 1;
};

struct CorpusCell {
    CorpusEntry entry;
    std::string query_id;
    Outcome outcome = Outcome::pass;
    std::optional<Outcome> expected;
    std::size_t violations = 0;
    std::string diagnostic;
    double millis = 0.0;

    bool labeled() const { return expected.has_value(); }
    bool agrees() const { return expected && *expected == outcome; }
};

struct CorpusReport {
    std::vector<CorpusCell> cells;

    std::size_t labeled() const;
    std::size_t agreed() const;
    /// 1.0 when nothing is labeled.
    double agreement() const;
    /// Total milliseconds per query id.
    std::map<std::string, double> timing() const;
};

/// Full grid: every scenario x both variants x seeds.
std::vector<CorpusEntry> corpus_grid(const std::vector<std::string>& scenarios, std::uint64_t first_seed,
                                     std::uint64_t last_seed);

/// Cells sorted by (scenario, variant, seed, query). `threads` = 0 picks the
/// hardware concurrency.
CorpusReport run_corpus(const std::vector<TestSpec>& specs, const std::vector<CorpusEntry>& corpus,
                        unsigned threads = 0);

/// Timing is left out unless asked for, so the report is byte-stable.
std::string corpus_report_json(const CorpusReport& report, bool with_timing = false);
std::string corpus_report_text(const CorpusReport& report, bool with_timing = false);

std::string verdict_json(const Verdict& v);
std::string verdict_text(const Verdict& v);

} // namespace esn
