#pragma once

#include <memory>
#include <string>
#include <vector>

#include "plantwin/budget.hpp"
#include "plantwin/capability.hpp"
#include "plantwin/corpus.hpp"
#include "plantwin/gatekeeper.hpp"
#include "plantwin/metrics.hpp"
#include "plantwin/planner.hpp"
#include "plantwin/projection.hpp"

namespace plantwin {

struct RunSettings {
    PolicyConfig policy;
    ProjectionConfig projection;
    WeightProfile profile = WeightProfile::paper_default();
    std::uint64_t seed = 0;
    int repetitions = 1;  // times the task list is replayed (multi-turn only)
    ApprovalHook approval_hook;
};

struct StepRecord {
    PlanStep step;
    StepOutcome outcome;
};

struct CycleTimings {
    double projection_s = 0.0;
    double planner_s = 0.0;
    double gatekeeper_s = 0.0;
};

struct CycleResult {
    TwinGraph twin;
    PlannerView view;
    std::string view_document;
    std::string request_sanitized;
    std::string skill_prompt;
    Plan plan;
    bool planner_fallback = false;
    std::vector<StepRecord> steps;
    std::vector<std::string> approved_capabilities;  // executed steps, in order
    nlohmann::json aggregated_results;               // Y_t
    std::vector<std::string> boundary_payloads;      // every byte sent across
    std::vector<double> charges_per_call;            // grain inputs
    int excluded_objects = 0;
    CycleTimings timings;
};

// One full planning cycle: observe -> project -> registration disclosure
// (kind only, budget pre-checked; depleted objects are excluded) -> send
// view + catalog -> receive plan -> per-step gatekeeper mediation ->
// aggregate + audit. Planner failures fall back to the heuristic planner.
CycleResult run_cycle(const Task& task, const RunSettings& settings, Planner& planner,
                      BudgetLedger& ledger, const Catalog& catalog, Gatekeeper& gatekeeper,
                      int turn);

enum class SessionMode { single_turn, multi_turn };

struct SessionReport {
    SessionMode mode = SessionMode::single_turn;
    MetricsReport metrics;
    double grain_mean = 0.0;          // mean charged cost per executed call
    int total_excluded_objects = 0;   // registration exclusions across cycles
    double final_nl = 0.0;            // ledger-wide NL after the last cycle
    bool any_planner_fallback = false;
    std::vector<std::string> audit_lines;
    std::vector<std::string> budget_event_lines;
    std::string budget_state;         // canonical ledger snapshot (multi-turn: final)

    nlohmann::json to_json() const;
};

// single_turn: fresh ledger per task. multi_turn: one persistent ledger with
// object identity keyed by content hash; the task list is replayed
// `settings.repetitions` times.
SessionReport run_session(const std::vector<Task>& tasks, const RunSettings& settings,
                          SessionMode mode, Planner& planner, const Catalog& catalog);

}  // namespace plantwin
