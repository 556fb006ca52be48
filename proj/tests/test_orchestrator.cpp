#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "plantwin/orchestrator.hpp"

using namespace plantwin;

namespace {

RunSettings default_settings(double alpha = 1.0, std::uint64_t seed = 7) {
    RunSettings settings;
    settings.policy.alpha = alpha;
    settings.policy.approval_mode = ApprovalMode::auto_approve;
    settings.seed = seed;
    return settings;
}

}  // namespace

TEST_CASE("run_cycle: the review task crosses the boundary with zero sensitive hits") {
    Task task = testfix::review_task();
    RunSettings settings = default_settings();
    Catalog catalog = Catalog::default_catalog();
    HeuristicPlanner planner;
    BudgetLedger ledger(settings.profile, settings.policy.alpha);
    Gatekeeper gatekeeper(settings.policy);

    CycleResult cycle = run_cycle(task, settings, planner, ledger, catalog, gatekeeper, 1);
    CHECK(!cycle.plan.steps.empty());
    CHECK(!cycle.approved_capabilities.empty());
    CHECK(snd(cycle.boundary_payloads, task.sensitive_items) == 1.0);
    CHECK(cycle.timings.projection_s >= 0.0);

    // Only the kind field is disclosed at registration; capability calls add
    // the rest on demand.
    for (const auto& vo : cycle.view.objects) {
        CHECK(vo.kind.has_value());
    }
}

TEST_CASE("run_cycle: empty environment completes with an empty twin and degenerate plan") {
    Task task;
    task.id = "task_empty";
    task.domain = "devops";
    task.request = "summarize whatever exists";
    task.now = testfix::kNow;
    RunSettings settings = default_settings();
    Catalog catalog = Catalog::default_catalog();
    HeuristicPlanner planner;
    BudgetLedger ledger(settings.profile, settings.policy.alpha);
    Gatekeeper gatekeeper(settings.policy);
    CycleResult cycle = run_cycle(task, settings, planner, ledger, catalog, gatekeeper, 1);
    CHECK(cycle.twin.objects.empty());
    CHECK(cycle.plan.steps.empty());
    CHECK(cycle.excluded_objects == 0);
}

TEST_CASE("run_cycle: depleted objects are excluded, cycle still completes") {
    Task task = testfix::review_task();
    RunSettings settings = default_settings(0.06);  // caps below the kind cost for non-low objects
    Catalog catalog = Catalog::default_catalog();
    HeuristicPlanner planner;
    BudgetLedger ledger(settings.profile, settings.policy.alpha);
    Gatekeeper gatekeeper(settings.policy);

    CycleResult first = run_cycle(task, settings, planner, ledger, catalog, gatekeeper, 1);
    CHECK(first.excluded_objects > 0);
    CycleResult second = run_cycle(task, settings, planner, ledger, catalog, gatekeeper, 2);
    CHECK(second.excluded_objects >= first.excluded_objects);
    CHECK(snd(second.boundary_payloads, task.sensitive_items) == 1.0);

    // Excluded objects never reappear in a view.
    for (const auto& vo : second.view.objects) {
        CHECK(vo.kind.has_value());
    }
}

TEST_CASE("run_session: first turn is identical in both modes") {
    std::vector<Task> tasks = {testfix::review_task()};
    RunSettings settings = default_settings();
    Catalog catalog = Catalog::default_catalog();
    HeuristicPlanner planner;
    SessionReport single = run_session(tasks, settings, SessionMode::single_turn, planner, catalog);
    SessionReport multi = run_session(tasks, settings, SessionMode::multi_turn, planner, catalog);
    REQUIRE(single.metrics.tasks.size() == 1);
    REQUIRE(multi.metrics.tasks.size() == 1);
    CHECK(single.metrics.tasks[0].pqs == multi.metrics.tasks[0].pqs);
    CHECK(single.metrics.tasks[0].snd == multi.metrics.tasks[0].snd);
    CHECK(single.metrics.tasks[0].nl == multi.metrics.tasks[0].nl);
}

TEST_CASE("run_session: multi-turn budgets dominate single-turn budgets per object") {
    // The same task repeated: cumulative disclosure in multi-turn mode can
    // only meet or exceed what any single turn disclosed.
    std::vector<Task> tasks = {testfix::review_task(), testfix::review_task()};
    tasks[1].id = "task_review_again";
    tasks[1].request = "Scan the service modules for leaked credentials and secrets.";

    RunSettings settings = default_settings();
    Catalog catalog = Catalog::default_catalog();
    HeuristicPlanner planner;

    // Single-turn: capture per-object spend for each task separately.
    std::map<std::string, double> single_max;
    for (const auto& task : tasks) {
        BudgetLedger ledger(settings.profile, settings.policy.alpha);
        Gatekeeper gatekeeper(settings.policy);
        run_cycle(task, settings, planner, ledger, catalog, gatekeeper, 1);
        for (const auto& key : ledger.registered_keys()) {
            single_max[key] = std::max(single_max[key], ledger.spent(key));
        }
    }

    BudgetLedger shared(settings.profile, settings.policy.alpha);
    Gatekeeper gatekeeper(settings.policy);
    int turn = 0;
    for (const auto& task : tasks) {
        run_cycle(task, settings, planner, shared, catalog, gatekeeper, ++turn);
    }
    for (const auto& [key, single_spent] : single_max) {
        REQUIRE(shared.is_registered(key));
        CHECK(shared.spent(key) >= single_spent);
    }
}

TEST_CASE("run_session: repeated multi-turn sessions deplete gracefully") {
    std::vector<Task> tasks = generate_tasks(10, 42);
    RunSettings settings = default_settings(0.06, 42);
    settings.repetitions = 3;
    Catalog catalog = Catalog::default_catalog();
    HeuristicPlanner planner;
    SessionReport report = run_session(tasks, settings, SessionMode::multi_turn, planner, catalog);
    CHECK(report.total_excluded_objects > 0);
    CHECK(report.final_nl == 1.0);
    for (const auto& row : report.metrics.tasks) {
        CHECK(row.snd == 1.0);
    }
    // Exclusions never decrease across repetitions of the same task.
    std::map<std::string, int> first_seen;
    for (const auto& row : report.metrics.tasks) {
        std::string base = row.task_id.substr(0, row.task_id.find("_r"));
        auto it = first_seen.find(base);
        if (it == first_seen.end()) {
            first_seen[base] = row.excluded_objects;
        } else {
            CHECK(row.excluded_objects >= it->second);
        }
    }
}

TEST_CASE("run_session: budget event log lines are well-formed") {
    std::vector<Task> tasks = {testfix::review_task()};
    RunSettings settings = default_settings();
    Catalog catalog = Catalog::default_catalog();
    HeuristicPlanner planner;
    SessionReport report = run_session(tasks, settings, SessionMode::multi_turn, planner, catalog);
    REQUIRE(!report.budget_event_lines.empty());
    for (const auto& line : report.budget_event_lines) {
        auto parsed = nlohmann::json::parse(line);
        CHECK(parsed.contains("turn"));
        CHECK(parsed.contains("object"));
        CHECK(parsed.contains("fields"));
        CHECK(parsed.contains("delta"));
        CHECK(parsed.contains("b_after"));
        CHECK(parsed.contains("decision"));
    }
    REQUIRE(!report.audit_lines.empty());
    for (const auto& line : report.audit_lines) {
        auto parsed = nlohmann::json::parse(line);
        CHECK(parsed.contains("verdict"));
        CHECK(parsed.contains("reason"));
    }
}

TEST_CASE("run_session: deterministic under a fixed seed") {
    std::vector<Task> tasks = generate_tasks(6, 9);
    RunSettings settings = default_settings(1.0, 9);
    Catalog catalog = Catalog::default_catalog();
    HeuristicPlanner planner;
    auto a = run_session(tasks, settings, SessionMode::single_turn, planner, catalog);
    auto b = run_session(tasks, settings, SessionMode::single_turn, planner, catalog);
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK(a.budget_state == b.budget_state);
}

// Frozen-corpus regression: computed once on the shipped template library
// and generator (seed 42, 40 tasks), then pinned. A change in any pipeline
// stage, the planner rules, the catalog or the generator shows up here.
TEST_CASE("run_session: pinned regression triple on the frozen corpus") {
    std::vector<Task> tasks = generate_tasks(40, 42);
    RunSettings settings = default_settings(1.0, 42);
    Catalog catalog = Catalog::default_catalog();
    HeuristicPlanner planner;
    SessionReport report = run_session(tasks, settings, SessionMode::single_turn, planner, catalog);

    CHECK(report.metrics.combined.snd == 1.0);
    CHECK(report.metrics.combined.pqs == doctest::Approx(0.9591666666666665).epsilon(1e-9));
    CHECK(report.metrics.combined.nl == doctest::Approx(0.28164898162391655).epsilon(1e-9));
    CHECK(report.grain_mean == doctest::Approx(1.7378048780487805).epsilon(1e-9));
}
