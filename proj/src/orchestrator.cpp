#include "plantwin/orchestrator.hpp"

#include <chrono>
#include <numeric>
#include <set>

#include "plantwin/rng.hpp"

namespace plantwin {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

ReasonCode reason_for_verdict(StepVerdictCode code) {
    switch (code) {
        case StepVerdictCode::unknown_capability: return ReasonCode::unknown_capability;
        case StepVerdictCode::kind_not_allowed: return ReasonCode::capability_not_allowed;
        case StepVerdictCode::unknown_object: return ReasonCode::unknown_object;
        case StepVerdictCode::cycle: return ReasonCode::invalid_dependencies;
        case StepVerdictCode::ok: return ReasonCode::ok;
    }
    return ReasonCode::ok;
}

}  // namespace

CycleResult run_cycle(const Task& task, const RunSettings& settings, Planner& planner,
                      BudgetLedger& ledger, const Catalog& catalog, Gatekeeper& gatekeeper,
                      int turn) {
    CycleResult result;

    // Observe + project (the pipeline is total; this never fails).
    auto t_project = Clock::now();
    ProjectionConfig projection = settings.projection;
    projection.now = task.now;
    std::uint64_t task_seed =
        derive_seed(settings.seed, fnv1a64(task.id.data(), task.id.size()) ^
                                       static_cast<std::uint64_t>(turn));
    result.twin = project_environment(task.environment, projection, task_seed, task.declared_edges);
    result.timings.projection_s = seconds_since(t_project);

    // Registration disclosure: kind only, with a budget pre-check. Objects
    // that can no longer disclose anything are excluded outright.
    static const FieldSet kind_only = {FieldId::scalar(FieldKey::kind)};
    std::set<std::string> excluded_ids;
    for (const auto& obj : result.twin.objects) {
        const std::string& key = obj.budget_key();
        ledger.register_object(obj);
        if (!ledger.field_disclosed(key, FieldId::scalar(FieldKey::kind))) {
            if (ledger.can_disclose(key, kind_only)) {
                ledger.charge(key, kind_only, turn);
            } else {
                excluded_ids.insert(obj.object_id);  // budget exceeded at registration
            }
        } else if (object_depleted(ledger, catalog, key)) {
            excluded_ids.insert(obj.object_id);
        }
    }
    result.excluded_objects = static_cast<int>(excluded_ids.size());

    TwinGraph visible;
    visible.session_id = result.twin.session_id;
    for (const auto& obj : result.twin.objects) {
        if (!excluded_ids.count(obj.object_id)) visible.objects.push_back(obj);
    }
    for (const auto& e : result.twin.edges) {
        if (!excluded_ids.count(e.src) && !excluded_ids.count(e.dst)) visible.edges.push_back(e);
    }

    // Optional relational disclosure: edges are charged to both endpoints
    // and appear only when both charges fit.
    if (settings.policy.disclose_edges) {
        for (const auto& e : visible.edges) {
            const TwinObject* src = visible.find(e.src);
            const TwinObject* dst = visible.find(e.dst);
            if (!src || !dst) continue;
            FieldSet edge_field = {
                FieldId::edge_ref(edge_key(src->budget_key(), dst->budget_key(), e.relation))};
            if (ledger.can_disclose(src->budget_key(), edge_field) &&
                ledger.can_disclose(dst->budget_key(), edge_field)) {
                ledger.charge(src->budget_key(), edge_field, turn);
                if (dst->budget_key() != src->budget_key())
                    ledger.charge(dst->budget_key(), edge_field, turn);
            }
        }
    }

    result.view = restrict_view(visible, ledger);
    result.view_document = serialize_view(result.view);
    result.request_sanitized = redact(task.request, projection.rules).sanitized;
    result.skill_prompt = build_skill_prompt(catalog);

    PlannerRequest request;
    request.skill_prompt = result.skill_prompt;
    request.view_document = result.view_document;
    request.catalog_summary = catalog.summary();
    request.request_text = result.request_sanitized;

    auto t_plan = Clock::now();
    std::optional<Plan> planned = planner.plan(request);
    if (!planned.has_value()) {
        result.planner_fallback = true;
        planned = heuristic_plan(result.view, catalog, result.request_sanitized);
    }
    result.plan = std::move(*planned);
    result.timings.planner_s = seconds_since(t_plan);

    // Per-step mediation in plan order.
    auto t_gate = Clock::now();
    gatekeeper.begin_cycle();
    ExecutionContext ctx = build_execution_context(task.environment, visible, projection.rules);
    PlanValidation validation = validate_plan(result.plan, catalog, visible);
    BuiltinExecutor executor;
    nlohmann::json aggregated = nlohmann::json::array();
    for (std::size_t i = 0; i < result.plan.steps.size(); ++i) {
        const PlanStep& step = result.plan.steps[i];
        StepRecord record;
        record.step = step;
        if (validation.verdicts[i].code != StepVerdictCode::ok) {
            StepOutcome outcome;
            outcome.step_id = step.id;
            outcome.capability = step.capability;
            outcome.verdict = Verdict::rejected;
            outcome.reason = reason_for_verdict(validation.verdicts[i].code);
            record.outcome = std::move(outcome);
        } else {
            record.outcome = gatekeeper.validate_and_execute(step, ctx, catalog, ledger, executor,
                                                             turn);
        }
        if (record.outcome.verdict == Verdict::executed) {
            result.approved_capabilities.push_back(step.capability);
            result.charges_per_call.push_back(record.outcome.charged_total);
            if (record.outcome.result) {
                aggregated.push_back(nlohmann::json::parse(record.outcome.result->to_document()));
            }
        }
        result.steps.push_back(std::move(record));
    }
    result.aggregated_results = std::move(aggregated);
    result.timings.gatekeeper_s = seconds_since(t_gate);

    // Everything that crossed the trust boundary this cycle.
    result.boundary_payloads.push_back(result.skill_prompt);
    result.boundary_payloads.push_back(result.view_document);
    result.boundary_payloads.push_back(request.catalog_summary.dump());
    result.boundary_payloads.push_back(result.request_sanitized);
    for (const auto& record : result.steps) {
        if (record.outcome.result) result.boundary_payloads.push_back(record.outcome.result->to_document());
    }
    return result;
}

nlohmann::json SessionReport::to_json() const {
    nlohmann::json j;
    j["mode"] = mode == SessionMode::single_turn ? "single_turn" : "multi_turn";
    j["metrics"] = metrics.to_json();
    j["grain_mean"] = grain_mean;
    j["total_excluded_objects"] = total_excluded_objects;
    j["final_nl"] = final_nl;
    j["any_planner_fallback"] = any_planner_fallback;
    return j;
}

SessionReport run_session(const std::vector<Task>& tasks, const RunSettings& settings,
                          SessionMode mode, Planner& planner, const Catalog& catalog) {
    if (tasks.empty()) throw std::invalid_argument("run_session: no tasks");
    SessionReport report;
    report.mode = mode;

    std::vector<TaskMetrics> rows;
    std::vector<double> all_charges;

    BudgetLedger shared_ledger(settings.profile, settings.policy.alpha);
    Gatekeeper shared_gatekeeper(settings.policy, settings.approval_hook);

    int repetitions = mode == SessionMode::multi_turn ? std::max(1, settings.repetitions) : 1;
    int turn = 0;
    for (int rep = 0; rep < repetitions; ++rep) {
        for (const auto& task : tasks) {
            ++turn;
            TaskMetrics row;
            row.task_id = repetitions > 1 ? task.id + "_r" + std::to_string(rep) : task.id;
            row.domain = task.domain;

            if (mode == SessionMode::single_turn) {
                BudgetLedger ledger(settings.profile, settings.policy.alpha);
                Gatekeeper gatekeeper(settings.policy, settings.approval_hook);
                gatekeeper.set_session(task.id);
                CycleResult cycle = run_cycle(task, settings, planner, ledger, catalog, gatekeeper, turn);
                row.snd = snd(cycle.boundary_payloads, task.sensitive_items);
                auto q = pqs(cycle.approved_capabilities, task.expected_capabilities);
                row.pqs = q.pqs;
                row.precision = q.precision;
                row.recall = q.recall;
                row.nl = ledger.registered_keys().empty() ? 0.0 : nl(ledger, catalog);
                row.degenerate = cycle.plan.steps.empty();
                row.excluded_objects = cycle.excluded_objects;
                row.planner_fallback = cycle.planner_fallback;
                report.total_excluded_objects += cycle.excluded_objects;
                report.any_planner_fallback |= cycle.planner_fallback;
                for (const auto& rec : gatekeeper.audit_trail())
                    report.audit_lines.push_back(rec.to_line());
                all_charges.insert(all_charges.end(), cycle.charges_per_call.begin(),
                                   cycle.charges_per_call.end());
                report.final_nl = row.nl;
                if (rep == repetitions - 1) report.budget_state = ledger.serialize_state();
            } else {
                shared_gatekeeper.set_session(task.id);
                CycleResult cycle =
                    run_cycle(task, settings, planner, shared_ledger, catalog, shared_gatekeeper, turn);
                row.snd = snd(cycle.boundary_payloads, task.sensitive_items);
                auto q = pqs(cycle.approved_capabilities, task.expected_capabilities);
                row.pqs = q.pqs;
                row.precision = q.precision;
                row.recall = q.recall;
                row.nl = shared_ledger.registered_keys().empty() ? 0.0
                                                                 : nl(shared_ledger, catalog);
                row.degenerate = cycle.plan.steps.empty();
                row.excluded_objects = cycle.excluded_objects;
                row.planner_fallback = cycle.planner_fallback;
                report.total_excluded_objects += cycle.excluded_objects;
                report.any_planner_fallback |= cycle.planner_fallback;
                all_charges.insert(all_charges.end(), cycle.charges_per_call.begin(),
                                   cycle.charges_per_call.end());
            }
            rows.push_back(std::move(row));
        }
    }

    if (mode == SessionMode::multi_turn) {
        report.final_nl = shared_ledger.registered_keys().empty() ? 0.0
                                                                  : nl(shared_ledger, catalog);
        report.budget_state = shared_ledger.serialize_state();
        for (const auto& rec : shared_gatekeeper.audit_trail())
            report.audit_lines.push_back(rec.to_line());
        for (const auto& event : shared_ledger.events()) {
            nlohmann::json e;
            e["turn"] = event.turn;
            e["object"] = event.object_key;
            e["fields"] = event.fields;
            e["delta"] = micro_to_cost(event.delta_micro);
            e["b_after"] = micro_to_cost(event.b_after_micro);
            e["decision"] = "charged";
            report.budget_event_lines.push_back(e.dump());
        }
    }

    report.metrics = assemble_report(rows);
    report.grain_mean = all_charges.empty() ? 0.0 : grain(all_charges);
    return report;
}

}  // namespace plantwin
