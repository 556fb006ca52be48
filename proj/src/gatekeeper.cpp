#include "plantwin/gatekeeper.hpp"

#include <condition_variable>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace plantwin {

void PolicyConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 8.0)) throw std::invalid_argument("alpha must be in (0, 8]");
    if (rate_limit < 1) throw std::invalid_argument("rate limit must be >= 1");
}

namespace {

// Runs the hook on a detached thread so that a stuck prompt cannot wedge the
// cycle; nullopt means timeout.
std::optional<bool> run_hook_with_timeout(const ApprovalHook& hook, const PlanStep& step,
                                          const Capability& cap, std::chrono::milliseconds timeout) {
    struct State {
        std::mutex m;
        std::condition_variable cv;
        bool done = false;
        bool answer = false;
    };
    auto state = std::make_shared<State>();
    std::thread([state, hook, step, cap]() {
        bool answer = false;
        try {
            answer = hook(step, cap);
        } catch (...) {
            answer = false;
        }
        std::lock_guard<std::mutex> lock(state->m);
        state->done = true;
        state->answer = answer;
        state->cv.notify_all();
    }).detach();
    std::unique_lock<std::mutex> lock(state->m);
    if (!state->cv.wait_for(lock, timeout, [&] { return state->done; })) return std::nullopt;
    return state->answer;
}

}  // namespace

Decision decide(const PlanStep& step, const Capability& cap, const PolicyConfig& policy,
                const ApprovalHook& hook) {
    if (policy.denied_capabilities.count(cap.name)) return Decision::reject;
    bool needs_approval = step.policy == "human_approval" || cap.risk == Risk::high;
    if (!needs_approval) return Decision::approve;
    switch (policy.approval_mode) {
        case ApprovalMode::auto_approve:
            return Decision::approve;
        case ApprovalMode::auto_deny:
            return Decision::escalate;
        case ApprovalMode::interactive: {
            if (!hook) return Decision::escalate;
            auto answer = run_hook_with_timeout(hook, step, cap, policy.approval_timeout);
            if (answer.has_value() && *answer) return Decision::approve;
            return Decision::escalate;
        }
    }
    return Decision::escalate;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::executed: return "executed";
        case Verdict::rejected: return "rejected";
        case Verdict::escalated_denied: return "escalated_denied";
    }
    return "unknown";
}

const char* reason_name(ReasonCode r) {
    switch (r) {
        case ReasonCode::ok: return "ok";
        case ReasonCode::rate_limited: return "rate_limited";
        case ReasonCode::unknown_capability: return "unknown_capability";
        case ReasonCode::unknown_object: return "unknown_object";
        case ReasonCode::capability_not_allowed: return "capability_not_allowed";
        case ReasonCode::budget_exceeded: return "budget_exceeded";
        case ReasonCode::policy_denied: return "policy_denied";
        case ReasonCode::approval_denied: return "approval_denied";
        case ReasonCode::execution_error: return "execution_error";
        case ReasonCode::sanitization_failed: return "sanitization_failed";
        case ReasonCode::invalid_dependencies: return "invalid_dependencies";
    }
    return "unknown";
}

std::string AuditRecord::to_line() const {
    nlohmann::json j;
    j["session"] = session;
    j["step_id"] = step_id;
    j["capability"] = capability;
    j["verdict"] = verdict;
    j["reason"] = reason;
    nlohmann::json d = nlohmann::json::object();
    for (const auto& [id, delta] : deltas) d[id] = delta;
    j["deltas"] = d;
    return j.dump();
}

Gatekeeper::Gatekeeper(PolicyConfig policy, ApprovalHook hook)
    : policy_(std::move(policy)), hook_(std::move(hook)) {
    policy_.validate();
}

void Gatekeeper::begin_cycle() { steps_this_cycle_ = 0; }

StepOutcome Gatekeeper::finish(const PlanStep& step, Verdict verdict, ReasonCode reason) {
    StepOutcome outcome;
    outcome.step_id = step.id;
    outcome.capability = step.capability;
    outcome.verdict = verdict;
    outcome.reason = reason;
    return outcome;
}

StepOutcome Gatekeeper::validate_and_execute(const PlanStep& step, const ExecutionContext& ctx,
                                             const Catalog& catalog, BudgetLedger& ledger,
                                             const Executor& executor, int turn) {
    auto record = [&](const StepOutcome& outcome) {
        AuditRecord rec;
        rec.session = session_;
        rec.step_id = outcome.step_id;
        rec.capability = outcome.capability;
        rec.verdict = verdict_name(outcome.verdict);
        rec.reason = reason_name(outcome.reason);
        rec.deltas = outcome.budget_deltas;
        audit_.push_back(std::move(rec));
    };

    ++steps_this_cycle_;
    if (steps_this_cycle_ > policy_.rate_limit) {
        auto outcome = finish(step, Verdict::rejected, ReasonCode::rate_limited);
        record(outcome);
        return outcome;
    }

    const Capability* cap = catalog.find(step.capability);
    if (!cap) {
        auto outcome = finish(step, Verdict::rejected, ReasonCode::unknown_capability);
        record(outcome);
        return outcome;
    }

    std::vector<const TwinObject*> objects;
    for (const auto& id : step.inputs) {
        const TwinObject* obj = ctx.twin_of(id);
        if (!obj || !ctx.raw_of(id)) {
            auto outcome = finish(step, Verdict::rejected, ReasonCode::unknown_object);
            record(outcome);
            return outcome;
        }
        objects.push_back(obj);
    }
    if (objects.empty() && !cap->nullary) {
        auto outcome = finish(step, Verdict::rejected, ReasonCode::unknown_object);
        record(outcome);
        return outcome;
    }

    // (1) allowlist
    for (const TwinObject* obj : objects) {
        if (!cap->accepts_kind(obj->kind)) {
            auto outcome = finish(step, Verdict::rejected, ReasonCode::capability_not_allowed);
            record(outcome);
            return outcome;
        }
    }

    // (2) budget pre-check across all inputs; all-or-nothing
    std::map<std::string, FieldSet> charges;  // budget key -> fields
    for (const TwinObject* obj : objects) {
        FieldSet fields = expand_required_fields(*cap, *obj);
        auto& slot = charges[obj->budget_key()];
        slot.insert(fields.begin(), fields.end());
    }
    for (const auto& [key, fields] : charges) {
        if (!ledger.is_registered(key)) {
            auto outcome = finish(step, Verdict::rejected, ReasonCode::unknown_object);
            record(outcome);
            return outcome;
        }
        if (!ledger.can_disclose(key, fields)) {
            auto outcome = finish(step, Verdict::rejected, ReasonCode::budget_exceeded);
            record(outcome);
            return outcome;
        }
    }

    // (3) approval routing
    switch (decide(step, *cap, policy_, hook_)) {
        case Decision::approve:
            break;
        case Decision::reject: {
            auto outcome = finish(step, Verdict::rejected, ReasonCode::policy_denied);
            record(outcome);
            return outcome;
        }
        case Decision::escalate: {
            auto outcome = finish(step, Verdict::escalated_denied, ReasonCode::approval_denied);
            record(outcome);
            return outcome;
        }
    }

    // (4) local execution on raw data
    ExecutionResult raw_result;
    try {
        raw_result = executor.execute(*cap, step.inputs, ctx);
    } catch (const std::exception&) {
        auto outcome = finish(step, Verdict::rejected, ReasonCode::execution_error);
        record(outcome);
        return outcome;
    }

    // (5) output sanitization; a result that does not fit the declared
    // schema is dropped before any budget is spent
    SanitizedResult sanitized = sanitize_output(raw_result, *ctx.rules, ctx.path_to_object_id);
    if (sanitized.output_schema != cap->output_schema ||
        !check_output_schema(sanitized.output_schema, sanitized.payload)) {
        auto outcome = finish(step, Verdict::rejected, ReasonCode::sanitization_failed);
        record(outcome);
        return outcome;
    }

    // (6) charge budgets
    StepOutcome outcome = finish(step, Verdict::executed, ReasonCode::ok);
    for (const TwinObject* obj : objects) {
        const std::string& key = obj->budget_key();
        auto fields_it = charges.find(key);
        if (fields_it == charges.end()) continue;
        auto delta = ledger.charge(key, fields_it->second, turn);
        double charged = delta.value_or(0.0);
        outcome.budget_deltas[obj->object_id] += charged;
        outcome.charged_total += charged;
        charges.erase(fields_it);  // one charge per unique object
    }
    outcome.result = std::move(sanitized);
    record(outcome);
    return outcome;
}

}  // namespace plantwin
