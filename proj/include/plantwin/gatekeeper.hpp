#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "plantwin/budget.hpp"
#include "plantwin/capability.hpp"
#include "plantwin/executor.hpp"
#include "plantwin/projection.hpp"

namespace plantwin {

enum class ApprovalMode { interactive, auto_approve, auto_deny };

struct PolicyConfig {
    ApprovalMode approval_mode = ApprovalMode::auto_approve;
    double alpha = 1.0;                         // budget scale factor, (0, 8]
    int rate_limit = 32;                        // max steps per cycle, >= 1
    std::set<std::string> denied_capabilities;  // allowlist overrides
    bool disclose_edges = false;                // charge graph edges at registration
    std::chrono::milliseconds approval_timeout{30000};

    void validate() const;  // throws std::invalid_argument
};

// Injected approval callback. Consulted only in interactive mode; a timeout
// counts as a denial (escalate-deny).
using ApprovalHook = std::function<bool(const PlanStep&, const Capability&)>;

enum class Decision { approve, reject, escalate };

// Pure routing of policy annotation + declared risk + approval mode. The
// hook is consulted only for interactive approvals.
Decision decide(const PlanStep& step, const Capability& cap, const PolicyConfig& policy,
                const ApprovalHook& hook);

enum class Verdict { executed, rejected, escalated_denied };

const char* verdict_name(Verdict v);

enum class ReasonCode {
    ok,
    rate_limited,
    unknown_capability,
    unknown_object,
    capability_not_allowed,
    budget_exceeded,
    policy_denied,
    approval_denied,
    execution_error,
    sanitization_failed,
    invalid_dependencies,
};

const char* reason_name(ReasonCode r);

struct StepOutcome {
    std::string step_id;
    std::string capability;
    Verdict verdict = Verdict::rejected;
    ReasonCode reason = ReasonCode::ok;
    std::optional<SanitizedResult> result;            // iff executed
    std::map<std::string, double> budget_deltas;      // object_id -> charged delta
    double charged_total = 0.0;                       // zero on every non-executed path
};

struct AuditRecord {
    std::string session;
    std::string step_id;
    std::string capability;
    std::string verdict;
    std::string reason;
    std::map<std::string, double> deltas;

    std::string to_line() const;  // one JSONL record
};

// Per-step mediation. Checks run in a fixed order: rate limit, capability
// existence, object resolution, kind allowlist, budget, approval; then local
// execution, output sanitization, and only then budget charging. Any
// rejection or escalation leaves the ledger untouched.
class Gatekeeper {
public:
    Gatekeeper(PolicyConfig policy, ApprovalHook hook = nullptr);

    void begin_cycle();  // resets the per-cycle rate limit counter

    StepOutcome validate_and_execute(const PlanStep& step, const ExecutionContext& ctx,
                                     const Catalog& catalog, BudgetLedger& ledger,
                                     const Executor& executor, int turn = 0);

    const PolicyConfig& policy() const { return policy_; }
    const std::vector<AuditRecord>& audit_trail() const { return audit_; }
    void set_session(std::string session_id) { session_ = std::move(session_id); }

private:
    StepOutcome finish(const PlanStep& step, Verdict verdict, ReasonCode reason);

    PolicyConfig policy_;
    ApprovalHook hook_;
    std::string session_;
    int steps_this_cycle_ = 0;
    std::vector<AuditRecord> audit_;
};

}  // namespace plantwin
