#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <thread>

#include "fixtures.hpp"
#include "plantwin/gatekeeper.hpp"
#include "plantwin/rng.hpp"

using namespace plantwin;

namespace {

struct Fixture {
    std::vector<RawArtifact> env = testfix::review_environment();
    ProjectionConfig projection;
    TwinGraph graph;
    Catalog catalog = Catalog::default_catalog();
    RedactionRuleSet rules = RedactionRuleSet::builtin();
    ExecutionContext ctx;
    BuiltinExecutor executor;

    Fixture() {
        projection.now = testfix::kNow;
        graph = project_environment(env, projection, 7);
        ctx = build_execution_context(env, graph, rules);
    }

    const TwinObject* by_kind(const std::string& kind) const {
        for (const auto& o : graph.objects) {
            if (o.kind == kind) return &o;
        }
        return nullptr;
    }

    BudgetLedger fresh_ledger(double alpha = 1.0) const {
        BudgetLedger ledger(WeightProfile::paper_default(), alpha);
        for (const auto& obj : graph.objects) {
            ledger.register_object(obj);
            ledger.charge(obj.budget_key(), {FieldId::scalar(FieldKey::kind)});
        }
        return ledger;
    }
};

struct ThrowingExecutor : Executor {
    ExecutionResult execute(const Capability&, const std::vector<std::string>&,
                            const ExecutionContext&) const override {
        throw std::runtime_error("tool crashed");
    }
};

struct WrongSchemaExecutor : Executor {
    ExecutionResult execute(const Capability& cap, const std::vector<std::string>&,
                            const ExecutionContext&) const override {
        ExecutionResult result;
        result.capability = cap.name;
        result.output_schema = cap.output_schema;
        result.payload = {{"unexpected", 1}};  // misses summary_text
        return result;
    }
};

}  // namespace

TEST_CASE("decide: routing matrix") {
    Catalog catalog = Catalog::default_catalog();
    const Capability& low = *catalog.find("summarize");
    const Capability& high = *catalog.find("security_audit");
    PlanStep plain{"s1", "summarize", {"artifact_00"}, "summary", "none", {}};
    PlanStep flagged{"s2", "security_audit", {"artifact_00"}, "audit_findings", "human_approval", {}};

    PolicyConfig approve;
    approve.approval_mode = ApprovalMode::auto_approve;
    CHECK(decide(plain, low, approve, nullptr) == Decision::approve);
    CHECK(decide(flagged, high, approve, nullptr) == Decision::approve);

    PolicyConfig deny;
    deny.approval_mode = ApprovalMode::auto_deny;
    CHECK(decide(plain, low, deny, nullptr) == Decision::approve);  // no approval needed
    CHECK(decide(flagged, high, deny, nullptr) == Decision::escalate);
    // risk=high forces approval even without the step annotation
    PlanStep unmarked{"s3", "security_audit", {"artifact_00"}, "audit_findings", "none", {}};
    CHECK(decide(unmarked, high, deny, nullptr) == Decision::escalate);

    PolicyConfig interactive;
    interactive.approval_mode = ApprovalMode::interactive;
    interactive.approval_timeout = std::chrono::milliseconds(200);
    CHECK(decide(flagged, high, interactive,
                 [](const PlanStep&, const Capability&) { return true; }) == Decision::approve);
    CHECK(decide(flagged, high, interactive,
                 [](const PlanStep&, const Capability&) { return false; }) == Decision::escalate);

    // Timeout counts as a denial.
    PolicyConfig timeout = interactive;
    timeout.approval_timeout = std::chrono::milliseconds(20);
    CHECK(decide(flagged, high, timeout, [](const PlanStep&, const Capability&) {
              std::this_thread::sleep_for(std::chrono::milliseconds(300));
              return true;
          }) == Decision::escalate);

    PolicyConfig override_deny;
    override_deny.denied_capabilities = {"summarize"};
    CHECK(decide(plain, low, override_deny, nullptr) == Decision::reject);
}

TEST_CASE("validate_and_execute: the approved path charges exactly the required-field cost") {
    Fixture fx;
    BudgetLedger ledger = fx.fresh_ledger();
    PolicyConfig policy;
    Gatekeeper gk(policy);
    const TwinObject* code = fx.by_kind("code_file");
    REQUIRE(code != nullptr);

    double before = ledger.spent(code->budget_key());
    FieldSet expected_fields = expand_required_fields(*fx.catalog.find("security_audit"), *code);
    double expected_cost = ledger.estimate_cost(code->budget_key(), expected_fields);

    PlanStep step{"s1", "security_audit", {code->object_id}, "audit_findings", "human_approval", {}};
    StepOutcome outcome = gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, fx.executor);
    CHECK(outcome.verdict == Verdict::executed);
    CHECK(outcome.reason == ReasonCode::ok);
    REQUIRE(outcome.result.has_value());
    CHECK(outcome.charged_total == expected_cost);
    CHECK(ledger.spent(code->budget_key()) == before + expected_cost);
    REQUIRE(gk.audit_trail().size() == 1);
    CHECK(gk.audit_trail()[0].verdict == std::string("executed"));
}

TEST_CASE("validate_and_execute: allowlist check precedes the budget check") {
    Fixture fx;
    // Over-budget AND kind-disallowed step: the reason must be the allowlist.
    BudgetLedger ledger(WeightProfile::paper_default(), 0.1);
    for (const auto& obj : fx.graph.objects) ledger.register_object(obj);
    Gatekeeper gk(PolicyConfig{});
    const TwinObject* code = fx.by_kind("code_file");
    PlanStep step{"s1", "extract_constraints", {code->object_id}, "constraint_list", "none", {}};
    auto outcome = gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, fx.executor);
    CHECK(outcome.verdict == Verdict::rejected);
    CHECK(outcome.reason == ReasonCode::capability_not_allowed);
}

TEST_CASE("validate_and_execute: budget check precedes approval routing") {
    Fixture fx;
    BudgetLedger ledger = fx.fresh_ledger(0.25);  // tight caps: audit cannot fit
    PolicyConfig deny;
    deny.approval_mode = ApprovalMode::auto_deny;  // would escalate if reached
    Gatekeeper gk(deny);
    const TwinObject* code = fx.by_kind("code_file");
    PlanStep step{"s1", "security_audit", {code->object_id}, "audit_findings", "human_approval", {}};
    std::string before = ledger.serialize_state();
    auto outcome = gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, fx.executor);
    CHECK(outcome.verdict == Verdict::rejected);
    CHECK(outcome.reason == ReasonCode::budget_exceeded);
    CHECK(ledger.serialize_state() == before);
}

TEST_CASE("validate_and_execute: escalation carries zero budget deltas") {
    Fixture fx;
    BudgetLedger ledger = fx.fresh_ledger();
    PolicyConfig deny;
    deny.approval_mode = ApprovalMode::auto_deny;
    Gatekeeper gk(deny);
    const TwinObject* code = fx.by_kind("code_file");
    PlanStep step{"s1", "security_audit", {code->object_id}, "audit_findings", "human_approval", {}};
    std::string before = ledger.serialize_state();
    auto outcome = gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, fx.executor);
    CHECK(outcome.verdict == Verdict::escalated_denied);
    CHECK(outcome.reason == ReasonCode::approval_denied);
    CHECK(outcome.budget_deltas.empty());
    CHECK(outcome.charged_total == 0.0);
    CHECK(ledger.serialize_state() == before);
}

TEST_CASE("validate_and_execute: executor failure after approval does not charge") {
    Fixture fx;
    BudgetLedger ledger = fx.fresh_ledger();
    Gatekeeper gk(PolicyConfig{});
    ThrowingExecutor broken;
    const TwinObject* code = fx.by_kind("code_file");
    PlanStep step{"s1", "summarize", {code->object_id}, "summary", "none", {}};
    std::string before = ledger.serialize_state();
    auto outcome = gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, broken);
    CHECK(outcome.verdict == Verdict::rejected);
    CHECK(outcome.reason == ReasonCode::execution_error);
    CHECK(ledger.serialize_state() == before);
}

TEST_CASE("validate_and_execute: sanitization failure blocks charging") {
    Fixture fx;
    BudgetLedger ledger = fx.fresh_ledger();
    Gatekeeper gk(PolicyConfig{});
    WrongSchemaExecutor wrong;
    const TwinObject* code = fx.by_kind("code_file");
    PlanStep step{"s1", "summarize", {code->object_id}, "summary", "none", {}};
    std::string before = ledger.serialize_state();
    auto outcome = gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, wrong);
    CHECK(outcome.verdict == Verdict::rejected);
    CHECK(outcome.reason == ReasonCode::sanitization_failed);
    CHECK(ledger.serialize_state() == before);
}

TEST_CASE("rate limit: surplus steps are rejected without leaks") {
    Fixture fx;
    BudgetLedger ledger = fx.fresh_ledger();
    PolicyConfig policy;
    policy.rate_limit = 2;
    Gatekeeper gk(policy);
    gk.begin_cycle();
    const TwinObject* code = fx.by_kind("code_file");
    PlanStep step{"s1", "summarize", {code->object_id}, "summary", "none", {}};
    CHECK(gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, fx.executor).verdict ==
          Verdict::executed);
    CHECK(gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, fx.executor).verdict ==
          Verdict::executed);
    std::string before = ledger.serialize_state();
    auto third = gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, fx.executor);
    CHECK(third.verdict == Verdict::rejected);
    CHECK(third.reason == ReasonCode::rate_limited);
    CHECK(ledger.serialize_state() == before);
    gk.begin_cycle();  // next cycle resets the counter
    CHECK(gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, fx.executor).verdict ==
          Verdict::executed);
}

TEST_CASE("property: rejected and escalated steps never change ledger or view bytes") {
    Fixture fx;
    auto rng = make_rng(77);
    std::vector<std::string> capability_names;
    for (const auto& cap : fx.catalog.capabilities()) capability_names.push_back(cap.name);
    capability_names.push_back("read_line");  // deliberately absent

    for (int round = 0; round < 100; ++round) {
        double alpha = (round % 2) ? 1.0 : 0.2;
        BudgetLedger ledger(WeightProfile::paper_default(), alpha);
        for (const auto& obj : fx.graph.objects) {
            ledger.register_object(obj);
            ledger.charge(obj.budget_key(), {FieldId::scalar(FieldKey::kind)});
        }
        PolicyConfig policy;
        policy.approval_mode = (round % 3) ? ApprovalMode::auto_approve : ApprovalMode::auto_deny;
        Gatekeeper gk(policy);
        gk.begin_cycle();
        for (int s = 0; s < 8; ++s) {
            PlanStep step;
            step.id = "s" + std::to_string(s);
            step.capability = capability_names[rng() % capability_names.size()];
            if (rng() % 5 == 0) {
                step.inputs = {"artifact_zz"};
            } else {
                step.inputs = {fx.graph.objects[rng() % fx.graph.objects.size()].object_id};
            }
            step.policy = (rng() % 2) ? "none" : "human_approval";
            std::string ledger_before = ledger.serialize_state();
            std::string view_before = serialize_view(restrict_view(fx.graph, ledger));
            StepOutcome outcome =
                gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, fx.executor);
            if (outcome.verdict != Verdict::executed) {
                REQUIRE(ledger.serialize_state() == ledger_before);
                REQUIRE(serialize_view(restrict_view(fx.graph, ledger)) == view_before);
                REQUIRE(outcome.charged_total == 0.0);
            }
        }
    }
}

TEST_CASE("executed results pass redaction idempotence and leak nothing") {
    Fixture fx;
    BudgetLedger ledger = fx.fresh_ledger();
    Gatekeeper gk(PolicyConfig{});
    gk.begin_cycle();
    for (const auto& obj : fx.graph.objects) {
        PlanStep step{"s_" + obj.object_id, "summarize", {obj.object_id}, "summary", "none", {}};
        auto outcome = gk.validate_and_execute(step, fx.ctx, fx.catalog, ledger, fx.executor);
        REQUIRE(outcome.verdict == Verdict::executed);
        std::string doc = outcome.result->to_document();
        CHECK(redact(doc, fx.rules).sanitized == doc);
        for (const auto& item : testfix::review_sensitive_items()) {
            CHECK(doc.find(item) == std::string::npos);
        }
    }
}
