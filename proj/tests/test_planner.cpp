#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "fixtures.hpp"
#include "plantwin/budget.hpp"
#include "plantwin/planner.hpp"

using namespace plantwin;

namespace {

PlannerView review_view() {
    ProjectionConfig config;
    config.now = testfix::kNow;
    TwinGraph graph = project_environment(testfix::review_environment(), config, 7);
    return full_view(graph);
}

std::string id_of_class(const PlannerView& view, const std::string& cls) {
    for (const auto& o : view.objects) {
        if (o.semantic_class && *o.semantic_class == cls) return o.object_id;
    }
    return "";
}

}  // namespace

TEST_CASE("heuristic_plan: the review request maps to audit/audit/compare/summarize") {
    PlannerView view = review_view();
    Catalog catalog = Catalog::default_catalog();
    Plan plan = heuristic_plan(
        view, catalog,
        "Review the authentication module for security issues and compare it with the payment "
        "module.");

    REQUIRE(plan.steps.size() == 4);
    std::string auth = id_of_class(view, "authentication_module");
    std::string payment = id_of_class(view, "payment_service");
    REQUIRE(!auth.empty());
    REQUIRE(!payment.empty());

    CHECK(plan.steps[0].capability == "security_audit");
    CHECK(plan.steps[1].capability == "security_audit");
    std::set<std::string> audited = {plan.steps[0].inputs[0], plan.steps[1].inputs[0]};
    CHECK(audited == std::set<std::string>{auth, payment});
    CHECK(plan.steps[2].capability == "compare");
    CHECK(plan.steps[2].inputs.size() == 2);
    CHECK(plan.steps[3].capability == "summarize");
    CHECK(!plan.steps[3].after.empty());
    // High-risk capability carries the approval annotation by default.
    CHECK(plan.steps[0].policy == "human_approval");
}

TEST_CASE("heuristic_plan: empty or keyword-free requests fall back to one summarize step") {
    PlannerView view = review_view();
    Catalog catalog = Catalog::default_catalog();
    for (const std::string request : {"", "please do the usual maintenance chores"}) {
        Plan plan = heuristic_plan(view, catalog, request);
        REQUIRE(plan.steps.size() == 1);
        CHECK(plan.steps[0].capability == "summarize");
        CHECK(plan.steps[0].inputs.size() == 1);
    }
}

TEST_CASE("heuristic_plan: empty view yields an empty plan") {
    PlannerView view;
    view.session_id = "session_0";
    Plan plan = heuristic_plan(view, Catalog::default_catalog(), "summarize everything");
    CHECK(plan.steps.empty());
}

TEST_CASE("heuristic_plan: deterministic") {
    PlannerView view = review_view();
    Catalog catalog = Catalog::default_catalog();
    std::string request = "audit the configs and scan for secrets";
    CHECK(heuristic_plan(view, catalog, request).to_document() ==
          heuristic_plan(view, catalog, request).to_document());
}

TEST_CASE("skill prompt: deterministic enumeration of the capability surface") {
    Catalog catalog = Catalog::default_catalog();
    std::string prompt = build_skill_prompt(catalog);
    for (const auto& cap : catalog.capabilities()) {
        CHECK(prompt.find(cap.name) != std::string::npos);
    }
    CHECK(prompt.find("artifact_") == std::string::npos);  // no session data
    CHECK(prompt == build_skill_prompt(catalog));

    Catalog empty = Catalog::from_config("[]");
    std::string empty_prompt = build_skill_prompt(empty);
    CHECK(empty_prompt.find("security_audit") == std::string::npos);
}

TEST_CASE("parse_plan: wire format, embedded block, garbage") {
    std::string wire = R"({"steps": [{"id": "s1", "capability": "summarize",
        "inputs": ["artifact_00"], "expected_output": "summary", "policy": "none"}]})";
    auto direct = parse_plan(wire);
    REQUIRE(direct.has_value());
    CHECK(direct->steps.size() == 1);

    // Hand-extracted oracle: the embedded block equals the wire block above.
    std::string prose = "Sure. Here is my plan:\n\n" + wire +
                        "\n\nLet me know if the steps look right. {not json}";
    auto embedded = parse_plan(prose);
    REQUIRE(embedded.has_value());
    CHECK(embedded->to_document() == direct->to_document());

    CHECK(!parse_plan("I cannot help with that").has_value());
    CHECK(!parse_plan("{\"steps\": \"nope\"}").has_value());
    CHECK(!parse_plan("{\"notsteps\": []}").has_value());
}

TEST_CASE("planner request document: outbound hygiene") {
    PlannerView view = review_view();
    Catalog catalog = Catalog::default_catalog();
    auto rules = RedactionRuleSet::builtin();
    PlannerRequest request;
    request.skill_prompt = build_skill_prompt(catalog);
    request.view_document = serialize_view(view);
    request.catalog_summary = catalog.summary();
    request.request_text = redact("compare the modules for dana.whitfield@corpmail.example", rules).sanitized;
    std::string doc = request.to_document();
    for (const auto& item : testfix::review_sensitive_items()) {
        CHECK(doc.find(item) == std::string::npos);
    }
    for (const auto& raw : testfix::review_environment()) {
        CHECK(doc.find(raw.path) == std::string::npos);
    }
}

TEST_CASE("remote planner: echo server, malformed response, unknown-object flow") {
    httplib::Server server;
    std::string next_response;
    server.Post("/plan", [&](const httplib::Request& req, httplib::Response& res) {
        CHECK(!req.body.empty());
        res.set_content(next_response, "application/json");
    });
    int port = 0;
    std::thread server_thread([&] {
        port = server.bind_to_any_port("127.0.0.1");
        server.listen_after_bind();
    });
    while (port == 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    server.wait_until_ready();

    PlannerView view = review_view();
    Catalog catalog = Catalog::default_catalog();
    PlannerRequest request;
    request.skill_prompt = build_skill_prompt(catalog);
    request.view_document = serialize_view(view);
    request.catalog_summary = catalog.summary();
    request.request_text = "summarize";

    std::string endpoint = "http://127.0.0.1:" + std::to_string(port) + "/plan";

    SUBCASE("valid plan passes through unchanged") {
        Plan wire;
        wire.steps.push_back(
            PlanStep{"s1", "summarize", {view.objects[0].object_id}, "summary", "none", {}});
        next_response = wire.to_document();
        RemotePlanner planner(endpoint, "", std::chrono::seconds(5));
        auto plan = planner.plan(request);
        REQUIRE(plan.has_value());
        CHECK(plan->to_document() == wire.to_document());
    }

    SUBCASE("malformed response reports planner-unavailable") {
        next_response = "I will not produce JSON today.";
        RemotePlanner planner(endpoint, "", std::chrono::seconds(5));
        CHECK(!planner.plan(request).has_value());
    }

    SUBCASE("plans naming unknown objects parse but fail validation downstream") {
        Plan wire;
        wire.steps.push_back(PlanStep{"s1", "summarize", {"artifact_77"}, "summary", "none", {}});
        next_response = wire.to_document();
        RemotePlanner planner(endpoint, "", std::chrono::seconds(5));
        auto plan = planner.plan(request);
        REQUIRE(plan.has_value());
        ProjectionConfig config;
        config.now = testfix::kNow;
        TwinGraph graph = project_environment(testfix::review_environment(), config, 7);
        auto validation = validate_plan(*plan, catalog, graph);
        REQUIRE(validation.verdicts.size() == 1);
        CHECK(validation.verdicts[0].code == StepVerdictCode::unknown_object);
    }

    SUBCASE("unreachable endpoint reports planner-unavailable") {
        RemotePlanner planner("http://127.0.0.1:1/plan", "", std::chrono::seconds(1));
        CHECK(!planner.plan(request).has_value());
    }

    server.stop();
    server_thread.join();
}
