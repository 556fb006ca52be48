#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "plantwin/budget.hpp"
#include "plantwin/rng.hpp"
#include "plantwin/twin.hpp"
#include "plantwin/vocab.hpp"

using namespace plantwin;

namespace {

TwinObject make_object(const std::string& id, const std::string& kind = "code_file") {
    TwinObject obj;
    obj.object_id = id;
    obj.kind = kind;
    obj.semantic_class = "authentication_module";
    obj.sensitivity = "restricted";
    obj.freshness = "recent";
    obj.size_bucket = "small";
    obj.contains = {"imports"};
    obj.usable_for = {"audit"};
    obj.confidence = 0.8;
    return obj;
}

TwinObject random_object(std::mt19937_64& rng, const std::string& id) {
    TwinObject obj;
    obj.object_id = id;
    obj.kind = vocab::kind_tokens()[rng() % vocab::kind_tokens().size()];
    obj.semantic_class = vocab::semantic_classes()[rng() % vocab::semantic_classes().size()];
    obj.sensitivity = vocab::sensitivity_tokens()[rng() % vocab::sensitivity_tokens().size()];
    obj.freshness = vocab::freshness_tokens()[rng() % vocab::freshness_tokens().size()];
    obj.size_bucket = vocab::size_bucket_tokens()[rng() % vocab::size_bucket_tokens().size()];
    for (const auto& t : vocab::contains_tags()) {
        if (rng() % 3 == 0) obj.contains.push_back(t);
    }
    for (const auto& t : vocab::usable_for_tags()) {
        if (rng() % 3 == 0) obj.usable_for.push_back(t);
    }
    obj.confidence = static_cast<double>(rng() % 101) / 100.0;
    return obj;
}

}  // namespace

TEST_CASE("validate_graph: empty graph yields empty report") {
    TwinGraph graph;
    graph.session_id = "session_0";
    CHECK(validate_graph(graph).ok());
}

TEST_CASE("validate_graph: dangling edge reported") {
    TwinGraph graph;
    graph.session_id = "session_0";
    graph.objects.push_back(make_object("artifact_00"));
    graph.edges.push_back({"artifact_00", "artifact_99", "depends_on"});
    auto report = validate_graph(graph);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].code == "dangling_edge");
}

TEST_CASE("validate_graph: unknown kind token reported") {
    TwinGraph graph;
    graph.session_id = "session_0";
    auto obj = make_object("artifact_00");
    obj.kind = "binary_blob";
    graph.objects.push_back(obj);
    auto report = validate_graph(graph);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].code == "unknown_vocabulary");
}

TEST_CASE("validate_graph: duplicate ids and self loops") {
    TwinGraph graph;
    graph.session_id = "session_0";
    graph.objects.push_back(make_object("artifact_00"));
    graph.objects.push_back(make_object("artifact_00"));
    graph.edges.push_back({"artifact_00", "artifact_00", "blocks"});
    auto report = validate_graph(graph);
    bool saw_dup = false, saw_loop = false;
    for (const auto& issue : report.issues) {
        if (issue.code == "duplicate_id") saw_dup = true;
        if (issue.code == "self_loop") saw_loop = true;
    }
    CHECK(saw_dup);
    CHECK(saw_loop);
}

TEST_CASE("restrict_view: only kind disclosed exposes exactly one field per object") {
    TwinGraph graph;
    graph.session_id = "session_1";
    graph.objects.push_back(make_object("artifact_00"));
    graph.objects.push_back(make_object("artifact_01", "document"));
    BudgetLedger ledger(WeightProfile::paper_default());
    for (const auto& obj : graph.objects) {
        ledger.register_object(obj);
        ledger.charge(obj.budget_key(), {FieldId::scalar(FieldKey::kind)});
    }
    PlannerView view = restrict_view(graph, ledger);
    REQUIRE(view.objects.size() == 2);
    for (const auto& vo : view.objects) {
        CHECK(vo.disclosed_count() == 1);
        CHECK(vo.kind.has_value());
    }
}

TEST_CASE("restrict_view: empty ledger yields empty view") {
    TwinGraph graph;
    graph.session_id = "session_1";
    graph.objects.push_back(make_object("artifact_00"));
    BudgetLedger ledger(WeightProfile::paper_default());
    ledger.register_object(graph.objects[0]);
    PlannerView view = restrict_view(graph, ledger);
    CHECK(view.objects.empty());
    CHECK(view.edges.empty());
}

TEST_CASE("restrict_view: field filtering matches exhaustive enumeration") {
    // Oracle: enumerate every field of every object and independently decide
    // whether the ledger discloses it; compare against the view.
    TwinGraph graph;
    graph.session_id = "session_2";
    graph.objects.push_back(make_object("artifact_00"));
    graph.objects.push_back(make_object("artifact_01", "document"));
    BudgetLedger ledger(WeightProfile::paper_default());
    for (const auto& obj : graph.objects) ledger.register_object(obj);
    ledger.charge("artifact_00", {FieldId::scalar(FieldKey::kind),
                                  FieldId::scalar(FieldKey::semantic_class)});
    ledger.charge("artifact_01", {FieldId::scalar(FieldKey::kind)});

    PlannerView view = restrict_view(graph, ledger);
    REQUIRE(view.objects.size() == 2);
    CHECK(view.objects[0].disclosed_count() == 2);
    CHECK(view.objects[1].disclosed_count() == 1);

    for (const auto& obj : graph.objects) {
        const ViewObject* vo = nullptr;
        for (const auto& v : view.objects) {
            if (v.object_id == obj.object_id) vo = &v;
        }
        REQUIRE(vo != nullptr);
        for (const FieldId& f : object_field_ids(obj)) {
            bool disclosed = ledger.field_disclosed(obj.budget_key(), f);
            bool in_view = false;
            switch (f.key) {
                case FieldKey::kind: in_view = vo->kind.has_value(); break;
                case FieldKey::semantic_class: in_view = vo->semantic_class.has_value(); break;
                case FieldKey::sensitivity: in_view = vo->sensitivity.has_value(); break;
                case FieldKey::freshness: in_view = vo->freshness.has_value(); break;
                case FieldKey::size_bucket: in_view = vo->size_bucket.has_value(); break;
                case FieldKey::confidence: in_view = vo->confidence.has_value(); break;
                case FieldKey::contains_tag:
                    in_view = std::find(vo->contains.begin(), vo->contains.end(), f.qualifier) !=
                              vo->contains.end();
                    break;
                case FieldKey::usable_for_tag:
                    in_view = std::find(vo->usable_for.begin(), vo->usable_for.end(), f.qualifier) !=
                              vo->usable_for.end();
                    break;
                case FieldKey::edge: continue;
            }
            CHECK(in_view == disclosed);
        }
    }
}

TEST_CASE("restrict_view: edges appear only when charged on both endpoints") {
    TwinGraph graph;
    graph.session_id = "session_3";
    graph.objects.push_back(make_object("artifact_00"));
    graph.objects.push_back(make_object("artifact_01"));
    graph.edges.push_back({"artifact_00", "artifact_01", "depends_on"});
    BudgetLedger ledger(WeightProfile::paper_default());
    for (const auto& obj : graph.objects) {
        ledger.register_object(obj);
        ledger.charge(obj.budget_key(), {FieldId::scalar(FieldKey::kind)});
    }
    CHECK(restrict_view(graph, ledger).edges.empty());
    FieldId eid = FieldId::edge_ref(edge_key("artifact_00", "artifact_01", "depends_on"));
    ledger.charge("artifact_00", {eid});
    CHECK(restrict_view(graph, ledger).edges.empty());  // one endpoint is not enough
    ledger.charge("artifact_01", {eid});
    CHECK(restrict_view(graph, ledger).edges.size() == 1);
}

TEST_CASE("serialize_view: canonical document matches the schema example") {
    ViewObject vo;
    vo.object_id = "artifact_17";
    vo.kind = "document";
    vo.semantic_class = "requirements_spec";
    vo.sensitivity = "restricted";
    vo.freshness = "recent";
    vo.size_bucket = "medium";
    vo.contains = {"tables", "dates", "constraints"};
    vo.usable_for = {"compare", "extract_constraints"};
    vo.confidence = 0.86;
    PlannerView view;
    view.session_id = "session_1";
    view.objects.push_back(vo);

    std::string doc = serialize_view(view);
    auto parsed = nlohmann::json::parse(doc);
    REQUIRE(parsed.at("objects").size() == 1);
    const auto& o = parsed.at("objects")[0];
    CHECK(o.at("object_id") == "artifact_17");
    CHECK(o.at("kind") == "document");
    CHECK(o.at("semantic_class") == "requirements_spec");
    CHECK(o.at("sensitivity") == "restricted");
    CHECK(o.at("freshness") == "recent");
    CHECK(o.at("size_bucket") == "medium");
    CHECK(o.at("confidence") == doctest::Approx(0.86));
    CHECK(o.at("contains") == nlohmann::json({"constraints", "dates", "tables"}));
    CHECK(o.at("usable_for") == nlohmann::json({"compare", "extract_constraints"}));
    // No whitespace, sorted keys.
    CHECK(doc.find(": ") == std::string::npos);
    CHECK(doc.find("\"edges\"") < doc.find("\"objects\""));
    CHECK(doc.find("\"objects\"") < doc.find("\"session_id\""));
}

TEST_CASE("serialize_view: empty view serializes to an empty object list") {
    PlannerView view;
    view.session_id = "session_1";
    CHECK(serialize_view(view) == R"({"edges":[],"objects":[],"session_id":"session_1"})");
}

TEST_CASE("serialize_view: out-of-vocabulary token rejected") {
    PlannerView view;
    view.session_id = "session_1";
    ViewObject vo;
    vo.object_id = "artifact_00";
    vo.kind = "binary_blob";
    view.objects.push_back(vo);
    CHECK_THROWS_AS(serialize_view(view), std::invalid_argument);
}

TEST_CASE("round-trip: parse after serialize is identity on serialized bytes") {
    auto rng = make_rng(99);
    for (int i = 0; i < 200; ++i) {
        PlannerView view;
        view.session_id = "session_" + std::to_string(i);
        int n = 1 + static_cast<int>(rng() % 5);
        for (int j = 0; j < n; ++j) {
            TwinObject obj = random_object(rng, "artifact_0" + std::to_string(j));
            ViewObject vo;
            vo.object_id = obj.object_id;
            vo.kind = obj.kind;
            if (rng() % 2) vo.semantic_class = obj.semantic_class;
            if (rng() % 2) vo.sensitivity = obj.sensitivity;
            if (rng() % 2) vo.confidence = obj.confidence;
            vo.contains = obj.contains;
            view.objects.push_back(vo);
        }
        std::string doc = serialize_view(view);
        CHECK(serialize_view(parse_view(doc)) == doc);
    }
}

TEST_CASE("vocabulary closure: random well-formed graphs validate and serialize clean") {
    auto rng = make_rng(7);
    for (int i = 0; i < 10000; ++i) {
        TwinGraph graph;
        graph.session_id = "session_x";
        int n = 1 + static_cast<int>(rng() % 6);
        for (int j = 0; j < n; ++j) {
            graph.objects.push_back(random_object(rng, "artifact_" + std::to_string(j)));
        }
        if (n >= 2) {
            graph.edges.push_back(TwinEdge{
                "artifact_0", "artifact_1",
                vocab::relation_tokens()[rng() % vocab::relation_tokens().size()]});
        }
        graph.canonicalize();
        CAPTURE(i);
        REQUIRE(validate_graph(graph).ok());
        // Every serialized string token stays inside the token alphabet.
        auto doc = nlohmann::json::parse(serialize_view(full_view(graph)));
        for (const auto& o : doc.at("objects")) {
            for (auto it = o.begin(); it != o.end(); ++it) {
                if (it.value().is_string()) REQUIRE(vocab::is_vocab_alphabet(it.value()));
            }
        }
    }
}

TEST_CASE("serialization is byte-stable under input reordering") {
    auto rng = make_rng(123);
    TwinGraph graph;
    graph.session_id = "session_s";
    for (int j = 0; j < 5; ++j) graph.objects.push_back(random_object(rng, "artifact_" + std::to_string(j)));
    graph.canonicalize();
    std::string a = serialize_view(full_view(graph));

    TwinGraph shuffled = graph;
    std::reverse(shuffled.objects.begin(), shuffled.objects.end());
    shuffled.canonicalize();
    CHECK(serialize_view(full_view(shuffled)) == a);
}
