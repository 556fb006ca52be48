#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "plantwin/budget.hpp"
#include "plantwin/rng.hpp"
#include "plantwin/twin.hpp"
#include "plantwin/vocab.hpp"

using namespace plantwin;

namespace {

TwinObject object_with(const std::string& id, const std::string& sensitivity,
                       std::vector<std::string> contains = {"imports", "credentials"}) {
    TwinObject obj;
    obj.object_id = id;
    obj.kind = "code_file";
    obj.semantic_class = "authentication_module";
    obj.sensitivity = sensitivity;
    obj.freshness = "recent";
    obj.size_bucket = "small";
    obj.contains = std::move(contains);
    obj.usable_for = {"audit", "compare"};
    obj.confidence = 0.8;
    return obj;
}

}  // namespace

TEST_CASE("paper_default profile matches the shipped field costs exactly") {
    auto p = WeightProfile::paper_default();
    CHECK(p.cost(FieldId::scalar(FieldKey::kind)) == 0.5);
    CHECK(p.cost(FieldId::scalar(FieldKey::semantic_class)) == 2.0);
    CHECK(p.cost(FieldId::contains("sql")) == 1.0);
    CHECK(p.cost(FieldId::usable("audit")) == 0.5);
    CHECK(p.cost(FieldId::edge_ref("a|b|depends_on")) == 3.0);
    CHECK(p.cost(FieldId::scalar(FieldKey::freshness)) == 0.5);
    CHECK(p.cost(FieldId::scalar(FieldKey::sensitivity)) == 1.0);
    // Decided additions: size_bucket mirrors the coarse buckets, confidence
    // is pipeline state and free.
    CHECK(p.cost(FieldId::scalar(FieldKey::size_bucket)) == 0.5);
    CHECK(p.cost(FieldId::scalar(FieldKey::confidence)) == 0.0);
}

TEST_CASE("tau defaults by sensitivity") {
    CHECK(default_tau_micro("low") == 12 * kMicro);
    CHECK(default_tau_micro("restricted") == 8 * kMicro);
    CHECK(default_tau_micro("high") == 5 * kMicro);
    CHECK_THROWS(default_tau_micro("urgent"));
}

TEST_CASE("estimate_cost: fresh kind is 0.5, already-disclosed fields are free") {
    BudgetLedger ledger(WeightProfile::paper_default());
    ledger.register_object(object_with("artifact_00", "low"));
    FieldSet kind = {FieldId::scalar(FieldKey::kind)};
    CHECK(ledger.estimate_cost("artifact_00", kind) == 0.5);
    FieldSet pair = {FieldId::scalar(FieldKey::semantic_class),
                     FieldId::scalar(FieldKey::sensitivity)};
    CHECK(ledger.estimate_cost("artifact_00", pair) == 3.0);
    ledger.charge("artifact_00", kind);
    CHECK(ledger.estimate_cost("artifact_00", kind) == 0.0);
    CHECK_THROWS_AS(ledger.estimate_cost("artifact_99", kind), std::out_of_range);
}

TEST_CASE("charge: per-tag and per-edge costs") {
    BudgetLedger ledger(WeightProfile::paper_default());
    ledger.register_object(object_with("artifact_00", "low", {"sql", "tables", "dates"}));
    FieldSet tags = {FieldId::contains("sql"), FieldId::contains("tables"),
                     FieldId::contains("dates")};
    auto delta = ledger.charge("artifact_00", tags);
    REQUIRE(delta.has_value());
    CHECK(*delta == 3.0);

    FieldSet edge = {FieldId::edge_ref(edge_key("artifact_00", "artifact_01", "depends_on"))};
    auto edge_delta = ledger.charge("artifact_00", edge);
    REQUIRE(edge_delta.has_value());
    CHECK(*edge_delta == 3.0);
}

TEST_CASE("charge: overflow refuses and leaves the ledger byte-identical") {
    BudgetLedger ledger(WeightProfile::paper_default());
    ledger.register_object(object_with("artifact_00", "high"));  // cap 5.0
    ledger.charge("artifact_00", {FieldId::scalar(FieldKey::kind),
                                  FieldId::scalar(FieldKey::semantic_class)});  // 2.5
    std::string before = ledger.serialize_state();
    // 2.5 + 3.0 edge = 5.5 > 5.0
    FieldSet edge = {FieldId::edge_ref("a|b|similar_to")};
    auto refused = ledger.charge("artifact_00", edge);
    CHECK(!refused.has_value());
    CHECK(ledger.serialize_state() == before);
    CHECK(ledger.spent("artifact_00") == 2.5);
}

TEST_CASE("can_disclose: boundary behavior") {
    BudgetLedger ledger(WeightProfile::paper_default());
    ledger.register_object(object_with("artifact_00", "high"));  // tau 5.0
    // 6.5 worth of fields on a fresh object: kind + semantic + 3 contains + sensitivity
    FieldSet expensive = {FieldId::scalar(FieldKey::kind),
                          FieldId::scalar(FieldKey::semantic_class), FieldId::contains("sql"),
                          FieldId::contains("tables"), FieldId::contains("dates"),
                          FieldId::scalar(FieldKey::sensitivity)};
    CHECK(ledger.estimate_cost("artifact_00", expensive) == 6.5);
    CHECK(!ledger.can_disclose("artifact_00", expensive));

    // Exactly at cap passes; anything more fails.
    FieldSet exactly = {FieldId::scalar(FieldKey::kind), FieldId::scalar(FieldKey::semantic_class),
                        FieldId::contains("sql"), FieldId::contains("tables"),
                        FieldId::scalar(FieldKey::freshness)};  // 0.5+2+1+1+0.5 = 5.0
    CHECK(ledger.can_disclose("artifact_00", exactly));
    REQUIRE(ledger.charge("artifact_00", exactly).has_value());
    CHECK(ledger.spent("artifact_00") == 5.0);
    CHECK(!ledger.can_disclose("artifact_00", {FieldId::scalar(FieldKey::sensitivity)}));
    // Re-disclosing already-charged fields stays allowed at the cap.
    CHECK(ledger.can_disclose("artifact_00", exactly));
}

TEST_CASE("alpha scales the cap") {
    BudgetLedger ledger(WeightProfile::paper_default(), 0.25);
    ledger.register_object(object_with("artifact_00", "high"));
    CHECK(ledger.cap("artifact_00") == 1.25);
    CHECK(ledger.can_disclose("artifact_00", {FieldId::scalar(FieldKey::kind)}));
    CHECK(!ledger.can_disclose("artifact_00", {FieldId::scalar(FieldKey::semantic_class)}));
    CHECK_THROWS_AS(BudgetLedger(WeightProfile::paper_default(), 0.0), std::invalid_argument);
}

TEST_CASE("grain: mean charged cost per call") {
    CHECK(grain({2.0}) == 2.0);
    CHECK(grain({1.0, 3.0}) == 2.0);
    CHECK_THROWS_AS(grain({}), std::invalid_argument);
}

TEST_CASE("calibrated weights: ln of vocabulary sizes, rounded up") {
    auto p = calibrated_weights(VocabularySizes::builtin());
    CHECK(p.calibrated);
    double w_kind = p.cost(FieldId::scalar(FieldKey::kind));
    CHECK(w_kind == doctest::Approx(std::log(6.0)).epsilon(1e-5));
    CHECK(w_kind >= std::log(6.0));  // rounding must preserve w_f >= ln b_f
    double w_sens = p.cost(FieldId::scalar(FieldKey::sensitivity));
    CHECK(w_sens == doctest::Approx(std::log(3.0)).epsilon(1e-5));
    CHECK(w_sens >= std::log(3.0));
    double w_tag = p.cost(FieldId::contains("sql"));
    CHECK(w_tag == doctest::Approx(std::log(2.0)).epsilon(1e-5));
    CHECK(w_tag >= std::log(2.0));

    VocabularySizes single;
    single.kind = 1;
    single.semantic_class = 1;
    single.sensitivity = 1;
    single.freshness = 1;
    single.size_bucket = 1;
    auto p1 = calibrated_weights(single);
    CHECK(p1.cost(FieldId::scalar(FieldKey::kind)) == 0.0);

    VocabularySizes empty;
    CHECK_THROWS_AS(calibrated_weights(empty), std::invalid_argument);
}

TEST_CASE("property: monotone, recomputable, hard-capped, deduplicated") {
    auto rng = make_rng(2024);
    const char* sensitivities[3] = {"low", "restricted", "high"};
    for (int round = 0; round < 1000; ++round) {
        double alpha = 0.25 + static_cast<double>(rng() % 8) * 0.25;
        BudgetLedger ledger(WeightProfile::paper_default(), alpha);
        TwinObject obj = object_with("artifact_00", sensitivities[rng() % 3]);
        ledger.register_object(obj);
        std::vector<FieldId> universe;
        for (const FieldId& f : object_field_ids(obj)) universe.push_back(f);
        universe.push_back(FieldId::edge_ref("a|b|depends_on"));
        universe.push_back(FieldId::edge_ref("a|c|similar_to"));

        std::int64_t last = 0;
        for (int step = 0; step < 20; ++step) {
            FieldSet fields;
            int n = 1 + static_cast<int>(rng() % 4);
            for (int f = 0; f < n; ++f) fields.insert(universe[rng() % universe.size()]);
            ledger.charge("artifact_00", fields);
            std::int64_t spent = ledger.spent_micro("artifact_00");
            REQUIRE(spent >= last);                                     // monotone
            REQUIRE(spent <= ledger.cap_micro("artifact_00"));          // hard cap
            REQUIRE(spent == ledger.recompute_micro("artifact_00"));    // recomputable
            last = spent;
        }
        // Dedup: charging the full disclosed set again must cost zero.
        CHECK(ledger.estimate_micro("artifact_00", ledger.disclosed("artifact_00")) == 0);
    }
}
