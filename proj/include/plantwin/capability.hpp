#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plantwin/budget.hpp"
#include "plantwin/field.hpp"
#include "plantwin/twin.hpp"

namespace plantwin {

enum class Risk { low, high };

struct Capability {
    std::string name;
    std::set<std::string> input_kinds;      // kind tokens this capability accepts
    std::set<FieldKey> required_fields;     // disclosed on invocation
    std::string output_schema;
    Risk risk = Risk::low;
    bool nullary = false;

    bool accepts_kind(const std::string& kind_token) const { return input_kinds.count(kind_token) > 0; }
};

// Immutable after load; plan validation is pure.
class Catalog {
public:
    // The ten capabilities at the orchestration boundary. security_audit and
    // scan_credentials are high-risk and default to human approval.
    static Catalog default_catalog();
    static Catalog from_config(const std::string& json_text);

    const std::vector<Capability>& capabilities() const { return capabilities_; }
    const Capability* find(const std::string& name) const;
    // Allowlist(kind) = { c : kind in c.input_kinds }.
    std::vector<std::string> allowlist(const std::string& kind_token) const;

    nlohmann::json summary() const;  // planner-visible catalog description

private:
    std::vector<Capability> capabilities_;
};

// Required fields expanded against one object's actual inventory: set-valued
// requirements charge every tag the object carries.
FieldSet expand_required_fields(const Capability& cap, const std::string& kind_token,
                                const FieldSet& potential_fields);
FieldSet expand_required_fields(const Capability& cap, const TwinObject& obj);

struct PlanStep {
    std::string id;
    std::string capability;
    std::vector<std::string> inputs;        // object ids
    std::string expected_output;            // schema token
    std::string policy = "none";            // none | human_approval
    std::vector<std::string> after;         // step dependencies
};

struct Plan {
    std::vector<PlanStep> steps;

    nlohmann::json to_json() const;
    std::string to_document() const;
    static Plan from_json(const nlohmann::json& doc);  // throws std::invalid_argument
};

enum class StepVerdictCode {
    ok,
    unknown_capability,
    kind_not_allowed,
    unknown_object,
    cycle,
};

const char* step_verdict_name(StepVerdictCode v);

struct StepVerdict {
    std::string step_id;
    StepVerdictCode code = StepVerdictCode::ok;
    std::string detail;
};

struct PlanValidation {
    std::vector<StepVerdict> verdicts;  // one per step, in plan order
    bool all_ok() const;
};

// Pure structural validation: catalog membership, kind allowlists, object
// existence, dependency cycles.
PlanValidation validate_plan(const Plan& plan, const Catalog& catalog, const TwinGraph& graph);

// Structural guardrail: every leaf of an output payload must be a boolean,
// a bucket/vocabulary token, an object id, or sanitized text. Returns false
// if the payload deviates from the named schema.
bool check_output_schema(const std::string& schema, const nlohmann::json& payload);

// All schema names known to the default catalog.
const std::vector<std::string>& known_output_schemas();

// True when further disclosure is wanted but blocked: at least one
// applicable capability still has undisclosed fields for this object, yet
// none of those charges fits the remaining budget. The leftover headroom is
// unusable and the object can never again yield new disclosure.
bool object_depleted(const BudgetLedger& ledger, const Catalog& catalog, const std::string& key);

}  // namespace plantwin
