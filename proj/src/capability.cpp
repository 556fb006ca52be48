#include "plantwin/capability.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "plantwin/vocab.hpp"

namespace plantwin {

namespace {

const std::set<std::string>& all_kinds() {
    static const std::set<std::string> s(vocab::kind_tokens().begin(), vocab::kind_tokens().end());
    return s;
}

std::optional<FieldKey> field_key_from_name(const std::string& name) {
    static const std::map<std::string, FieldKey> table = {
        {"kind", FieldKey::kind},
        {"semantic_class", FieldKey::semantic_class},
        {"sensitivity", FieldKey::sensitivity},
        {"freshness", FieldKey::freshness},
        {"size_bucket", FieldKey::size_bucket},
        {"confidence", FieldKey::confidence},
        {"contains", FieldKey::contains_tag},
        {"usable_for", FieldKey::usable_for_tag},
    };
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

}  // namespace

Catalog Catalog::default_catalog() {
    Catalog c;
    auto add = [&](std::string name, std::set<std::string> kinds, std::set<FieldKey> fields,
                   std::string schema, Risk risk) {
        Capability cap;
        cap.name = std::move(name);
        cap.input_kinds = std::move(kinds);
        cap.required_fields = std::move(fields);
        cap.output_schema = std::move(schema);
        cap.risk = risk;
        c.capabilities_.push_back(std::move(cap));
    };
    add("extract_constraints", {"document", "structured_record", "config"},
        {FieldKey::semantic_class, FieldKey::contains_tag}, "constraint_list", Risk::low);
    add("compare", {"code_file", "document", "structured_record", "config", "log_stream"},
        {FieldKey::kind, FieldKey::semantic_class}, "comparison_summary", Risk::low);
    add("classify_issues", {"log_stream", "document", "structured_record"},
        {FieldKey::semantic_class, FieldKey::contains_tag}, "issue_classes", Risk::low);
    add("security_audit", {"code_file", "config", "secret_container"},
        {FieldKey::semantic_class, FieldKey::contains_tag, FieldKey::sensitivity}, "audit_findings",
        Risk::high);
    add("summarize", all_kinds(), {FieldKey::semantic_class}, "summary", Risk::low);
    add("diff_objects", {"code_file", "document", "config", "structured_record"},
        {FieldKey::kind, FieldKey::semantic_class}, "diff_summary", Risk::low);
    add("validate_schema", {"structured_record", "config"},
        {FieldKey::semantic_class, FieldKey::contains_tag}, "validation_report", Risk::low);
    add("scan_credentials", {"code_file", "config", "secret_container", "log_stream"},
        {FieldKey::contains_tag, FieldKey::sensitivity}, "credential_report", Risk::high);
    add("list_dependencies", {"code_file", "config"},
        {FieldKey::semantic_class, FieldKey::contains_tag}, "dependency_list", Risk::low);
    add("propose_fix_outline", {"code_file", "log_stream", "document"},
        {FieldKey::semantic_class, FieldKey::contains_tag}, "fix_outline", Risk::low);
    return c;
}

Catalog Catalog::from_config(const std::string& json_text) {
    nlohmann::json doc = nlohmann::json::parse(json_text);
    Catalog c;
    for (const auto& entry : doc) {
        Capability cap;
        cap.name = entry.at("name").get<std::string>();
        for (const auto& k : entry.at("input_kinds")) {
            std::string token = k.get<std::string>();
            if (!vocab::kind_from_token(token))
                throw std::invalid_argument("catalog config: unknown kind " + token);
            cap.input_kinds.insert(token);
        }
        for (const auto& f : entry.at("required_fields")) {
            auto key = field_key_from_name(f.get<std::string>());
            if (!key) throw std::invalid_argument("catalog config: unknown field " + f.get<std::string>());
            cap.required_fields.insert(*key);
        }
        cap.output_schema = entry.at("output_schema").get<std::string>();
        cap.risk = entry.value("risk", "low") == "high" ? Risk::high : Risk::low;
        cap.nullary = entry.value("nullary", false);
        c.capabilities_.push_back(std::move(cap));
    }
    return c;
}

const Capability* Catalog::find(const std::string& name) const {
    for (const auto& cap : capabilities_) {
        if (cap.name == name) return &cap;
    }
    return nullptr;
}

std::vector<std::string> Catalog::allowlist(const std::string& kind_token) const {
    std::vector<std::string> names;
    for (const auto& cap : capabilities_) {
        if (cap.accepts_kind(kind_token)) names.push_back(cap.name);
    }
    return names;
}

nlohmann::json Catalog::summary() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& cap : capabilities_) {
        nlohmann::json e;
        e["name"] = cap.name;
        e["input_kinds"] = std::vector<std::string>(cap.input_kinds.begin(), cap.input_kinds.end());
        e["output_schema"] = cap.output_schema;
        e["risk"] = cap.risk == Risk::high ? "high" : "low";
        arr.push_back(e);
    }
    return arr;
}

FieldSet expand_required_fields(const Capability& cap, const std::string& /*kind_token*/,
                                const FieldSet& potential_fields) {
    FieldSet out;
    for (FieldKey key : cap.required_fields) {
        if (key == FieldKey::contains_tag || key == FieldKey::usable_for_tag) {
            for (const FieldId& f : potential_fields) {
                if (f.key == key) out.insert(f);
            }
        } else {
            out.insert(FieldId::scalar(key));
        }
    }
    return out;
}

FieldSet expand_required_fields(const Capability& cap, const TwinObject& obj) {
    return expand_required_fields(cap, obj.kind, object_field_ids(obj));
}

nlohmann::json Plan::to_json() const {
    nlohmann::json doc;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : steps) {
        nlohmann::json e;
        e["id"] = s.id;
        e["capability"] = s.capability;
        e["inputs"] = s.inputs;
        e["expected_output"] = s.expected_output;
        e["policy"] = s.policy;
        if (!s.after.empty()) e["after"] = s.after;
        arr.push_back(e);
    }
    doc["steps"] = arr;
    return doc;
}

std::string Plan::to_document() const { return to_json().dump(); }

Plan Plan::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("steps") || !doc.at("steps").is_array())
        throw std::invalid_argument("not a plan document");
    Plan plan;
    std::set<std::string> seen;
    int counter = 0;
    for (const auto& e : doc.at("steps")) {
        if (!e.is_object() || !e.contains("capability"))
            throw std::invalid_argument("plan step missing capability");
        PlanStep step;
        step.capability = e.at("capability").get<std::string>();
        step.id = e.value("id", "");
        ++counter;
        if (step.id.empty()) step.id = "s" + std::to_string(counter);
        while (seen.count(step.id)) step.id += "_x";  // normalize duplicates
        seen.insert(step.id);
        if (e.contains("inputs")) {
            if (!e.at("inputs").is_array()) throw std::invalid_argument("plan step inputs not a list");
            for (const auto& in : e.at("inputs")) step.inputs.push_back(in.get<std::string>());
        }
        step.expected_output = e.value("expected_output", "");
        step.policy = e.value("policy", "none");
        if (step.policy != "none" && step.policy != "human_approval")
            throw std::invalid_argument("plan step policy must be none|human_approval");
        if (e.contains("after")) {
            for (const auto& a : e.at("after")) step.after.push_back(a.get<std::string>());
        }
        plan.steps.push_back(std::move(step));
    }
    return plan;
}

const char* step_verdict_name(StepVerdictCode v) {
    switch (v) {
        case StepVerdictCode::ok: return "ok";
        case StepVerdictCode::unknown_capability: return "unknown_capability";
        case StepVerdictCode::kind_not_allowed: return "kind_not_allowed";
        case StepVerdictCode::unknown_object: return "unknown_object";
        case StepVerdictCode::cycle: return "cycle";
    }
    return "unknown";
}

bool PlanValidation::all_ok() const {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [](const StepVerdict& v) { return v.code == StepVerdictCode::ok; });
}

PlanValidation validate_plan(const Plan& plan, const Catalog& catalog, const TwinGraph& graph) {
    PlanValidation result;

    // Kahn elimination over the dependency graph; anything left over sits on
    // a cycle or a dangling reference.
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) index.emplace(plan.steps[i].id, i);
    std::vector<int> pending(plan.steps.size(), 0);
    std::vector<std::vector<std::size_t>> dependents(plan.steps.size());
    std::vector<bool> bad_dep(plan.steps.size(), false);
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        for (const auto& dep : plan.steps[i].after) {
            auto it = index.find(dep);
            if (it == index.end() || it->second == i) {
                bad_dep[i] = true;
            } else {
                ++pending[i];
                dependents[it->second].push_back(i);
            }
        }
    }
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        if (pending[i] == 0) queue.push_back(i);
    }
    std::vector<bool> resolved(plan.steps.size(), false);
    while (!queue.empty()) {
        std::size_t i = queue.back();
        queue.pop_back();
        resolved[i] = true;
        for (std::size_t d : dependents[i]) {
            if (--pending[d] == 0) queue.push_back(d);
        }
    }

    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const PlanStep& step = plan.steps[i];
        StepVerdict verdict;
        verdict.step_id = step.id;
        const Capability* cap = catalog.find(step.capability);
        if (!cap) {
            verdict.code = StepVerdictCode::unknown_capability;
            verdict.detail = step.capability;
        } else if (step.inputs.empty() && !cap->nullary) {
            verdict.code = StepVerdictCode::unknown_object;
            verdict.detail = "step has no inputs";
        } else {
            for (const auto& input : step.inputs) {
                const TwinObject* obj = graph.find(input);
                if (!obj) {
                    verdict.code = StepVerdictCode::unknown_object;
                    verdict.detail = input;
                    break;
                }
                if (!cap->accepts_kind(obj->kind)) {
                    verdict.code = StepVerdictCode::kind_not_allowed;
                    verdict.detail = step.capability + " on " + obj->kind;
                    break;
                }
            }
        }
        if (verdict.code == StepVerdictCode::ok && (bad_dep[i] || !resolved[i])) {
            verdict.code = StepVerdictCode::cycle;
            verdict.detail = bad_dep[i] ? "unknown dependency" : "dependency cycle";
        }
        result.verdicts.push_back(std::move(verdict));
    }
    return result;
}

namespace {

bool is_object_id_token(const std::string& s) {
    return vocab::is_vocab_alphabet(s);
}

bool token_in(const std::string& s, const std::vector<std::string>& allowed) {
    return std::find(allowed.begin(), allowed.end(), s) != allowed.end();
}

bool valid_count_bucket(const nlohmann::json& v) {
    return v.is_string() && token_in(v.get<std::string>(), vocab::count_bucket_tokens());
}

const std::vector<std::string>& severity_tokens() {
    static const std::vector<std::string> v = {"low", "medium", "high"};
    return v;
}

const std::vector<std::string>& issue_labels() {
    static const std::vector<std::string> v = {"error",       "warning", "timeout", "security",
                                               "performance", "config",  "other"};
    return v;
}

const std::vector<std::string>& constraint_categories() {
    static const std::vector<std::string> v = {"deadline", "dependency", "compliance",
                                               "quantity", "format",     "other"};
    return v;
}

const std::vector<std::string>& violation_rules() {
    static const std::vector<std::string> v = {"missing_field", "type_mismatch", "bad_token",
                                               "duplicate",     "other"};
    return v;
}

bool check_entry_list(const nlohmann::json& arr, const char* token_field,
                      const std::vector<std::string>& allowed) {
    if (!arr.is_array()) return false;
    for (const auto& e : arr) {
        if (!e.is_object() || !e.contains(token_field) || !e.contains("count")) return false;
        if (!e.at(token_field).is_string() ||
            !token_in(e.at(token_field).get<std::string>(), allowed))
            return false;
        if (!valid_count_bucket(e.at("count"))) return false;
    }
    return true;
}

}  // namespace

const std::vector<std::string>& known_output_schemas() {
    static const std::vector<std::string> v = {
        "constraint_list", "comparison_summary", "issue_classes",     "audit_findings",
        "summary",         "diff_summary",       "validation_report", "credential_report",
        "dependency_list", "fix_outline",
    };
    return v;
}

bool check_output_schema(const std::string& schema, const nlohmann::json& payload) {
    if (!payload.is_object()) return false;
    if (!payload.contains("summary_text") || !payload.at("summary_text").is_string()) return false;

    if (schema == "summary") return true;
    if (schema == "constraint_list") {
        return payload.contains("constraints") &&
               check_entry_list(payload.at("constraints"), "category", constraint_categories());
    }
    if (schema == "comparison_summary") {
        if (!payload.contains("similarity") || !payload.at("similarity").is_string()) return false;
        if (!token_in(payload.at("similarity").get<std::string>(), severity_tokens())) return false;
        if (!payload.contains("shared_tags") || !payload.at("shared_tags").is_array()) return false;
        for (const auto& t : payload.at("shared_tags")) {
            if (!t.is_string() || !vocab::is_contains_tag(t.get<std::string>())) return false;
        }
        return true;
    }
    if (schema == "issue_classes") {
        return payload.contains("classes") &&
               check_entry_list(payload.at("classes"), "label", issue_labels());
    }
    if (schema == "audit_findings") {
        if (!payload.contains("findings") || !payload.at("findings").is_array()) return false;
        for (const auto& f : payload.at("findings")) {
            if (!f.is_object() || !f.contains("category") || !f.contains("severity") ||
                !f.contains("count"))
                return false;
            if (!f.at("category").is_string() ||
                !vocab::is_vocab_alphabet(f.at("category").get<std::string>()))
                return false;
            if (!f.at("severity").is_string() ||
                !token_in(f.at("severity").get<std::string>(), severity_tokens()))
                return false;
            if (!valid_count_bucket(f.at("count"))) return false;
        }
        return true;
    }
    if (schema == "diff_summary") {
        return payload.contains("changed") && payload.at("changed").is_boolean() &&
               payload.contains("magnitude") && payload.at("magnitude").is_string() &&
               token_in(payload.at("magnitude").get<std::string>(), vocab::size_bucket_tokens());
    }
    if (schema == "validation_report") {
        return payload.contains("valid") && payload.at("valid").is_boolean() &&
               payload.contains("violations") &&
               check_entry_list(payload.at("violations"), "rule", violation_rules());
    }
    if (schema == "credential_report") {
        if (!payload.contains("found") || !payload.at("found").is_boolean()) return false;
        if (!payload.contains("categories") || !payload.at("categories").is_array()) return false;
        for (const auto& c : payload.at("categories")) {
            if (!c.is_string() || !vocab::is_vocab_alphabet(c.get<std::string>())) return false;
        }
        return payload.contains("count") && valid_count_bucket(payload.at("count"));
    }
    if (schema == "dependency_list") {
        if (!payload.contains("dependencies") || !payload.at("dependencies").is_array()) return false;
        for (const auto& d : payload.at("dependencies")) {
            if (!d.is_string() || !is_object_id_token(d.get<std::string>())) return false;
        }
        return payload.contains("count") && valid_count_bucket(payload.at("count"));
    }
    if (schema == "fix_outline") {
        if (!payload.contains("steps") || !payload.at("steps").is_array()) return false;
        for (const auto& s : payload.at("steps")) {
            if (!s.is_string()) return false;
        }
        return true;
    }
    return false;
}

bool object_depleted(const BudgetLedger& ledger, const Catalog& catalog, const std::string& key) {
    const std::string& kind = ledger.kind_of(key);
    const FieldSet& potential = ledger.potential_fields(key);
    std::int64_t headroom = ledger.headroom_micro(key);
    bool blocked = false;
    for (const auto& cap : catalog.capabilities()) {
        if (!cap.accepts_kind(kind)) continue;
        FieldSet fields = expand_required_fields(cap, kind, potential);
        std::int64_t est = ledger.estimate_micro(key, fields);
        if (est > 0) {
            if (est <= headroom) return false;  // some disclosure still affordable
            blocked = true;
        }
    }
    // An object whose kind was never affordable is blocked by definition.
    if (!ledger.field_disclosed(key, FieldId::scalar(FieldKey::kind)) &&
        ledger.estimate_micro(key, {FieldId::scalar(FieldKey::kind)}) > headroom) {
        blocked = true;
    }
    return blocked;
}

}  // namespace plantwin
