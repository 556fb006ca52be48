#include "plantwin/planner.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include <httplib.h>

#include "plantwin/vocab.hpp"

namespace plantwin {

namespace {

std::set<std::string> request_tokens(const std::string& text) {
    std::set<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            tokens.insert(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.insert(cur);
    return tokens;
}

struct KeywordRule {
    const char* capability;
    std::vector<const char*> keywords;
};

const std::vector<KeywordRule>& keyword_rules() {
    static const std::vector<KeywordRule> rules = {
        {"extract_constraints", {"constraint", "constraints", "requirement", "requirements"}},
        {"compare", {"compare", "comparison", "versus", "contrast"}},
        {"classify_issues", {"classify", "triage", "categorize", "categorise", "group", "label"}},
        {"security_audit",
         {"audit", "security", "vulnerability", "vulnerabilities", "insecure", "harden", "exploit",
          "cve"}},
        {"summarize", {"summarize", "summarise", "summary", "overview", "digest", "brief"}},
        {"diff_objects", {"diff", "difference", "differences", "changed", "delta"}},
        {"validate_schema", {"validate", "validation", "schema", "conform", "conformance"}},
        {"scan_credentials",
         {"credential", "credentials", "secret", "secrets", "token", "tokens", "password",
          "passwords", "leak", "leaked", "key", "keys"}},
        {"list_dependencies", {"dependency", "dependencies", "imports", "depends", "transitive"}},
        {"propose_fix_outline",
         {"fix", "patch", "remediate", "remediation", "resolve", "mitigation", "outline"}},
    };
    return rules;
}

const std::map<std::string, std::vector<const char*>>& kind_hints() {
    static const std::map<std::string, std::vector<const char*>> hints = {
        {"code_file", {"module", "code", "function", "service", "script"}},
        {"log_stream", {"log", "logs", "trace", "traces"}},
        {"config", {"config", "configuration", "deployment", "settings", "manifest"}},
        {"document", {"document", "doc", "spec", "documentation", "notes", "readme"}},
        {"secret_container", {"env", "vault"}},
        {"structured_record", {"record", "records", "dataset", "csv", "data", "table"}},
    };
    return hints;
}

std::vector<std::string> semantic_words(const std::string& semantic_class) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : semantic_class) {
        if (c == '_') {
            if (cur.size() >= 4) words.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (cur.size() >= 4) words.push_back(cur);
    return words;
}

struct RankedObject {
    const ViewObject* obj;
    int semantic_rank;  // 0 when the request mentions the class
    double confidence;
};

std::vector<RankedObject> rank_objects(const PlannerView& view, const std::set<std::string>& tokens) {
    std::vector<RankedObject> ranked;
    for (const auto& obj : view.objects) {
        RankedObject r;
        r.obj = &obj;
        r.semantic_rank = 1;
        if (obj.semantic_class) {
            for (const auto& w : semantic_words(*obj.semantic_class)) {
                if (tokens.count(w)) {
                    r.semantic_rank = 0;
                    break;
                }
            }
        }
        r.confidence = obj.confidence.value_or(0.5);
        ranked.push_back(r);
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedObject& a, const RankedObject& b) {
        if (a.semantic_rank != b.semantic_rank) return a.semantic_rank < b.semantic_rank;
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return a.obj->object_id < b.obj->object_id;
    });
    return ranked;
}

constexpr int kUnaryFanout = 4;

}  // namespace

std::string PlannerRequest::to_document() const {
    nlohmann::json doc;
    doc["skill_prompt"] = skill_prompt;
    doc["twin"] = nlohmann::json::parse(view_document);
    doc["catalog"] = catalog_summary;
    doc["request"] = request_text;
    return doc.dump();
}

std::string build_skill_prompt(const Catalog& catalog) {
    std::ostringstream out;
    out << "You are a planner operating on a sanitized twin of a private workspace.\n"
        << "Objects carry only bounded fields; raw files, paths and free text are never shown.\n"
        << "Object fields:\n";
    auto list = [&](const char* name, const std::vector<std::string>& tokens) {
        out << "  " << name << ": ";
        for (std::size_t i = 0; i < tokens.size(); ++i) out << (i ? ", " : "") << tokens[i];
        out << "\n";
    };
    list("kind", vocab::kind_tokens());
    list("semantic_class", vocab::semantic_classes());
    list("sensitivity", vocab::sensitivity_tokens());
    list("freshness", vocab::freshness_tokens());
    list("size_bucket", vocab::size_bucket_tokens());
    list("contains", vocab::contains_tags());
    list("usable_for", vocab::usable_for_tags());
    out << "Edges: src/dst object ids with relation in ";
    for (std::size_t i = 0; i < vocab::relation_tokens().size(); ++i)
        out << (i ? ", " : "") << vocab::relation_tokens()[i];
    out << ".\n"
        << "Reply with exactly one JSON plan document:\n"
        << R"({"steps": [{"id": str, "capability": str, "inputs": [object_id], )"
        << R"("expected_output": str, "policy": "none"|"human_approval", "after": [step_id]}]})"
        << "\n"
        << "Reference objects only by object_id. Capabilities:\n";
    for (const auto& cap : catalog.capabilities()) {
        out << "  " << cap.name << "(";
        bool first = true;
        for (const auto& k : cap.input_kinds) {
            out << (first ? "" : "|") << k;
            first = false;
        }
        out << ") -> " << cap.output_schema << (cap.risk == Risk::high ? " [high risk]" : "") << "\n";
    }
    return out.str();
}

Plan heuristic_plan(const PlannerView& view, const Catalog& catalog, const std::string& request_text) {
    Plan plan;
    if (view.objects.empty()) return plan;

    const std::set<std::string> tokens = request_tokens(request_text);

    std::set<std::string> hinted_kinds;
    for (const auto& [kind, words] : kind_hints()) {
        for (const char* w : words) {
            if (tokens.count(w)) {
                hinted_kinds.insert(kind);
                break;
            }
        }
    }

    std::vector<RankedObject> ranked = rank_objects(view, tokens);

    int counter = 0;
    auto next_id = [&]() { return "s" + std::to_string(++counter); };
    std::set<std::string> emitted_caps;

    // Evidence-gathering (unary) steps first, then pairwise synthesis steps;
    // catalog order breaks ties within each group.
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& cap : catalog.capabilities()) {
            bool pairwise = cap.name == "compare" || cap.name == "diff_objects";
            if (pairwise != (pass == 1)) continue;
            bool matched = false;
            for (const auto& rule : keyword_rules()) {
                if (cap.name != rule.capability) continue;
                for (const char* kw : rule.keywords) {
                    if (tokens.count(kw)) {
                        matched = true;
                        break;
                    }
                }
            }
            if (!matched) continue;

            auto eligible_with = [&](bool use_hints) {
                std::vector<const ViewObject*> out;
                for (const auto& r : ranked) {
                    if (!r.obj->kind) continue;
                    if (!cap.accepts_kind(*r.obj->kind)) continue;
                    if (use_hints && !hinted_kinds.empty() && !hinted_kinds.count(*r.obj->kind))
                        continue;
                    out.push_back(r.obj);
                }
                return out;
            };
            std::vector<const ViewObject*> eligible = eligible_with(true);
            if (eligible.empty()) eligible = eligible_with(false);
            if (eligible.empty()) continue;

            if (pairwise) {
                if (eligible.size() < 2) continue;
                PlanStep step;
                step.id = next_id();
                step.capability = cap.name;
                step.inputs = {eligible[0]->object_id, eligible[1]->object_id};
                step.expected_output = cap.output_schema;
                step.policy = cap.risk == Risk::high ? "human_approval" : "none";
                plan.steps.push_back(std::move(step));
            } else {
                int fanout = 0;
                for (const ViewObject* obj : eligible) {
                    if (++fanout > kUnaryFanout) break;
                    PlanStep step;
                    step.id = next_id();
                    step.capability = cap.name;
                    step.inputs = {obj->object_id};
                    step.expected_output = cap.output_schema;
                    step.policy = cap.risk == Risk::high ? "human_approval" : "none";
                    plan.steps.push_back(std::move(step));
                }
            }
            emitted_caps.insert(cap.name);
        }
    }

    const Capability* summarize = catalog.find("summarize");
    if (summarize) {
        if (plan.steps.empty()) {
            // Fallback: summarize the highest-confidence object.
            const ViewObject* best = nullptr;
            for (const auto& r : ranked) {
                if (!r.obj->kind || !summarize->accepts_kind(*r.obj->kind)) continue;
                if (!best) best = r.obj;
                double bc = best->confidence.value_or(0.5);
                double rc = r.obj->confidence.value_or(0.5);
                if (rc > bc || (rc == bc && r.obj->object_id < best->object_id)) best = r.obj;
            }
            if (best) {
                PlanStep step;
                step.id = next_id();
                step.capability = "summarize";
                step.inputs = {best->object_id};
                step.expected_output = summarize->output_schema;
                plan.steps.push_back(std::move(step));
            }
        } else if (plan.steps.size() >= 2 && !emitted_caps.count("summarize")) {
            // Close multi-step plans with an aggregate summary.
            PlanStep step;
            step.id = next_id();
            step.capability = "summarize";
            step.inputs = {plan.steps.front().inputs.front()};
            step.expected_output = summarize->output_schema;
            for (const auto& prior : plan.steps) step.after.push_back(prior.id);
            plan.steps.push_back(std::move(step));
        }
    }
    return plan;
}

std::optional<Plan> parse_plan(const std::string& document) {
    auto try_parse = [](const std::string& text) -> std::optional<Plan> {
        try {
            nlohmann::json doc = nlohmann::json::parse(text);
            if (!doc.is_object() || !doc.contains("steps")) return std::nullopt;
            return Plan::from_json(doc);
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    if (auto plan = try_parse(document)) return plan;

    // Extract the first balanced JSON object that parses as a plan.
    for (std::size_t start = 0; start < document.size(); ++start) {
        if (document[start] != '{') continue;
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < document.size(); ++i) {
            char c = document[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}') {
                if (--depth == 0) {
                    if (auto plan = try_parse(document.substr(start, i - start + 1))) return plan;
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<Plan> HeuristicPlanner::plan(const PlannerRequest& request) {
    PlannerView view = parse_view(request.view_document);
    return heuristic_plan(view, catalog_, request.request_text);
}

RemotePlanner::RemotePlanner(std::string endpoint, std::string api_key, std::chrono::seconds timeout,
                             std::size_t response_cap_bytes)
    : endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      timeout_(timeout),
      response_cap_(response_cap_bytes) {}

std::optional<Plan> RemotePlanner::plan(const PlannerRequest& request) {
    // endpoint: scheme://host[:port][/path]
    auto scheme_end = endpoint_.find("://");
    if (scheme_end == std::string::npos) return std::nullopt;
    auto path_start = endpoint_.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? endpoint_ : endpoint_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/plan" : endpoint_.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(timeout_.count(), 0);
    client.set_read_timeout(timeout_.count(), 0);
    client.set_write_timeout(timeout_.count(), 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto response = client.Post(path, headers, request.to_document(), "application/json");
    if (!response || response->status != 200) return std::nullopt;
    if (response->body.size() > response_cap_) return std::nullopt;
    return parse_plan(response->body);
}

}  // namespace plantwin
