#include "plantwin/executor.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <stdexcept>

namespace plantwin {

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

const std::string& bucket_token(std::size_t n) { return vocab::to_token(count_bucket_of(n)); }

std::set<std::string> tokenize(const std::string& text) {
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

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& t : a) inter += b.count(t);
    std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

int count_matches(const std::string& text, const char* pattern) {
    std::regex re(pattern, std::regex::ECMAScript | std::regex::icase);
    auto begin = std::sregex_iterator(text.begin(), text.end(), re);
    return static_cast<int>(std::distance(begin, std::sregex_iterator()));
}

std::vector<std::string> shared_contains(const TwinObject& a, const TwinObject& b) {
    std::vector<std::string> shared;
    for (const auto& t : a.contains) {
        if (std::find(b.contains.begin(), b.contains.end(), t) != b.contains.end())
            shared.push_back(t);
    }
    std::sort(shared.begin(), shared.end());
    return shared;
}

}  // namespace

const TwinObject* ExecutionContext::twin_of(const std::string& object_id) const {
    return graph ? graph->find(object_id) : nullptr;
}

const RawArtifact* ExecutionContext::raw_of(const std::string& object_id) const {
    auto it = artifact_by_object_id.find(object_id);
    return it == artifact_by_object_id.end() ? nullptr : it->second;
}

ExecutionContext build_execution_context(const std::vector<RawArtifact>& env, const TwinGraph& graph,
                                         const RedactionRuleSet& rules) {
    ExecutionContext ctx;
    ctx.graph = &graph;
    ctx.rules = &rules;
    std::map<std::string, const RawArtifact*> by_path;
    for (const auto& artifact : env) by_path.emplace(artifact.path, &artifact);
    for (const auto& obj : graph.objects) {
        auto it = by_path.find(obj.source_path);
        if (it != by_path.end()) {
            ctx.artifact_by_object_id[obj.object_id] = it->second;
            ctx.path_to_object_id[it->second->path] = obj.object_id;
        }
    }
    return ctx;
}

ExecutionResult BuiltinExecutor::execute(const Capability& cap, const std::vector<std::string>& inputs,
                                         const ExecutionContext& ctx) const {
    ExecutionResult result;
    result.capability = cap.name;
    result.output_schema = cap.output_schema;

    std::vector<const TwinObject*> twins;
    std::vector<const RawArtifact*> raws;
    for (const auto& id : inputs) {
        const TwinObject* t = ctx.twin_of(id);
        const RawArtifact* r = ctx.raw_of(id);
        if (!t || !r) throw std::runtime_error("executor: unresolved input " + id);
        twins.push_back(t);
        raws.push_back(r);
    }
    if (twins.empty()) throw std::runtime_error("executor: no inputs");

    const TwinObject& first = *twins[0];
    const RawArtifact& raw = *raws[0];
    const std::string content = raw.bytes;
    const std::string lowered = lowercase(content);
    nlohmann::json payload = nlohmann::json::object();

    if (cap.name == "summarize") {
        std::string tags;
        for (const auto& t : first.contains) tags += (tags.empty() ? "" : ", ") + t;
        payload["summary_text"] = first.object_id + " is a " + first.size_bucket + " " + first.kind +
                                  " classified as " + first.semantic_class +
                                  (tags.empty() ? std::string("") : "; content signals: " + tags) +
                                  "; freshness " + first.freshness + ".";
    } else if (cap.name == "security_audit") {
        auto red = redact(content, *ctx.rules);
        std::map<std::string, int> by_category;
        for (const auto& e : red.entities) by_category[entity_category_name(e.category)] += 1;
        static const std::set<std::string> high_cats = {"api_key", "token", "private_key",
                                                        "connection_string"};
        nlohmann::json findings = nlohmann::json::array();
        for (const auto& [category, count] : by_category) {
            nlohmann::json f;
            f["category"] = category;
            f["severity"] = high_cats.count(category) ? "high" : "medium";
            f["count"] = bucket_token(count);
            findings.push_back(f);
        }
        int weak = count_matches(content, R"((eval\(|exec\(|verify=false|\bmd5\b|http://))");
        if (weak > 0) {
            nlohmann::json f;
            f["category"] = "weak_pattern";
            f["severity"] = "medium";
            f["count"] = bucket_token(weak);
            findings.push_back(f);
        }
        payload["findings"] = findings;
        payload["summary_text"] = "security review of " + first.object_id + " (" +
                                  first.semantic_class + ") found " +
                                  bucket_token(findings.size()) + " finding categories.";
    } else if (cap.name == "scan_credentials") {
        auto red = redact(content, *ctx.rules);
        static const std::set<std::string> secret_cats = {"api_key", "token", "private_key",
                                                          "connection_string"};
        std::set<std::string> found_cats;
        int hits = 0;
        for (const auto& e : red.entities) {
            std::string name = entity_category_name(e.category);
            if (secret_cats.count(name)) {
                found_cats.insert(name);
                ++hits;
            }
        }
        if (lowered.find("password") != std::string::npos ||
            lowered.find("passphrase") != std::string::npos) {
            found_cats.insert("password_keyword");
            ++hits;
        }
        payload["found"] = !found_cats.empty();
        payload["categories"] = std::vector<std::string>(found_cats.begin(), found_cats.end());
        payload["count"] = bucket_token(hits);
        payload["summary_text"] = "credential scan of " + first.object_id + ": " +
                                  (found_cats.empty() ? "no credential material detected."
                                                      : bucket_token(hits) + " credential indicators.");
    } else if (cap.name == "compare") {
        const TwinObject& second = twins.size() > 1 ? *twins[1] : first;
        const RawArtifact& raw_b = twins.size() > 1 ? *raws[1] : raw;
        double sim = jaccard(tokenize(redact(content, *ctx.rules).sanitized),
                             tokenize(redact(raw_b.bytes, *ctx.rules).sanitized));
        payload["similarity"] = sim >= 0.6 ? "high" : (sim >= 0.2 ? "medium" : "low");
        payload["shared_tags"] = shared_contains(first, second);
        payload["summary_text"] = "comparison of " + first.object_id + " and " + second.object_id +
                                  ": similarity " + payload["similarity"].get<std::string>() + ".";
    } else if (cap.name == "diff_objects") {
        const RawArtifact& raw_b = twins.size() > 1 ? *raws[1] : raw;
        const TwinObject& second = twins.size() > 1 ? *twins[1] : first;
        bool changed = raw.bytes != raw_b.bytes;
        double sim = jaccard(tokenize(redact(content, *ctx.rules).sanitized),
                             tokenize(redact(raw_b.bytes, *ctx.rules).sanitized));
        payload["changed"] = changed;
        payload["magnitude"] = !changed ? "small" : (sim >= 0.6 ? "small" : (sim >= 0.2 ? "medium" : "large"));
        payload["summary_text"] = "diff of " + first.object_id + " against " + second.object_id + ": " +
                                  (changed ? "content differs." : "no change.");
    } else if (cap.name == "extract_constraints") {
        nlohmann::json constraints = nlohmann::json::array();
        auto add = [&](const char* category, int count) {
            if (count <= 0) return;
            nlohmann::json c;
            c["category"] = category;
            c["count"] = bucket_token(count);
            constraints.push_back(c);
        };
        add("deadline", count_matches(lowered, R"(\b(deadline|due|by end of|no later than)\b)"));
        add("dependency", count_matches(lowered, R"(\b(depends on|requires|prerequisite)\b)"));
        add("compliance", count_matches(lowered, R"(\b(must|shall|policy|compliant)\b)"));
        add("quantity", count_matches(lowered, R"(\b(at least|no more than|maximum|minimum)\b)"));
        add("format", count_matches(lowered, R"(\b(format|schema|encoding)\b)"));
        payload["constraints"] = constraints;
        payload["summary_text"] = "constraint extraction from " + first.object_id + ": " +
                                  bucket_token(constraints.size()) + " constraint categories.";
    } else if (cap.name == "classify_issues") {
        nlohmann::json classes = nlohmann::json::array();
        auto add = [&](const char* label, int count) {
            if (count <= 0) return;
            nlohmann::json c;
            c["label"] = label;
            c["count"] = bucket_token(count);
            classes.push_back(c);
        };
        add("error", count_matches(content, R"(\b(ERROR|FATAL|exception|traceback)\b)"));
        add("warning", count_matches(content, R"(\b(WARN|WARNING)\b)"));
        add("timeout", count_matches(lowered, R"(\b(timeout|timed out)\b)"));
        add("security", count_matches(lowered, R"(\b(denied|unauthorized|forbidden|breach)\b)"));
        add("performance", count_matches(lowered, R"(\b(slow|latency|degraded)\b)"));
        add("config", count_matches(lowered, R"(\b(misconfigured|missing config|invalid config)\b)"));
        payload["classes"] = classes;
        payload["summary_text"] = "issue classification for " + first.object_id + ": " +
                                  bucket_token(classes.size()) + " classes.";
    } else if (cap.name == "validate_schema") {
        std::vector<std::pair<std::string, int>> violations;
        bool valid = true;
        if (first.kind == "structured_record") {
            bool parses = true;
            try {
                auto parsed = nlohmann::json::parse(content);
                (void)parsed;
            } catch (const nlohmann::json::exception&) {
                parses = false;
            }
            if (!parses) {
                // CSV-ish fallback: consistent column counts per row
                std::size_t cols = std::string::npos;
                int bad_rows = 0;
                std::size_t start = 0;
                while (start < content.size()) {
                    auto nl = content.find('\n', start);
                    std::string line = content.substr(start, nl == std::string::npos ? nl : nl - start);
                    if (!line.empty()) {
                        std::size_t c = static_cast<std::size_t>(
                            std::count(line.begin(), line.end(), ','));
                        if (cols == std::string::npos) cols = c;
                        else if (c != cols) ++bad_rows;
                    }
                    if (nl == std::string::npos) break;
                    start = nl + 1;
                }
                if (cols == std::string::npos) {
                    valid = false;
                    violations.emplace_back("type_mismatch", 1);
                } else if (bad_rows > 0) {
                    valid = false;
                    violations.emplace_back("type_mismatch", bad_rows);
                }
            }
        } else {
            int dup = count_matches(content, R"(^([A-Za-z0-9_]+)\s*[:=].*\n(?:.*\n)*?\1\s*[:=])");
            if (dup > 0) {
                valid = false;
                violations.emplace_back("duplicate", dup);
            }
        }
        nlohmann::json v = nlohmann::json::array();
        for (const auto& [rule, count] : violations) {
            nlohmann::json e;
            e["rule"] = rule;
            e["count"] = bucket_token(count);
            v.push_back(e);
        }
        payload["valid"] = valid;
        payload["violations"] = v;
        payload["summary_text"] = "schema validation of " + first.object_id + ": " +
                                  (valid ? "no violations." : "violations present.");
    } else if (cap.name == "list_dependencies") {
        static const std::regex import_re(
            R"((?:^|\n)\s*(?:import\s+([A-Za-z0-9_.]+)|from\s+([A-Za-z0-9_.]+)\s+import|#include\s+[<"]([A-Za-z0-9_./]+)[>"]|require\(['"]([A-Za-z0-9_./-]+)['"]\)))");
        std::set<std::string> deps;
        auto begin = std::sregex_iterator(content.begin(), content.end(), import_re);
        for (auto it = begin; it != std::sregex_iterator(); ++it) {
            for (std::size_t g = 1; g < it->size(); ++g) {
                if (!(*it)[g].matched) continue;
                std::string target = (*it)[g].str();
                auto pos = target.find_last_of("./");
                std::string stem = pos == std::string::npos ? target : target.substr(pos + 1);
                // Resolve to a sibling object when the import names one.
                bool resolved = false;
                for (const auto& [path, oid] : ctx.path_to_object_id) {
                    auto base = path.substr(path.find_last_of("/\\") + 1);
                    auto dot = base.find_last_of('.');
                    if (dot != std::string::npos && base.substr(0, dot) == stem) {
                        deps.insert(oid);
                        resolved = true;
                        break;
                    }
                }
                if (!resolved) deps.insert("external_library");
            }
        }
        payload["dependencies"] = std::vector<std::string>(deps.begin(), deps.end());
        payload["count"] = bucket_token(deps.size());
        payload["summary_text"] = "dependency listing for " + first.object_id + ": " +
                                  bucket_token(deps.size()) + " targets.";
    } else if (cap.name == "propose_fix_outline") {
        nlohmann::json steps = nlohmann::json::array();
        steps.push_back("inspect " + first.object_id + " (" + first.semantic_class + ") locally");
        if (std::find(first.contains.begin(), first.contains.end(), "stack_traces") !=
            first.contains.end()) {
            steps.push_back("reproduce the failure captured in " + first.object_id);
        }
        if (std::find(first.contains.begin(), first.contains.end(), "credentials") !=
            first.contains.end()) {
            steps.push_back("rotate credential material referenced by " + first.object_id);
        }
        steps.push_back("add regression coverage before applying the fix");
        steps.push_back("re-run validation and close out");
        payload["steps"] = steps;
        payload["summary_text"] = "fix outline for " + first.object_id + " prepared.";
    } else {
        throw std::runtime_error("executor: unimplemented capability " + cap.name);
    }

    result.payload = payload;
    return result;
}

}  // namespace plantwin
