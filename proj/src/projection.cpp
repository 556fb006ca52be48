#include "plantwin/projection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include "plantwin/rng.hpp"

namespace plantwin {

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string basename_of(const std::string& path) {
    auto pos = path.find_last_of("/\\");
    return pos == std::string::npos ? path : path.substr(pos + 1);
}

std::string stem_of(const std::string& path) {
    std::string base = basename_of(path);
    auto dot = base.find_last_of('.');
    if (dot == std::string::npos || dot == 0) return base;
    return base.substr(0, dot);
}

std::string extension_of(const std::string& path) {
    std::string base = basename_of(path);
    auto dot = base.find_last_of('.');
    if (dot == std::string::npos || dot + 1 >= base.size()) return "";
    return lowercase(base.substr(dot + 1));
}

bool looks_binary(const std::string& bytes) {
    if (bytes.empty()) return false;
    std::size_t nonprint = 0;
    std::size_t sample = std::min<std::size_t>(bytes.size(), 4096);
    for (std::size_t i = 0; i < sample; ++i) {
        unsigned char c = bytes[i];
        if (c == 0 || (c < 32 && c != '\n' && c != '\r' && c != '\t')) ++nonprint;
    }
    return nonprint * 5 > sample;  // >20% control bytes
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

int count_occurrences(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return 0;
    int count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

// --- kind detection -------------------------------------------------------

const std::set<std::string>& code_extensions() {
    static const std::set<std::string> s = {"py", "js",  "ts", "jsx", "tsx", "go", "java", "rb",
                                            "rs", "c",   "cc", "cpp", "h",   "hpp", "cs",  "sh",
                                            "bash", "php", "kt", "swift", "scala"};
    return s;
}

const std::set<std::string>& structured_extensions() {
    static const std::set<std::string> s = {"csv", "tsv", "json", "jsonl", "xml", "avro", "parquet"};
    return s;
}

const std::set<std::string>& config_extensions() {
    static const std::set<std::string> s = {"yaml", "yml", "toml", "ini", "cfg", "conf", "properties"};
    return s;
}

const std::set<std::string>& document_extensions() {
    static const std::set<std::string> s = {"md", "txt", "rst", "adoc", "html"};
    return s;
}

bool has_secret_assignments(const std::string& content) {
    static const std::regex kv(R"(^\s*(export\s+)?[A-Z][A-Z0-9_]*\s*=\s*\S+)");
    static const std::regex secretish(R"((KEY|TOKEN|SECRET|PASSWORD|PASSWD|CREDENTIAL))");
    int hits = 0;
    for (const auto& line : split_lines(content)) {
        if (std::regex_search(line, kv) && std::regex_search(line, secretish)) ++hits;
        if (hits >= 1) return true;
    }
    return false;
}

bool looks_like_log(const std::string& content) {
    static const std::regex ts(R"(^\s*(\d{4}-\d{2}-\d{2}[ T]\d{2}:\d{2}|\[\d{2}:\d{2}:\d{2}\]|\[(INFO|WARN|WARNING|ERROR|DEBUG|FATAL)\]))");
    int hits = 0;
    int lines = 0;
    for (const auto& line : split_lines(content)) {
        if (line.empty()) continue;
        ++lines;
        if (std::regex_search(line, ts)) ++hits;
        if (lines >= 20) break;
    }
    return lines >= 3 && hits * 2 >= lines;
}

vocab::Kind detect_kind(const RawArtifact& artifact) {
    const std::string base = lowercase(basename_of(artifact.path));
    const std::string ext = extension_of(artifact.path);
    const std::string& content = artifact.bytes;

    bool private_key_block = content.find("-----BEGIN") != std::string::npos &&
                             content.find("PRIVATE KEY") != std::string::npos;
    if (base == ".env" || ext == "env" || ext == "pem" || base.find("secret") != std::string::npos ||
        base.find("credential") != std::string::npos || private_key_block) {
        return vocab::Kind::secret_container;
    }
    if (ext == "log") return vocab::Kind::log_stream;
    if (code_extensions().count(ext)) return vocab::Kind::code_file;
    if (structured_extensions().count(ext)) return vocab::Kind::structured_record;
    if (config_extensions().count(ext)) {
        return has_secret_assignments(content) ? vocab::Kind::secret_container : vocab::Kind::config;
    }
    if (document_extensions().count(ext)) return vocab::Kind::document;

    // No recognized extension: sniff content.
    if (!content.empty() && !looks_binary(content)) {
        if (content.rfind("#!", 0) == 0) return vocab::Kind::code_file;
        if (looks_like_log(content)) return vocab::Kind::log_stream;
        if (has_secret_assignments(content)) return vocab::Kind::secret_container;
    }
    return vocab::Kind::document;
}

// --- semantic class scoring ------------------------------------------------

struct ClassKeywords {
    const char* cls;
    std::vector<const char*> keywords;
};

const std::vector<ClassKeywords>& class_keywords() {
    static const std::vector<ClassKeywords> table = {
        {"authentication_module", {"login", "password", "auth", "token", "session", "oauth", "signin", "credential"}},
        {"payment_service", {"payment", "billing", "invoice", "refund", "transaction", "checkout", "card", "charge"}},
        {"requirements_spec", {"shall", "must", "requirement", "acceptance", "stakeholder", "criteria", "scope"}},
        {"deployment_config", {"deploy", "replicas", "container", "image", "ingress", "rollout", "namespace", "port"}},
        {"incident_log", {"incident", "alert", "severity", "outage", "oncall", "postmortem", "breach"}},
        {"etl_job", {"etl", "extract", "transform", "load", "batch", "ingest", "warehouse", "pipeline"}},
        {"test_suite", {"test", "assert", "fixture", "mock", "expect", "coverage"}},
        {"api_client", {"client", "request", "response", "endpoint", "retry", "timeout", "api"}},
        {"db_migration", {"migration", "alter", "add column", "create table", "upgrade", "downgrade"}},
        {"frontend_component", {"component", "render", "props", "state", "button", "form", "css", "dom"}},
        {"credentials_store", {"api_key", "secret", "private key", "vault", "passphrase", "credentials"}},
        {"build_script", {"build", "compile", "target", "cmake", "makefile", "artifact", "package"}},
        {"data_schema", {"schema", "field", "column", "nullable", "constraint", "definition", "type"}},
        {"training_pipeline", {"train", "epoch", "batch_size", "learning rate", "dataset", "checkpoint"}},
        {"model_config", {"model", "hyperparameter", "layers", "optimizer", "weights", "inference"}},
        {"error_trace", {"traceback", "exception", "stack", "caused by", "at line", "error"}},
        {"api_spec", {"openapi", "swagger", "paths", "responses", "parameters", "get", "post"}},
        {"design_document", {"design", "architecture", "proposal", "tradeoff", "diagram", "overview"}},
        {"user_directory", {"user", "name", "address", "roster", "directory", "member"}},
        {"access_policy", {"policy", "allow", "deny", "role", "permission", "grant", "acl"}},
        {"metrics_dashboard", {"metric", "latency", "throughput", "p99", "dashboard", "gauge", "counter"}},
        {"dependency_manifest", {"dependencies", "requires", "version", "lockfile", "package"}},
        {"release_notes", {"release", "changelog", "fixed", "added", "changed", "version"}},
    };
    return table;
}

std::pair<std::string, double> score_semantic_class(const RawArtifact& artifact) {
    const std::string content = lowercase(artifact.bytes);
    const std::string name = lowercase(artifact.path);
    int best_score = 0;
    int total = 0;
    std::string best = vocab::unknown_generic_class();
    for (const auto& entry : class_keywords()) {
        int score = 0;
        for (const char* kw : entry.keywords) {
            score += count_occurrences(content, kw);
            score += 3 * count_occurrences(name, kw);
        }
        total += score;
        if (score > best_score) {  // ties keep the earlier (fixed-order) class
            best_score = score;
            best = entry.cls;
        }
    }
    if (best_score == 0) return {vocab::unknown_generic_class(), 0.3};
    double confidence = static_cast<double>(best_score) / (static_cast<double>(total) + 2.0);
    confidence = std::clamp(confidence, 0.3, 0.99);
    confidence = std::round(confidence * 100.0) / 100.0;
    return {best, confidence};
}

// --- contains tags ----------------------------------------------------------

bool regex_hits(const std::string& text, const char* pattern) {
    static std::map<const char*, std::regex> cache;
    auto it = cache.find(pattern);
    if (it == cache.end()) {
        it = cache.emplace(pattern, std::regex(pattern, std::regex::ECMAScript | std::regex::icase |
                                                            std::regex::optimize))
                 .first;
    }
    return std::regex_search(text, it->second);
}

std::vector<std::string> detect_contains(const std::string& content) {
    std::vector<std::string> tags;
    if (content.empty()) return tags;
    const std::string lowered = lowercase(content);
    auto add = [&](const char* tag) { tags.emplace_back(tag); };

    auto lines = split_lines(content);
    int pipe_lines = 0, comma_lines = 0;
    for (const auto& line : lines) {
        if (std::count(line.begin(), line.end(), '|') >= 2) ++pipe_lines;
        if (std::count(line.begin(), line.end(), ',') >= 2) ++comma_lines;
    }
    if (pipe_lines >= 2 || comma_lines >= 2 || lowered.find("<table") != std::string::npos)
        add("tables");
    if (regex_hits(content, R"(\d{4}-\d{2}-\d{2}|\d{1,2}/\d{1,2}/\d{2,4})")) add("dates");
    if (regex_hits(lowered, R"(\b(must|shall|required|at least|no more than|deadline)\b)"))
        add("constraints");
    if (regex_hits(content, R"((^|\n)\s*(import |from .+ import|#include|require\(|use ))"))
        add("imports");
    if (regex_hits(lowered, R"(\b(select .+ from|insert into|create table|update .+ set)\b)"))
        add("sql");
    if (regex_hits(lowered, R"(\b(password|passwd|passphrase|secret|api[_-]?key|credential)\b)"))
        add("credentials");
    if (regex_hits(lowered, R"((traceback|exception|caused by|stack trace))")) add("stack_traces");
    if (regex_hits(lowered, R"((https?://|/api/|@app\.route|app\.get\(|@get|@post))")) add("endpoints");
    if (regex_hits(lowered, R"((create table|"type":|\bschema\b|properties:))")) add("schemas");
    if (regex_hits(lowered, R"((\d+(\.\d+)?(ms|%)|latency|throughput|p9[59]))")) add("metrics");
    if (regex_hits(content, R"((def test_|assert |TEST\(|it\(|describe\(|@Test))")) add("tests");
    if (regex_hits(lowered, R"((\$\{[a-z0-9_]+\}|os\.environ|getenv|process\.env|secretsmanager|vault))"))
        add("secrets_refs");

    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    return tags;
}

std::vector<std::string> affordances_for(vocab::Kind kind) {
    switch (kind) {
        case vocab::Kind::code_file: return {"audit", "compare", "diff", "summarize"};
        case vocab::Kind::log_stream: return {"audit", "classify", "summarize"};
        case vocab::Kind::structured_record:
            return {"extract_constraints", "summarize", "transform", "validate"};
        case vocab::Kind::config: return {"audit", "compare", "summarize", "validate"};
        case vocab::Kind::secret_container: return {"audit"};
        case vocab::Kind::document: return {"classify", "compare", "extract_constraints", "summarize"};
    }
    return {"summarize"};
}

// --- edge derivation helpers -----------------------------------------------

std::set<std::string> import_targets(const std::string& content) {
    std::set<std::string> targets;
    static const std::regex import_re(
        R"((?:^|\n)\s*(?:import\s+([A-Za-z0-9_.]+)|from\s+([A-Za-z0-9_.]+)\s+import|#include\s+[<"]([A-Za-z0-9_./]+)[>"]|require\(['"]([A-Za-z0-9_./-]+)['"]\)|use\s+([A-Za-z0-9_:]+)))");
    auto begin = std::sregex_iterator(content.begin(), content.end(), import_re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        for (std::size_t g = 1; g < it->size(); ++g) {
            if ((*it)[g].matched) {
                std::string t = (*it)[g].str();
                // keep the last dotted/path component
                auto pos = t.find_last_of("./:");
                targets.insert(pos == std::string::npos ? t : t.substr(pos + 1));
                targets.insert(t);
            }
        }
    }
    return targets;
}

std::set<std::string> token_set(const std::string& text) {
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

std::string zero_pad(std::size_t value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

}  // namespace

std::string artifact_local_key(const RawArtifact& artifact) {
    return "h" + zero_pad(fnv1a64(artifact.bytes.data(), artifact.bytes.size()), 20);
}

vocab::SizeBucket size_bucket_of(std::size_t bytes) {
    if (bytes < 64 * 1024) return vocab::SizeBucket::small;
    if (bytes < 10 * 1024 * 1024) return vocab::SizeBucket::medium;
    return vocab::SizeBucket::large;
}

vocab::Freshness freshness_of(std::int64_t mtime, std::int64_t now) {
    std::int64_t age = now - mtime;
    if (age < 0) age = 0;
    if (age < 24 * 3600) return vocab::Freshness::today;
    if (age < 30LL * 24 * 3600) return vocab::Freshness::recent;
    return vocab::Freshness::stale;
}

vocab::CountBucket count_bucket_of(std::size_t n) {
    if (n <= 1) return vocab::CountBucket::one;
    if (n <= 5) return vocab::CountBucket::few;
    return vocab::CountBucket::many;
}

vocab::Sensitivity sensitivity_of(const std::map<std::string, int>& entity_hits) {
    static const std::set<std::string> high_categories = {"api_key", "token", "private_key",
                                                          "connection_string"};
    bool any = false;
    for (const auto& [cat, count] : entity_hits) {
        if (count <= 0) continue;
        any = true;
        if (high_categories.count(cat)) return vocab::Sensitivity::high;
    }
    return any ? vocab::Sensitivity::restricted : vocab::Sensitivity::low;
}

GeneralizedMetadata generalize(const RawMetadata& raw, std::int64_t now) {
    GeneralizedMetadata g{size_bucket_of(raw.size_bytes), freshness_of(raw.mtime, now),
                          sensitivity_of(raw.entity_hits)};
    return g;
}

ExtractedObject HeuristicExtractor::extract(const RawArtifact& artifact) const {
    ExtractedObject obj;
    obj.source_path = artifact.path;
    obj.raw.size_bytes = artifact.size();
    obj.raw.mtime = artifact.mtime;

    if (artifact.bytes.empty() || looks_binary(artifact.bytes)) {
        obj.kind = vocab::Kind::document;
        obj.semantic_class = vocab::unknown_generic_class();
        obj.confidence = 0.3;
        obj.usable_for = affordances_for(obj.kind);
        return obj;
    }

    obj.kind = detect_kind(artifact);
    auto [cls, confidence] = score_semantic_class(artifact);
    obj.semantic_class = cls;
    obj.confidence = confidence;
    obj.contains = detect_contains(artifact.bytes);
    obj.usable_for = affordances_for(obj.kind);
    return obj;
}

TwinGraph project_environment(const std::vector<RawArtifact>& env, const ProjectionConfig& config,
                              std::uint64_t session_seed,
                              const std::vector<DeclaredRelation>& declared) {
    static const HeuristicExtractor default_extractor;
    const Extractor& extractor = config.extractor ? *config.extractor : default_extractor;

    // Canonical input order, independent of caller ordering.
    std::vector<const RawArtifact*> artifacts;
    artifacts.reserve(env.size());
    for (const auto& a : env) artifacts.push_back(&a);
    std::sort(artifacts.begin(), artifacts.end(),
              [](const RawArtifact* a, const RawArtifact* b) { return a->path < b->path; });

    TwinGraph graph;
    graph.session_id = "session_" + zero_pad(derive_seed(session_seed, 0x5e55) % 100000000ULL, 8);

    // Session-local random id permutation.
    std::vector<std::size_t> perm(artifacts.size());
    std::iota(perm.begin(), perm.end(), 0);
    auto rng = make_rng(derive_seed(session_seed, 0x1d5));
    std::shuffle(perm.begin(), perm.end(), rng);
    int width = std::max<int>(2, static_cast<int>(std::to_string(artifacts.size()).size()));

    struct Derived {
        std::string object_id;
        std::set<std::string> imports;
        std::set<std::string> tokens;
        std::string redacted;
    };
    std::vector<Derived> derived(artifacts.size());

    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        const RawArtifact& artifact = *artifacts[i];
        ExtractedObject ex = extractor.extract(artifact);             // Stage 1
        RedactionResult red = looks_binary(artifact.bytes)
                                  ? RedactionResult{}
                                  : redact(artifact.bytes, config.rules);  // Stage 2
        for (const auto& e : red.entities) {
            ex.raw.entity_hits[entity_category_name(e.category)] += 1;
        }
        GeneralizedMetadata gen = generalize(ex.raw, config.now);     // Stage 3

        TwinObject obj;                                               // Stage 4
        obj.object_id = "artifact_" + zero_pad(perm[i], width);
        obj.kind = vocab::to_token(ex.kind);
        obj.semantic_class = ex.semantic_class;
        obj.sensitivity = vocab::to_token(gen.sensitivity);
        obj.freshness = vocab::to_token(gen.freshness);
        obj.size_bucket = vocab::to_token(gen.size_bucket);
        obj.contains = ex.contains;
        obj.usable_for = ex.usable_for;
        obj.confidence = ex.confidence;
        obj.local_key = artifact_local_key(artifact);
        obj.source_path = artifact.path;
        graph.objects.push_back(std::move(obj));

        Derived d;
        d.object_id = graph.objects.back().object_id;
        if (!looks_binary(artifact.bytes)) {
            d.imports = import_targets(artifact.bytes);
            d.tokens = token_set(red.sanitized);
            d.redacted = std::move(red.sanitized);
        }
        derived[i] = std::move(d);
    }

    // Edge derivation over the canonical artifact order.
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        for (std::size_t j = 0; j < artifacts.size(); ++j) {
            if (i == j) continue;
            const std::string stem = stem_of(artifacts[j]->path);
            if (!stem.empty() && derived[i].imports.count(stem)) {
                graph.edges.push_back(
                    TwinEdge{derived[i].object_id, derived[j].object_id, "depends_on"});
                continue;
            }
            const std::string base = basename_of(artifacts[j]->path);
            if (!base.empty() && derived[i].redacted.find(base) != std::string::npos) {
                graph.edges.push_back(
                    TwinEdge{derived[i].object_id, derived[j].object_id, "derived_from"});
            }
        }
        for (std::size_t j = i + 1; j < artifacts.size(); ++j) {
            if (jaccard(derived[i].tokens, derived[j].tokens) >= config.similar_jaccard_threshold) {
                graph.edges.push_back(
                    TwinEdge{derived[i].object_id, derived[j].object_id, "similar_to"});
            }
        }
    }
    for (const auto& rel : declared) {
        const Derived* src = nullptr;
        const Derived* dst = nullptr;
        for (std::size_t i = 0; i < artifacts.size(); ++i) {
            if (artifacts[i]->path == rel.src_path) src = &derived[i];
            if (artifacts[i]->path == rel.dst_path) dst = &derived[i];
        }
        if (src && dst && src != dst && vocab::relation_from_token(rel.relation)) {
            graph.edges.push_back(TwinEdge{src->object_id, dst->object_id, rel.relation});
        }
    }

    graph.canonicalize();
    return graph;
}

namespace {

std::string sanitize_text(const std::string& text, const RedactionRuleSet& rules,
                          const std::map<std::string, std::string>& path_map) {
    std::string out = text;
    // Longest paths first so nested paths resolve to the most specific id.
    std::vector<std::pair<std::string, std::string>> replacements;
    for (const auto& [path, id] : path_map) {
        replacements.emplace_back(path, id);
        std::string base = basename_of(path);
        if (base != path) replacements.emplace_back(base, id);
    }
    std::sort(replacements.begin(), replacements.end(), [](const auto& a, const auto& b) {
        if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
        return a.first < b.first;
    });
    for (const auto& [needle, id] : replacements) {
        if (needle.empty()) continue;
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), id);
            pos += id.size();
        }
    }
    out = redact(out, rules).sanitized;
    // Coarsen long digit runs; exact large numbers are needlessly
    // identifying in planner-visible text.
    static const std::regex digits(R"(\d{4,})");
    out = std::regex_replace(out, digits, "many");
    return out;
}

nlohmann::json sanitize_json(const nlohmann::json& value, const RedactionRuleSet& rules,
                             const std::map<std::string, std::string>& path_map) {
    if (value.is_string()) {
        return sanitize_text(value.get<std::string>(), rules, path_map);
    }
    if (value.is_object()) {
        nlohmann::json out = nlohmann::json::object();
        for (auto it = value.begin(); it != value.end(); ++it) {
            out[it.key()] = sanitize_json(it.value(), rules, path_map);
        }
        return out;
    }
    if (value.is_array()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& v : value) out.push_back(sanitize_json(v, rules, path_map));
        return out;
    }
    return value;
}

}  // namespace

std::string SanitizedResult::to_document() const {
    nlohmann::json doc;
    doc["capability"] = capability;
    doc["output_schema"] = output_schema;
    doc["payload"] = payload;
    return doc.dump();
}

SanitizedResult sanitize_output(const ExecutionResult& result, const RedactionRuleSet& rules,
                                const std::map<std::string, std::string>& path_to_object_id) {
    SanitizedResult out;
    out.capability = result.capability;
    out.output_schema = result.output_schema;
    out.payload = sanitize_json(result.payload, rules, path_to_object_id);
    return out;
}

}  // namespace plantwin
