#include "plantwin/vocab.hpp"

#include <algorithm>

namespace plantwin::vocab {

namespace {

template <typename T>
std::optional<T> lookup(const std::vector<std::string>& table, const std::string& t) {
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i] == t) return static_cast<T>(i);
    }
    return std::nullopt;
}

}  // namespace

const std::vector<std::string>& kind_tokens() {
    static const std::vector<std::string> v = {
        "code_file", "log_stream", "structured_record",
        "config",    "secret_container", "document",
    };
    return v;
}

const std::vector<std::string>& sensitivity_tokens() {
    static const std::vector<std::string> v = {"low", "restricted", "high"};
    return v;
}

const std::vector<std::string>& freshness_tokens() {
    static const std::vector<std::string> v = {"today", "recent", "stale"};
    return v;
}

const std::vector<std::string>& size_bucket_tokens() {
    static const std::vector<std::string> v = {"small", "medium", "large"};
    return v;
}

const std::vector<std::string>& count_bucket_tokens() {
    static const std::vector<std::string> v = {"one", "few", "many"};
    return v;
}

const std::vector<std::string>& relation_tokens() {
    static const std::vector<std::string> v = {
        "depends_on", "derived_from", "similar_to",
        "blocks",     "requires_capability", "conflicts_with",
    };
    return v;
}

const std::vector<std::string>& semantic_classes() {
    static const std::vector<std::string> v = {
        "authentication_module", "payment_service",   "requirements_spec",
        "deployment_config",     "incident_log",      "etl_job",
        "test_suite",            "api_client",        "db_migration",
        "frontend_component",    "credentials_store", "build_script",
        "data_schema",           "training_pipeline", "model_config",
        "error_trace",           "api_spec",          "design_document",
        "user_directory",        "access_policy",     "metrics_dashboard",
        "dependency_manifest",   "release_notes",     "unknown_generic",
    };
    return v;
}

const std::vector<std::string>& contains_tags() {
    static const std::vector<std::string> v = {
        "tables",  "dates",        "constraints", "imports",
        "sql",     "credentials",  "stack_traces", "endpoints",
        "schemas", "metrics",      "tests",       "secrets_refs",
    };
    return v;
}

const std::vector<std::string>& usable_for_tags() {
    static const std::vector<std::string> v = {
        "compare", "extract_constraints", "summarize", "classify",
        "audit",   "transform",           "validate",  "diff",
    };
    return v;
}

const std::string& to_token(Kind k) { return kind_tokens()[static_cast<std::size_t>(k)]; }
const std::string& to_token(Sensitivity s) { return sensitivity_tokens()[static_cast<std::size_t>(s)]; }
const std::string& to_token(Freshness f) { return freshness_tokens()[static_cast<std::size_t>(f)]; }
const std::string& to_token(SizeBucket s) { return size_bucket_tokens()[static_cast<std::size_t>(s)]; }
const std::string& to_token(CountBucket c) { return count_bucket_tokens()[static_cast<std::size_t>(c)]; }
const std::string& to_token(Relation r) { return relation_tokens()[static_cast<std::size_t>(r)]; }

std::optional<Kind> kind_from_token(const std::string& t) { return lookup<Kind>(kind_tokens(), t); }
std::optional<Sensitivity> sensitivity_from_token(const std::string& t) {
    return lookup<Sensitivity>(sensitivity_tokens(), t);
}
std::optional<Freshness> freshness_from_token(const std::string& t) {
    return lookup<Freshness>(freshness_tokens(), t);
}
std::optional<SizeBucket> size_bucket_from_token(const std::string& t) {
    return lookup<SizeBucket>(size_bucket_tokens(), t);
}
std::optional<Relation> relation_from_token(const std::string& t) {
    return lookup<Relation>(relation_tokens(), t);
}

bool is_semantic_class(const std::string& t) {
    const auto& v = semantic_classes();
    return std::find(v.begin(), v.end(), t) != v.end();
}

bool is_contains_tag(const std::string& t) {
    const auto& v = contains_tags();
    return std::find(v.begin(), v.end(), t) != v.end();
}

bool is_usable_for_tag(const std::string& t) {
    const auto& v = usable_for_tags();
    return std::find(v.begin(), v.end(), t) != v.end();
}

bool is_vocab_alphabet(const std::string& t) {
    if (t.empty()) return false;
    for (char c : t) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

}  // namespace plantwin::vocab
