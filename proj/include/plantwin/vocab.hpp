#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Bounded vocabularies for every twin field. Nothing that crosses the trust
// boundary may carry a token outside these tables; the token alphabet is
// lowercase ASCII plus underscore.

namespace plantwin::vocab {

enum class Kind : std::uint8_t {
    code_file,
    log_stream,
    structured_record,
    config,
    secret_container,
    document,
};

enum class Sensitivity : std::uint8_t { low, restricted, high };

enum class Freshness : std::uint8_t { today, recent, stale };

enum class SizeBucket : std::uint8_t { small, medium, large };

enum class CountBucket : std::uint8_t { one, few, many };

enum class Relation : std::uint8_t {
    depends_on,
    derived_from,
    similar_to,
    blocks,
    requires_capability,
    conflicts_with,
};

inline constexpr int kKindCount = 6;
inline constexpr int kSensitivityCount = 3;
inline constexpr int kFreshnessCount = 3;
inline constexpr int kSizeBucketCount = 3;
inline constexpr int kRelationCount = 6;

const std::vector<std::string>& kind_tokens();
const std::vector<std::string>& sensitivity_tokens();
const std::vector<std::string>& freshness_tokens();
const std::vector<std::string>& size_bucket_tokens();
const std::vector<std::string>& count_bucket_tokens();
const std::vector<std::string>& relation_tokens();

// 24 semantic classes. The first entries mirror the roles the twin is meant
// to express (authentication_module, requirements_spec, ...); the list is
// closed so attribute spaces stay finite.
const std::vector<std::string>& semantic_classes();

// 12 content tags and 8 affordance tags.
const std::vector<std::string>& contains_tags();
const std::vector<std::string>& usable_for_tags();

const std::string& to_token(Kind k);
const std::string& to_token(Sensitivity s);
const std::string& to_token(Freshness f);
const std::string& to_token(SizeBucket s);
const std::string& to_token(CountBucket c);
const std::string& to_token(Relation r);

std::optional<Kind> kind_from_token(const std::string& t);
std::optional<Sensitivity> sensitivity_from_token(const std::string& t);
std::optional<Freshness> freshness_from_token(const std::string& t);
std::optional<SizeBucket> size_bucket_from_token(const std::string& t);
std::optional<Relation> relation_from_token(const std::string& t);

bool is_semantic_class(const std::string& t);
bool is_contains_tag(const std::string& t);
bool is_usable_for_tag(const std::string& t);

// Token alphabet check: lowercase ASCII letters, digits and underscore.
bool is_vocab_alphabet(const std::string& t);

inline const std::string& unknown_generic_class() {
    static const std::string s = "unknown_generic";
    return s;
}

}  // namespace plantwin::vocab
