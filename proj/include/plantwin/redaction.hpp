#pragma once

#include <cstddef>
#include <regex>
#include <string>
#include <vector>

namespace plantwin {

enum class EntityCategory : int {
    email = 0,
    phone,
    url,
    ip,
    hostname,
    path,
    repo_id,
    ticket_id,
    api_key,
    token,
    private_key,
    connection_string,
    person_name,
    git_identity,
};

inline constexpr int kEntityCategoryCount = 14;

const char* entity_category_name(EntityCategory c);

// Span offsets refer to the original text. matched_text never crosses the
// trust boundary; it exists for local ground-truth checks only.
struct SensitiveEntity {
    EntityCategory category;
    std::size_t start = 0;
    std::size_t end = 0;  // one past the last matched byte
    std::string matched_text;
};

struct RedactionRule {
    EntityCategory category;
    bool enabled = true;
    std::vector<std::regex> patterns;
    std::vector<std::string> keywords;  // contextual sensitivity hints, not span matchers
};

class RedactionRuleSet {
public:
    // The 14 built-in categories with their default patterns and keyword
    // lists.
    static RedactionRuleSet builtin();

    // Config document: {"<category>": {"enabled": bool, "patterns": [str],
    // "keywords": [str]}}. Unlisted categories keep their defaults.
    static RedactionRuleSet from_config(const std::string& json_text);

    const std::vector<RedactionRule>& rules() const { return rules_; }
    const RedactionRule& rule(EntityCategory c) const;
    void set_enabled(EntityCategory c, bool enabled);

private:
    std::vector<RedactionRule> rules_;
};

struct RedactionResult {
    std::string sanitized;
    std::vector<SensitiveEntity> entities;  // sorted by span start, non-overlapping
};

// Every matched span is replaced by "[REDACTED:<category>]". Overlaps are
// resolved longest match first, then earliest start, then category order.
// Idempotent: placeholders match no rule.
RedactionResult redact(const std::string& text, const RedactionRuleSet& rules);

}  // namespace plantwin
