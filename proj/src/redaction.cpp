#include "plantwin/redaction.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace plantwin {

namespace {

constexpr auto kRegexFlags = std::regex::ECMAScript | std::regex::optimize;
constexpr auto kRegexFlagsI = kRegexFlags | std::regex::icase;

struct RuleSpec {
    EntityCategory category;
    std::vector<std::pair<const char*, bool>> patterns;  // pattern, icase
    std::vector<const char*> keywords;
};

const std::vector<RuleSpec>& builtin_specs() {
    static const std::vector<RuleSpec> specs = {
        {EntityCategory::email,
         {{R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})", false}},
         {"mailto", "email"}},
        {EntityCategory::phone,
         {{R"((\+\d{1,3}[ .-]?)?(\(\d{3}\)[ .-]?|\b\d{3}[.-])\d{3}[.-]\d{4}\b)", false}},
         {"phone", "tel", "mobile"}},
        {EntityCategory::url,
         // Query strings are left to the credential rules so that a key
         // embedded in a URL resolves to the more specific category.
         {{R"(https?://[^\s"'<>?#]+)", false}},
         {"http", "https"}},
        {EntityCategory::ip,
         {{R"(\b(\d{1,3}\.){3}\d{1,3}\b)", false}},
         {}},
        {EntityCategory::hostname,
         {{R"(\b[a-z0-9][a-z0-9-]*(\.[a-z0-9-]+)*\.(internal|local|corp|intra|lan)(\.[a-z]{2,})?\b)",
           true}},
         {"hostname", "host"}},
        {EntityCategory::path,
         {{R"([A-Za-z]:\\[^\s"'<>|]+)", false},
          {R"(~?(/[A-Za-z0-9._+-]+){2,}/?)", false}},
         {}},
        {EntityCategory::repo_id,
         {{R"(git@[A-Za-z0-9.-]+:[A-Za-z0-9._/-]+(\.git)?)", false},
          {R"(\b[A-Za-z0-9_-]+/[A-Za-z0-9._-]+\.git\b)", false}},
         {"git", "repository"}},
        {EntityCategory::ticket_id,
         {{R"(\b[A-Z][A-Z0-9]{1,9}-\d{1,6}\b)", false}},
         {"ticket", "issue"}},
        {EntityCategory::api_key,
         // Expansive span: a key inside a URL or assignment takes the whole
         // non-space run with it, so the merged redaction lands on api_key.
         {{R"([A-Za-z0-9._/:?&=%+-]*\b(sk|pk|rk)[-_](live|test|prod)[-_][A-Za-z0-9]{8,}\b[A-Za-z0-9._/:?&=%+-]*)",
           false},
          {R"(\bAKIA[0-9A-Z]{16}\b)", false},
          {R"((api[_-]?key|apikey|secret[_-]?key)["']?\s*[:=]\s*["']?[A-Za-z0-9/+_=-]{8,}["']?)", true}},
         {"api_key", "apikey"}},
        {EntityCategory::token,
         {{R"(\bghp_[A-Za-z0-9]{20,}\b)", false},
          {R"(\bxox[baprs]-[A-Za-z0-9-]{10,}\b)", false},
          {R"(\beyJ[A-Za-z0-9_-]{8,}\.[A-Za-z0-9_-]{4,}\.[A-Za-z0-9_-]{4,}\b)", false},
          {R"((auth[_-]?token|access[_-]?token|bearer)["']?\s*[:=]?\s+["']?[A-Za-z0-9._/+-]{10,}["']?)",
           true}},
         {"token", "bearer"}},
        {EntityCategory::private_key,
         {{R"(-----BEGIN [A-Z ]*PRIVATE KEY-----[\s\S]*?-----END [A-Z ]*PRIVATE KEY-----)", false},
          {R"(-----BEGIN [A-Z ]*PRIVATE KEY-----[A-Za-z0-9+/=\s]*)", false}},
         {"private key", "passphrase"}},
        {EntityCategory::connection_string,
         {{R"(\b(postgres(ql)?|mysql|mongodb(\+srv)?|redis|amqps?)://[^\s"'<>]+)", true},
          {R"((Server|Data Source|Host)=[^;\n]+;[^\n]*(Password|Pwd)=[^;\n]+;?)", true}},
         {"connection", "dsn"}},
        {EntityCategory::person_name,
         {{R"((Author|Committer|Signed-off-by|Reviewed-by|Reported-by|Contact|Owner):?\s+[A-Z][a-z]+( [A-Z][a-z]+)+)",
           false}},
         {"author", "contact"}},
        {EntityCategory::git_identity,
         {{R"((Author|Committer):\s+[^<\n]*<[^>\n]+>)", false},
          {R"(git config user\.(name|email)[^\n]*)", false},
          {R"(user\.(name|email)\s*=\s*[^\n]+)", false}},
         {"git config", "user.name", "user.email"}},
    };
    return specs;
}

struct Span {
    std::size_t start;
    std::size_t len;
    int category;
};

}  // namespace

const char* entity_category_name(EntityCategory c) {
    switch (c) {
        case EntityCategory::email: return "email";
        case EntityCategory::phone: return "phone";
        case EntityCategory::url: return "url";
        case EntityCategory::ip: return "ip";
        case EntityCategory::hostname: return "hostname";
        case EntityCategory::path: return "path";
        case EntityCategory::repo_id: return "repo_id";
        case EntityCategory::ticket_id: return "ticket_id";
        case EntityCategory::api_key: return "api_key";
        case EntityCategory::token: return "token";
        case EntityCategory::private_key: return "private_key";
        case EntityCategory::connection_string: return "connection_string";
        case EntityCategory::person_name: return "person_name";
        case EntityCategory::git_identity: return "git_identity";
    }
    return "unknown";
}

RedactionRuleSet RedactionRuleSet::builtin() {
    RedactionRuleSet set;
    for (const auto& spec : builtin_specs()) {
        RedactionRule rule;
        rule.category = spec.category;
        for (const auto& [pattern, icase] : spec.patterns) {
            rule.patterns.emplace_back(pattern, icase ? kRegexFlagsI : kRegexFlags);
        }
        for (const char* kw : spec.keywords) rule.keywords.emplace_back(kw);
        set.rules_.push_back(std::move(rule));
    }
    return set;
}

RedactionRuleSet RedactionRuleSet::from_config(const std::string& json_text) {
    RedactionRuleSet set = builtin();
    nlohmann::json cfg = nlohmann::json::parse(json_text);
    for (auto& rule : set.rules_) {
        const char* name = entity_category_name(rule.category);
        if (!cfg.contains(name)) continue;
        const auto& entry = cfg.at(name);
        if (entry.contains("enabled")) rule.enabled = entry.at("enabled").get<bool>();
        if (entry.contains("patterns")) {
            rule.patterns.clear();
            for (const auto& p : entry.at("patterns")) {
                rule.patterns.emplace_back(p.get<std::string>(), kRegexFlags);
            }
        }
        if (entry.contains("keywords")) {
            rule.keywords = entry.at("keywords").get<std::vector<std::string>>();
        }
    }
    return set;
}

const RedactionRule& RedactionRuleSet::rule(EntityCategory c) const {
    for (const auto& r : rules_) {
        if (r.category == c) return r;
    }
    throw std::out_of_range("unknown redaction category");
}

void RedactionRuleSet::set_enabled(EntityCategory c, bool enabled) {
    for (auto& r : rules_) {
        if (r.category == c) r.enabled = enabled;
    }
}

RedactionResult redact(const std::string& text, const RedactionRuleSet& rules) {
    RedactionResult result;
    if (text.empty()) return result;

    std::vector<Span> spans;
    for (const auto& rule : rules.rules()) {
        if (!rule.enabled) continue;
        for (const auto& pattern : rule.patterns) {
            auto begin = std::sregex_iterator(text.begin(), text.end(), pattern);
            auto end = std::sregex_iterator();
            for (auto it = begin; it != end; ++it) {
                if (it->length(0) == 0) continue;
                spans.push_back(Span{static_cast<std::size_t>(it->position(0)),
                                     static_cast<std::size_t>(it->length(0)),
                                     static_cast<int>(rule.category)});
            }
        }
    }

    // Longest match, then earliest start, then category order.
    std::stable_sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
        if (a.len != b.len) return a.len > b.len;
        if (a.start != b.start) return a.start < b.start;
        return a.category < b.category;
    });

    std::vector<Span> accepted;
    for (const Span& s : spans) {
        bool overlaps = std::any_of(accepted.begin(), accepted.end(), [&](const Span& a) {
            return s.start < a.start + a.len && a.start < s.start + s.len;
        });
        if (!overlaps) accepted.push_back(s);
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const Span& a, const Span& b) { return a.start < b.start; });

    std::string out;
    out.reserve(text.size());
    std::size_t cursor = 0;
    for (const Span& s : accepted) {
        out.append(text, cursor, s.start - cursor);
        auto cat = static_cast<EntityCategory>(s.category);
        out += "[REDACTED:";
        out += entity_category_name(cat);
        out += "]";
        result.entities.push_back(
            SensitiveEntity{cat, s.start, s.start + s.len, text.substr(s.start, s.len)});
        cursor = s.start + s.len;
    }
    out.append(text, cursor, text.size() - cursor);
    result.sanitized = std::move(out);
    return result;
}

}  // namespace plantwin
