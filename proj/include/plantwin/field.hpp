#pragma once

#include <compare>
#include <set>
#include <string>

namespace plantwin {

// Disclosure accounting works on field identities, not field values. Scalar
// fields are identified by their key alone; set-valued fields are charged
// per member; edges are charged per edge (to both endpoints).
enum class FieldKey : int {
    kind = 0,
    semantic_class,
    sensitivity,
    freshness,
    size_bucket,
    confidence,
    contains_tag,
    usable_for_tag,
    edge,
};

struct FieldId {
    FieldKey key = FieldKey::kind;
    std::string qualifier;  // tag token, or canonical edge key; empty for scalars

    auto operator<=>(const FieldId&) const = default;

    static FieldId scalar(FieldKey k) { return FieldId{k, ""}; }
    static FieldId contains(const std::string& tag) { return FieldId{FieldKey::contains_tag, tag}; }
    static FieldId usable(const std::string& tag) { return FieldId{FieldKey::usable_for_tag, tag}; }
    static FieldId edge_ref(const std::string& canonical_key) { return FieldId{FieldKey::edge, canonical_key}; }

    std::string to_string() const;
};

using FieldSet = std::set<FieldId>;

// Canonical key identifying an edge independently of session-local object
// ids. Built from the endpoints' local keys so budgets survive id refresh.
std::string edge_key(const std::string& src_local, const std::string& dst_local,
                     const std::string& relation);

const char* field_key_name(FieldKey k);

}  // namespace plantwin
