#include "plantwin/field.hpp"

namespace plantwin {

const char* field_key_name(FieldKey k) {
    switch (k) {
        case FieldKey::kind: return "kind";
        case FieldKey::semantic_class: return "semantic_class";
        case FieldKey::sensitivity: return "sensitivity";
        case FieldKey::freshness: return "freshness";
        case FieldKey::size_bucket: return "size_bucket";
        case FieldKey::confidence: return "confidence";
        case FieldKey::contains_tag: return "contains";
        case FieldKey::usable_for_tag: return "usable_for";
        case FieldKey::edge: return "edge";
    }
    return "unknown";
}

std::string FieldId::to_string() const {
    if (qualifier.empty()) return field_key_name(key);
    return std::string(field_key_name(key)) + ":" + qualifier;
}

std::string edge_key(const std::string& src_local, const std::string& dst_local,
                     const std::string& relation) {
    return src_local + "|" + dst_local + "|" + relation;
}

}  // namespace plantwin
