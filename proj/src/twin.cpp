#include "plantwin/twin.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "plantwin/budget.hpp"

namespace plantwin {

using nlohmann::json;

const TwinObject* TwinGraph::find(const std::string& object_id) const {
    for (const auto& o : objects) {
        if (o.object_id == object_id) return &o;
    }
    return nullptr;
}

void TwinGraph::canonicalize() {
    std::sort(objects.begin(), objects.end(),
              [](const TwinObject& a, const TwinObject& b) { return a.object_id < b.object_id; });
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (auto& o : objects) {
        std::sort(o.contains.begin(), o.contains.end());
        o.contains.erase(std::unique(o.contains.begin(), o.contains.end()), o.contains.end());
        std::sort(o.usable_for.begin(), o.usable_for.end());
        o.usable_for.erase(std::unique(o.usable_for.begin(), o.usable_for.end()), o.usable_for.end());
    }
}

ValidationReport validate_graph(const TwinGraph& graph) {
    ValidationReport report;
    auto add = [&](const std::string& code, const std::string& detail) {
        report.issues.push_back({code, detail});
    };

    std::set<std::string> ids;
    for (const auto& o : graph.objects) {
        if (!vocab::is_vocab_alphabet(o.object_id)) {
            add("bad_token", "object_id not in token alphabet: " + o.object_id);
        }
        if (!ids.insert(o.object_id).second) {
            add("duplicate_id", o.object_id);
        }
        if (!vocab::kind_from_token(o.kind)) {
            add("unknown_vocabulary", "kind=" + o.kind + " on " + o.object_id);
        }
        if (!vocab::is_semantic_class(o.semantic_class)) {
            add("unknown_vocabulary", "semantic_class=" + o.semantic_class + " on " + o.object_id);
        }
        if (!vocab::sensitivity_from_token(o.sensitivity)) {
            add("unknown_vocabulary", "sensitivity=" + o.sensitivity + " on " + o.object_id);
        }
        if (!vocab::freshness_from_token(o.freshness)) {
            add("unknown_vocabulary", "freshness=" + o.freshness + " on " + o.object_id);
        }
        if (!vocab::size_bucket_from_token(o.size_bucket)) {
            add("unknown_vocabulary", "size_bucket=" + o.size_bucket + " on " + o.object_id);
        }
        for (const auto& t : o.contains) {
            if (!vocab::is_contains_tag(t)) {
                add("unknown_vocabulary", "contains tag=" + t + " on " + o.object_id);
            }
        }
        for (const auto& t : o.usable_for) {
            if (!vocab::is_usable_for_tag(t)) {
                add("unknown_vocabulary", "usable_for tag=" + t + " on " + o.object_id);
            }
        }
        if (!(o.confidence >= 0.0 && o.confidence <= 1.0)) {
            add("bad_confidence", o.object_id);
        }
    }
    for (const auto& e : graph.edges) {
        if (!vocab::relation_from_token(e.relation)) {
            add("unknown_vocabulary", "relation=" + e.relation);
        }
        if (e.src == e.dst) {
            add("self_loop", e.src);
        }
        if (!ids.count(e.src)) add("dangling_edge", e.src + " -> " + e.dst);
        if (!ids.count(e.dst) && e.src != e.dst) add("dangling_edge", e.dst + " <- " + e.src);
    }
    return report;
}

std::size_t ViewObject::disclosed_count() const {
    std::size_t n = contains.size() + usable_for.size();
    n += kind.has_value() + semantic_class.has_value() + sensitivity.has_value() +
         freshness.has_value() + size_bucket.has_value() + confidence.has_value();
    return n;
}

FieldSet object_field_ids(const TwinObject& obj) {
    FieldSet fields;
    fields.insert(FieldId::scalar(FieldKey::kind));
    fields.insert(FieldId::scalar(FieldKey::semantic_class));
    fields.insert(FieldId::scalar(FieldKey::sensitivity));
    fields.insert(FieldId::scalar(FieldKey::freshness));
    fields.insert(FieldId::scalar(FieldKey::size_bucket));
    fields.insert(FieldId::scalar(FieldKey::confidence));
    for (const auto& t : obj.contains) fields.insert(FieldId::contains(t));
    for (const auto& t : obj.usable_for) fields.insert(FieldId::usable(t));
    return fields;
}

PlannerView restrict_view(const TwinGraph& graph, const BudgetLedger& ledger) {
    PlannerView view;
    view.session_id = graph.session_id;
    for (const auto& o : graph.objects) {
        const std::string& key = o.budget_key();
        if (!ledger.is_registered(key)) continue;
        ViewObject vo;
        vo.object_id = o.object_id;
        auto have = [&](FieldKey k) { return ledger.field_disclosed(key, FieldId::scalar(k)); };
        if (have(FieldKey::kind)) vo.kind = o.kind;
        if (have(FieldKey::semantic_class)) vo.semantic_class = o.semantic_class;
        if (have(FieldKey::sensitivity)) vo.sensitivity = o.sensitivity;
        if (have(FieldKey::freshness)) vo.freshness = o.freshness;
        if (have(FieldKey::size_bucket)) vo.size_bucket = o.size_bucket;
        if (have(FieldKey::confidence)) vo.confidence = o.confidence;
        for (const auto& t : o.contains) {
            if (ledger.field_disclosed(key, FieldId::contains(t))) vo.contains.push_back(t);
        }
        for (const auto& t : o.usable_for) {
            if (ledger.field_disclosed(key, FieldId::usable(t))) vo.usable_for.push_back(t);
        }
        if (vo.disclosed_count() > 0) view.objects.push_back(std::move(vo));
    }
    for (const auto& e : graph.edges) {
        const TwinObject* src = graph.find(e.src);
        const TwinObject* dst = graph.find(e.dst);
        if (!src || !dst) continue;
        if (!ledger.is_registered(src->budget_key()) || !ledger.is_registered(dst->budget_key()))
            continue;
        FieldId eid = FieldId::edge_ref(edge_key(src->budget_key(), dst->budget_key(), e.relation));
        bool src_visible = std::any_of(view.objects.begin(), view.objects.end(),
                                       [&](const ViewObject& v) { return v.object_id == e.src; });
        bool dst_visible = std::any_of(view.objects.begin(), view.objects.end(),
                                       [&](const ViewObject& v) { return v.object_id == e.dst; });
        if (src_visible && dst_visible && ledger.field_disclosed(src->budget_key(), eid) &&
            ledger.field_disclosed(dst->budget_key(), eid)) {
            view.edges.push_back(e);
        }
    }
    return view;
}

PlannerView full_view(const TwinGraph& graph) {
    PlannerView view;
    view.session_id = graph.session_id;
    for (const auto& o : graph.objects) {
        ViewObject vo;
        vo.object_id = o.object_id;
        vo.kind = o.kind;
        vo.semantic_class = o.semantic_class;
        vo.sensitivity = o.sensitivity;
        vo.freshness = o.freshness;
        vo.size_bucket = o.size_bucket;
        vo.confidence = o.confidence;
        vo.contains = o.contains;
        vo.usable_for = o.usable_for;
        view.objects.push_back(std::move(vo));
    }
    view.edges = graph.edges;
    return view;
}

namespace {

void require_token(bool ok, const std::string& what, const std::string& value) {
    if (!ok) throw std::invalid_argument("out-of-vocabulary " + what + ": " + value);
}

json view_object_to_json(const ViewObject& vo) {
    require_token(vocab::is_vocab_alphabet(vo.object_id), "object_id", vo.object_id);
    json o;
    o["object_id"] = vo.object_id;
    if (vo.kind) {
        require_token(vocab::kind_from_token(*vo.kind).has_value(), "kind", *vo.kind);
        o["kind"] = *vo.kind;
    }
    if (vo.semantic_class) {
        require_token(vocab::is_semantic_class(*vo.semantic_class), "semantic_class", *vo.semantic_class);
        o["semantic_class"] = *vo.semantic_class;
    }
    if (vo.sensitivity) {
        require_token(vocab::sensitivity_from_token(*vo.sensitivity).has_value(), "sensitivity",
                      *vo.sensitivity);
        o["sensitivity"] = *vo.sensitivity;
    }
    if (vo.freshness) {
        require_token(vocab::freshness_from_token(*vo.freshness).has_value(), "freshness", *vo.freshness);
        o["freshness"] = *vo.freshness;
    }
    if (vo.size_bucket) {
        require_token(vocab::size_bucket_from_token(*vo.size_bucket).has_value(), "size_bucket",
                      *vo.size_bucket);
        o["size_bucket"] = *vo.size_bucket;
    }
    if (vo.confidence) {
        if (!(*vo.confidence >= 0.0 && *vo.confidence <= 1.0))
            throw std::invalid_argument("confidence out of range");
        o["confidence"] = *vo.confidence;
    }
    if (!vo.contains.empty()) {
        auto tags = vo.contains;
        std::sort(tags.begin(), tags.end());
        for (const auto& t : tags) require_token(vocab::is_contains_tag(t), "contains tag", t);
        o["contains"] = tags;
    }
    if (!vo.usable_for.empty()) {
        auto tags = vo.usable_for;
        std::sort(tags.begin(), tags.end());
        for (const auto& t : tags) require_token(vocab::is_usable_for_tag(t), "usable_for tag", t);
        o["usable_for"] = tags;
    }
    return o;
}

}  // namespace

std::string serialize_view(const PlannerView& view) {
    json doc;
    doc["session_id"] = view.session_id;

    auto objects = view.objects;
    std::sort(objects.begin(), objects.end(),
              [](const ViewObject& a, const ViewObject& b) { return a.object_id < b.object_id; });
    json arr = json::array();
    for (const auto& vo : objects) arr.push_back(view_object_to_json(vo));
    doc["objects"] = arr;

    auto edges = view.edges;
    std::sort(edges.begin(), edges.end());
    json earr = json::array();
    for (const auto& e : edges) {
        require_token(vocab::relation_from_token(e.relation).has_value(), "relation", e.relation);
        json je;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["relation"] = e.relation;
        earr.push_back(je);
    }
    doc["edges"] = earr;
    return doc.dump();
}

PlannerView parse_view(const std::string& document) {
    json doc = json::parse(document);  // throws on malformed input
    if (!doc.is_object() || !doc.contains("session_id") || !doc.contains("objects"))
        throw std::invalid_argument("not a twin document");
    PlannerView view;
    view.session_id = doc.at("session_id").get<std::string>();
    for (const auto& o : doc.at("objects")) {
        ViewObject vo;
        vo.object_id = o.at("object_id").get<std::string>();
        if (o.contains("kind")) vo.kind = o.at("kind").get<std::string>();
        if (o.contains("semantic_class")) vo.semantic_class = o.at("semantic_class").get<std::string>();
        if (o.contains("sensitivity")) vo.sensitivity = o.at("sensitivity").get<std::string>();
        if (o.contains("freshness")) vo.freshness = o.at("freshness").get<std::string>();
        if (o.contains("size_bucket")) vo.size_bucket = o.at("size_bucket").get<std::string>();
        if (o.contains("confidence")) vo.confidence = o.at("confidence").get<double>();
        if (o.contains("contains")) vo.contains = o.at("contains").get<std::vector<std::string>>();
        if (o.contains("usable_for")) vo.usable_for = o.at("usable_for").get<std::vector<std::string>>();
        view.objects.push_back(std::move(vo));
    }
    if (doc.contains("edges")) {
        for (const auto& e : doc.at("edges")) {
            view.edges.push_back(TwinEdge{e.at("src").get<std::string>(), e.at("dst").get<std::string>(),
                                          e.at("relation").get<std::string>()});
        }
    }
    // Reject anything that would not re-serialize cleanly.
    serialize_view(view);
    return view;
}

}  // namespace plantwin
