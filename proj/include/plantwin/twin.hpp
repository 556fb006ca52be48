#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plantwin/field.hpp"
#include "plantwin/vocab.hpp"

namespace plantwin {

class BudgetLedger;

// One node of the planner-visible abstraction. All fields are tokens drawn
// from the bounded vocabularies; free-form strings never appear here except
// the trusted-side bookkeeping members: local_key (content hash, keys budget
// state across tasks) and source_path (execution mapping). Neither is ever
// serialized.
struct TwinObject {
    std::string object_id;
    std::string kind;
    std::string semantic_class;
    std::string sensitivity;
    std::string freshness;
    std::string size_bucket;
    std::vector<std::string> contains;    // sorted, unique
    std::vector<std::string> usable_for;  // sorted, unique
    double confidence = 0.5;
    std::string local_key;
    std::string source_path;

    // Falls back to object_id for hand-built graphs.
    const std::string& budget_key() const { return local_key.empty() ? object_id : local_key; }
};

struct TwinEdge {
    std::string src;
    std::string dst;
    std::string relation;

    auto operator<=>(const TwinEdge&) const = default;
};

// Immutable after construction; safe to share across concurrent readers.
struct TwinGraph {
    std::string session_id;
    std::vector<TwinObject> objects;  // sorted by object_id
    std::vector<TwinEdge> edges;      // sorted (src, dst, relation)

    const TwinObject* find(const std::string& object_id) const;
    void canonicalize();  // sort objects/edges, dedupe edges
};

struct ValidationIssue {
    std::string code;    // unknown_vocabulary | dangling_edge | duplicate_id | self_loop | bad_confidence | bad_token
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

// Lists every invariant violation; an empty report means the graph is
// well-formed. Violations are report entries, never failures.
ValidationReport validate_graph(const TwinGraph& graph);

// Disclosure-filtered projection of a graph. A field appears iff the ledger
// records it as disclosed for that object; objects with nothing disclosed
// are omitted; edges appear only if charged.
struct ViewObject {
    std::string object_id;
    std::optional<std::string> kind;
    std::optional<std::string> semantic_class;
    std::optional<std::string> sensitivity;
    std::optional<std::string> freshness;
    std::optional<std::string> size_bucket;
    std::optional<double> confidence;
    std::vector<std::string> contains;
    std::vector<std::string> usable_for;

    std::size_t disclosed_count() const;
};

struct PlannerView {
    std::string session_id;
    std::vector<ViewObject> objects;
    std::vector<TwinEdge> edges;
};

PlannerView restrict_view(const TwinGraph& graph, const BudgetLedger& ledger);

// View with every field disclosed; used by the local `project` inspection
// path, never sent across the boundary by the orchestrator.
PlannerView full_view(const TwinGraph& graph);

// Canonical wire document: UTF-8, lexicographically sorted keys and set
// members, no insignificant whitespace. Byte-stable for identical inputs.
// Throws std::invalid_argument if any token is outside its vocabulary.
std::string serialize_view(const PlannerView& view);

// Strict parse of the wire document. Throws std::invalid_argument on
// schema or vocabulary violations.
PlannerView parse_view(const std::string& document);

// The set of FieldIds a twin object could ever disclose (excluding edges).
FieldSet object_field_ids(const TwinObject& obj);

}  // namespace plantwin
