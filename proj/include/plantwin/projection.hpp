#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plantwin/redaction.hpp"
#include "plantwin/twin.hpp"
#include "plantwin/vocab.hpp"

namespace plantwin {

struct RawArtifact {
    std::string path;       // filesystem-relative
    std::string bytes;      // raw content
    std::int64_t mtime = 0; // unix seconds
    std::size_t size() const { return bytes.size(); }
};

struct RawMetadata {
    std::size_t size_bytes = 0;
    std::int64_t mtime = 0;
    std::map<std::string, int> entity_hits;  // category name -> count
};

// Stage-1 output: typed, tagged, still trusted-side.
struct ExtractedObject {
    std::string source_path;
    vocab::Kind kind = vocab::Kind::document;
    std::string semantic_class;
    std::vector<std::string> contains;
    std::vector<std::string> usable_for;
    double confidence = 0.3;
    RawMetadata raw;
};

// Stage-1 seam. The default extractor is deterministic; a model-backed
// implementation can be slotted in without touching the rest of the
// pipeline.
class Extractor {
public:
    virtual ~Extractor() = default;
    virtual ExtractedObject extract(const RawArtifact& artifact) const = 0;
};

class HeuristicExtractor : public Extractor {
public:
    ExtractedObject extract(const RawArtifact& artifact) const override;
};

// Content hash used as the object's budget identity. Stays local.
std::string artifact_local_key(const RawArtifact& artifact);

// Stage-3 buckets.
vocab::SizeBucket size_bucket_of(std::size_t bytes);
vocab::Freshness freshness_of(std::int64_t mtime, std::int64_t now);
vocab::CountBucket count_bucket_of(std::size_t n);
vocab::Sensitivity sensitivity_of(const std::map<std::string, int>& entity_hits);

struct GeneralizedMetadata {
    vocab::SizeBucket size_bucket;
    vocab::Freshness freshness;
    vocab::Sensitivity sensitivity;
};

GeneralizedMetadata generalize(const RawMetadata& raw, std::int64_t now);

struct DeclaredRelation {
    std::string src_path;
    std::string dst_path;
    std::string relation;  // blocks | conflicts_with | requires_capability
};

struct ProjectionConfig {
    std::int64_t now = 0;                    // reference clock for freshness
    double similar_jaccard_threshold = 0.6;  // over redacted token sets
    RedactionRuleSet rules = RedactionRuleSet::builtin();
    std::shared_ptr<const Extractor> extractor;  // defaults to HeuristicExtractor
};

// The full pipeline: extract -> redact -> generalize -> schema projection,
// plus edge derivation (imports => depends_on, filename reference =>
// derived_from, token-Jaccard >= threshold => similar_to, declared
// prerequisites => their relation). Total: degenerate artifacts fall back to
// document/unknown_generic. Identical env + rules + seed give a
// byte-identical twin.
TwinGraph project_environment(const std::vector<RawArtifact>& env, const ProjectionConfig& config,
                              std::uint64_t session_seed,
                              const std::vector<DeclaredRelation>& declared = {});

// Raw capability output, produced trusted-side by the executor.
struct ExecutionResult {
    std::string capability;
    std::string output_schema;
    nlohmann::json payload;
};

struct SanitizedResult {
    std::string capability;
    std::string output_schema;
    nlohmann::json payload;

    std::string to_document() const;
};

// Stages 2-4 applied to an execution result before it crosses the boundary:
// artifact paths and basenames are replaced by object ids, entity spans are
// redacted, and digit runs of four or more are coarsened to "many". Stage 1
// is skipped; the result type is fixed by the capability.
SanitizedResult sanitize_output(const ExecutionResult& result, const RedactionRuleSet& rules,
                                const std::map<std::string, std::string>& path_to_object_id);

}  // namespace plantwin
