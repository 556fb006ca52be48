#pragma once

#include <map>
#include <string>
#include <vector>

#include "plantwin/capability.hpp"
#include "plantwin/projection.hpp"
#include "plantwin/twin.hpp"

namespace plantwin {

// Everything the trusted execution plane needs to act on raw data: the twin
// for typed lookups, the raw artifacts, and the path -> object_id map used
// by output sanitization.
struct ExecutionContext {
    const TwinGraph* graph = nullptr;
    const RedactionRuleSet* rules = nullptr;
    std::map<std::string, const RawArtifact*> artifact_by_object_id;
    std::map<std::string, std::string> path_to_object_id;

    const TwinObject* twin_of(const std::string& object_id) const;
    const RawArtifact* raw_of(const std::string& object_id) const;
};

ExecutionContext build_execution_context(const std::vector<RawArtifact>& env, const TwinGraph& graph,
                                         const RedactionRuleSet& rules);

class Executor {
public:
    virtual ~Executor() = default;
    // Throws std::runtime_error on failure; the gatekeeper maps that to a
    // rejection without charging.
    virtual ExecutionResult execute(const Capability& cap, const std::vector<std::string>& inputs,
                                    const ExecutionContext& ctx) const = 0;
};

// Deterministic rule-based implementations of the ten default capabilities.
// Outputs are composed of vocabulary tokens, buckets, booleans, object ids
// and template text; raw content spans are never copied into results.
class BuiltinExecutor : public Executor {
public:
    ExecutionResult execute(const Capability& cap, const std::vector<std::string>& inputs,
                            const ExecutionContext& ctx) const override;
};

}  // namespace plantwin
