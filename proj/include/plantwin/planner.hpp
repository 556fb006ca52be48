#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "plantwin/capability.hpp"
#include "plantwin/twin.hpp"

namespace plantwin {

// Everything the remote side is allowed to see, and nothing else: the
// disclosure-filtered view, the catalog summary, the sanitized request text
// and the static skill prompt.
struct PlannerRequest {
    std::string skill_prompt;
    std::string view_document;     // serialize_view output
    nlohmann::json catalog_summary;
    std::string request_text;      // already passed through redact()

    std::string to_document() const;
};

// Deterministic text teaching a planner the twin schema, the plan wire
// format and the capability surface. Contains no session data.
std::string build_skill_prompt(const Catalog& catalog);

// Keyword-rule planner: maps request terms and disclosed fields to steps,
// ties broken by catalog order. Emits at least one step whenever the view
// contains an object (fallback: summarize the highest-confidence object);
// an empty view yields an empty plan.
Plan heuristic_plan(const PlannerView& view, const Catalog& catalog, const std::string& request_text);

// Defensive parse: accepts the exact wire document or the first well-formed
// plan block embedded in surrounding prose. nullopt when nothing parses.
std::optional<Plan> parse_plan(const std::string& document);

class Planner {
public:
    virtual ~Planner() = default;
    virtual std::string name() const = 0;
    // nullopt = planner unavailable; the orchestrator falls back to the
    // heuristic planner.
    virtual std::optional<Plan> plan(const PlannerRequest& request) = 0;
};

class HeuristicPlanner : public Planner {
public:
    std::string name() const override { return "heuristic"; }
    std::optional<Plan> plan(const PlannerRequest& request) override;

private:
    Catalog catalog_ = Catalog::default_catalog();
};

// Single-POST adapter for a remote planning endpoint. The full request
// document goes out, a plan document (possibly wrapped in prose) comes
// back. Responses over the size cap, timeouts and unparseable output all
// degrade to planner-unavailable.
class RemotePlanner : public Planner {
public:
    RemotePlanner(std::string endpoint, std::string api_key = "",
                  std::chrono::seconds timeout = std::chrono::seconds(120),
                  std::size_t response_cap_bytes = 256 * 1024);

    std::string name() const override { return "remote"; }
    std::optional<Plan> plan(const PlannerRequest& request) override;

private:
    std::string endpoint_;
    std::string api_key_;
    std::chrono::seconds timeout_;
    std::size_t response_cap_;
};

}  // namespace plantwin
