#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plantwin/budget.hpp"
#include "plantwin/field.hpp"
#include "plantwin/projection.hpp"
#include "plantwin/twin.hpp"

namespace plantwin {

// A raw candidate pool plus the projections an adversary (who knows the
// pipeline) can compute for every candidate. target selection happens per
// trial.
struct CandidatePool {
    std::vector<RawArtifact> artifacts;  // pairwise distinct
    std::vector<TwinObject> twins;       // projection of each candidate
    int k = 0;
    std::uint64_t seed = 0;
};

// Samples k distinct templates with fresh fillers and projects each
// candidate independently (fresh session ids). Throws std::invalid_argument
// when k exceeds the template capacity.
CandidatePool make_pool(int k, std::uint64_t seed);

enum class ReidStrategy { random, kind_only, kind_semantic, full_fingerprint };

const char* strategy_name(ReidStrategy s);
std::optional<ReidStrategy> strategy_from_name(const std::string& name);

struct ReidReport {
    ReidStrategy strategy;
    int k = 0;
    int trials = 0;
    int targets_per_trial = 0;
    int samples = 0;
    double accuracy = 0.0;
    double stderr_ = 0.0;  // binomial standard error of the estimate
    double mrr = 0.0;

    nlohmann::json to_json() const;
};

// The re-identification game: per trial a fresh pool, per target the
// adversary picks the candidate maximizing field overlap with the target's
// twin restricted to the strategy's field set; ties break uniformly.
// Results aggregate per target.
ReidReport run_reid_game(int k, int trials, int targets_per_trial, ReidStrategy strategy,
                         std::uint64_t seed);

// Same game repeated on one fixed pool (fresh tie-breaking per trial).
ReidReport play_reid_on_pool(const CandidatePool& pool, int trials, int targets_per_trial,
                             ReidStrategy strategy, std::uint64_t seed);

struct ScalingEntry {
    int k = 0;
    ReidStrategy strategy;
    double accuracy = 0.0;
    double stderr_ = 0.0;
};

struct ScalingReport {
    std::vector<ScalingEntry> entries;
    int trials = 0;
    int targets_per_trial = 0;

    nlohmann::json to_json() const;
    const ScalingEntry* find(int k, ReidStrategy s) const;
};

// Re-runs the game across pool sizes; all strategies are evaluated on the
// same pools so the curves are directly comparable.
ScalingReport run_scaling(const std::vector<int>& pool_sizes, int trials, int targets_per_trial,
                          const std::vector<ReidStrategy>& strategies, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Theorem verifiers. All operate on the Appendix-style attribute view of a
// pool: kind, semantic_class, sensitivity, freshness plus per-tag presence
// bits; equivalence classes are computed by brute force.

// Pattern of one object restricted to a disclosed field set.
std::string disclosed_pattern(const TwinObject& obj, const FieldSet& disclosed);

struct AnonymityReport {
    int pool_size = 0;
    int min_class_size = 0;   // k in the bound
    double eta = 1.0;
    int trials = 0;
    double success = 0.0;     // empirical MAP adversary success
    double stderr_ = 0.0;
    double bound = 1.0;       // eta / (eta + k - 1)
    double oracle_success = 0.0;  // brute-force posterior expectation
    bool degenerate = false;  // every class a singleton: bound vacuous
    bool holds = false;       // success <= bound + 3 * stderr
    double weight_sum = 0.0;  // calibrated cost of the disclosed set
    nlohmann::json to_json() const;
};

// eta-bounded side information: per trial the hint points at the true
// object with likelihood multiplier sampled in [1, eta], renormalized
// within the target's equivalence class; the MAP adversary follows the
// hint.
AnonymityReport verify_anonymity(const CandidatePool& pool, const FieldSet& disclosed_fields,
                                 double eta, int trials, std::uint64_t seed);

struct UnlinkReport {
    int pool_size = 0;
    int support = 0;          // |Z_U|
    double epsilon = 0.0;     // ln |Z_U|
    double exact_best_ratio = 0.0;     // optimal adversary, exhaustive: binding check
    double empirical_best_ratio = 0.0; // smoothed, from simulated transcripts
    bool smoothing_used = false;
    double optimal_adversary_accuracy = 0.5;  // balanced same/diff trials
    double accuracy_stderr = 0.0;
    double weight_sum = 0.0;  // sum of calibrated costs over the overlap set
    bool holds = false;       // exact ratio <= support && epsilon <= weight_sum
    bool uniform_support = false;
    nlohmann::json to_json() const;
};

// Cross-session linkage game over the overlap field set U. Fresh ids carry
// nothing, so linkage reduces to overlap-pattern statistics; the exhaustive
// support computation is the binding assertion, the simulated ratio is
// reported alongside.
UnlinkReport run_unlinkability(const CandidatePool& pool, const FieldSet& overlap_fields, int trials,
                               std::uint64_t seed);

struct CompositionStep {
    std::string field;
    double delta = 0.0;
    std::size_t ec_size = 0;
    double bound = 0.0;  // |EC_0| * exp(-sum delta) at this prefix
};

struct CompositionReport {
    bool refused = false;      // profile not calibrated
    std::string message;
    std::size_t ec_initial = 0;
    std::vector<CompositionStep> trace;
    int violations = 0;
    double worst_slack = 0.0;  // min over prefixes of ec_size - bound
    nlohmann::json to_json() const;
};

// Replays a disclosure sequence against a brute-force equivalence-class
// oracle and checks |EC_t| >= |EC_0| * exp(-sum of charged deltas) at every
// prefix. Only valid under a calibrated profile.
CompositionReport verify_composition(const std::vector<TwinObject>& pool,
                                     const TwinObject& target,
                                     const std::vector<FieldId>& disclosure_sequence,
                                     const WeightProfile& profile);

struct CompositionSweep {
    int instances = 0;
    int violations = 0;
    double worst_slack = 0.0;
    nlohmann::json to_json() const;
};

// Random product-structured pools and random disclosure sequences; counts
// bound violations (expected: zero). Pools are balanced on purpose: the
// bound's refinement step assumes field values split a class evenly, the
// same within-class uniformity the unlinkability bound relies on. On skewed
// pools the true value can select an undersized subclass and the inequality
// genuinely fails; verify_composition still reports such runs honestly.
CompositionSweep verify_composition_random(int instances, std::uint64_t seed);

// Pool built as a full product over a random choice of fields and value
// subsets (times a copy count): every disclosure splits every class into
// equal parts.
std::vector<TwinObject> balanced_attribute_pool(std::mt19937_64& rng);

// Uniform random twin over the bounded attribute space (tags i.i.d.
// presence bits). Used by tests and skew demonstrations.
TwinObject random_attribute_twin(std::mt19937_64& rng, const std::string& object_id);

}  // namespace plantwin
