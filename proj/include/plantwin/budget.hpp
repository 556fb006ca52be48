#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plantwin/field.hpp"
#include "plantwin/twin.hpp"

namespace plantwin {

// Costs are held in integer micro-units (1e-6) so that accounting is exact:
// the default profile's 0.5-grid weights convert exactly, and calibrated
// log-weights are rounded *up* so the calibration condition w_f >= ln(b_f)
// survives quantization.
inline constexpr std::int64_t kMicro = 1'000'000;

inline double micro_to_cost(std::int64_t m) { return static_cast<double>(m) / kMicro; }

struct WeightProfile {
    std::string name;
    bool calibrated = false;
    // Per-unit cost by FieldKey index: scalars per field, tags per member,
    // edges per edge.
    std::int64_t micro[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};

    std::int64_t cost_micro(const FieldId& f) const { return micro[static_cast<int>(f.key)]; }
    double cost(const FieldId& f) const { return micro_to_cost(cost_micro(f)); }

    // Field costs exactly as shipped: kind 0.5, semantic_class 2.0,
    // contains 1.0/tag, usable_for 0.5/tag, edge 3.0/edge, freshness 0.5,
    // sensitivity 1.0; plus size_bucket 0.5 and confidence 0.0.
    static WeightProfile paper_default();
};

struct VocabularySizes {
    int kind = 0;
    int semantic_class = 0;
    int sensitivity = 0;
    int freshness = 0;
    int size_bucket = 0;

    static VocabularySizes builtin();
};

// w_f = ln(|V_f|) per scalar field; per-tag and per-edge cost ln 2
// (presence/absence branching). Throws std::invalid_argument on an empty
// vocabulary.
WeightProfile calibrated_weights(const VocabularySizes& sizes);

// Default thresholds by sensitivity: low 12.0, restricted 8.0, high 5.0.
std::int64_t default_tau_micro(const std::string& sensitivity_token);

struct ChargeEvent {
    int turn = 0;
    std::string object_key;
    std::vector<std::string> fields;  // FieldId::to_string(), sorted
    std::int64_t delta_micro = 0;
    std::int64_t b_after_micro = 0;
};

// Per-object cumulative disclosure accounting. Mutation is single-writer
// per object key; reads may be concurrent with no writer present.
//
// Invariants: B(o) equals the recomputed sum over the disclosed set, charges
// for already-disclosed fields cost zero, and no sequence of operations can
// push B(o) above alpha * tau(o). Refused charges leave the ledger
// byte-identical (no state change, no event).
class BudgetLedger {
public:
    explicit BudgetLedger(WeightProfile profile, double alpha = 1.0);

    const WeightProfile& profile() const { return profile_; }
    double alpha() const { return alpha_; }

    // Idempotent. Records the object's kind, threshold and the full set of
    // fields it could ever disclose. Does not disclose anything by itself.
    void register_object(const TwinObject& obj);
    bool is_registered(const std::string& key) const;

    // Sum of per-unit costs over the requested fields not already disclosed.
    // Throws std::out_of_range for an unknown object.
    std::int64_t estimate_micro(const std::string& key, const FieldSet& fields) const;
    double estimate_cost(const std::string& key, const FieldSet& fields) const;

    // True iff B(o) + estimate <= alpha * tau(o). Side-effect free.
    bool can_disclose(const std::string& key, const FieldSet& fields) const;

    // Extends D(o) and B(o) by exactly the estimate, appending one event.
    // Returns the charged delta, or nullopt on refusal with the ledger
    // unchanged.
    std::optional<double> charge(const std::string& key, const FieldSet& fields, int turn = 0);

    std::int64_t spent_micro(const std::string& key) const;
    double spent(const std::string& key) const { return micro_to_cost(spent_micro(key)); }
    std::int64_t cap_micro(const std::string& key) const;
    double cap(const std::string& key) const { return micro_to_cost(cap_micro(key)); }
    std::int64_t headroom_micro(const std::string& key) const;

    const FieldSet& disclosed(const std::string& key) const;
    bool field_disclosed(const std::string& key, const FieldId& f) const;

    // Recomputed from D(o); equals spent_micro exactly.
    std::int64_t recompute_micro(const std::string& key) const;

    const std::string& kind_of(const std::string& key) const;
    const std::string& sensitivity_of(const std::string& key) const;
    // Every non-edge field the object could disclose (captured at
    // registration).
    const FieldSet& potential_fields(const std::string& key) const;

    std::vector<std::string> registered_keys() const;  // sorted
    const std::vector<ChargeEvent>& events() const { return events_; }

    // Canonical JSON snapshot of the accounting state (records sorted by
    // key). Byte-identical before and after any refused charge.
    std::string serialize_state() const;

private:
    struct Record {
        std::string kind;
        std::string sensitivity;
        std::int64_t tau_micro = 0;
        std::int64_t cap_micro = 0;
        std::int64_t spent_micro = 0;
        FieldSet disclosed;
        FieldSet potential;
    };

    const Record& record(const std::string& key) const;

    WeightProfile profile_;
    double alpha_ = 1.0;
    std::map<std::string, Record> records_;
    std::vector<ChargeEvent> events_;
};

// Mean weighted field cost actually charged per capability call. Throws
// std::invalid_argument on an empty log.
double grain(const std::vector<double>& charged_per_call);

}  // namespace plantwin
