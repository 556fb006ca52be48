#include "plantwin/budget.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "plantwin/vocab.hpp"

namespace plantwin {

namespace {

std::int64_t ln_micro_ceil(int n) {
    if (n < 1) throw std::invalid_argument("calibrated_weights: empty vocabulary");
    if (n == 1) return 0;
    return static_cast<std::int64_t>(std::ceil(std::log(static_cast<double>(n)) * kMicro));
}

}  // namespace

WeightProfile WeightProfile::paper_default() {
    WeightProfile p;
    p.name = "paper_default";
    p.calibrated = false;
    p.micro[static_cast<int>(FieldKey::kind)] = 500'000;
    p.micro[static_cast<int>(FieldKey::semantic_class)] = 2'000'000;
    p.micro[static_cast<int>(FieldKey::sensitivity)] = 1'000'000;
    p.micro[static_cast<int>(FieldKey::freshness)] = 500'000;
    p.micro[static_cast<int>(FieldKey::size_bucket)] = 500'000;
    p.micro[static_cast<int>(FieldKey::confidence)] = 0;
    p.micro[static_cast<int>(FieldKey::contains_tag)] = 1'000'000;
    p.micro[static_cast<int>(FieldKey::usable_for_tag)] = 500'000;
    p.micro[static_cast<int>(FieldKey::edge)] = 3'000'000;
    return p;
}

VocabularySizes VocabularySizes::builtin() {
    VocabularySizes s;
    s.kind = static_cast<int>(vocab::kind_tokens().size());
    s.semantic_class = static_cast<int>(vocab::semantic_classes().size());
    s.sensitivity = static_cast<int>(vocab::sensitivity_tokens().size());
    s.freshness = static_cast<int>(vocab::freshness_tokens().size());
    s.size_bucket = static_cast<int>(vocab::size_bucket_tokens().size());
    return s;
}

WeightProfile calibrated_weights(const VocabularySizes& sizes) {
    WeightProfile p;
    p.name = "calibrated";
    p.calibrated = true;
    p.micro[static_cast<int>(FieldKey::kind)] = ln_micro_ceil(sizes.kind);
    p.micro[static_cast<int>(FieldKey::semantic_class)] = ln_micro_ceil(sizes.semantic_class);
    p.micro[static_cast<int>(FieldKey::sensitivity)] = ln_micro_ceil(sizes.sensitivity);
    p.micro[static_cast<int>(FieldKey::freshness)] = ln_micro_ceil(sizes.freshness);
    p.micro[static_cast<int>(FieldKey::size_bucket)] = ln_micro_ceil(sizes.size_bucket);
    p.micro[static_cast<int>(FieldKey::confidence)] = 0;
    // Presence/absence branching for set members and edges.
    p.micro[static_cast<int>(FieldKey::contains_tag)] = ln_micro_ceil(2);
    p.micro[static_cast<int>(FieldKey::usable_for_tag)] = ln_micro_ceil(2);
    p.micro[static_cast<int>(FieldKey::edge)] = ln_micro_ceil(2);
    return p;
}

std::int64_t default_tau_micro(const std::string& sensitivity_token) {
    if (sensitivity_token == "low") return 12 * kMicro;
    if (sensitivity_token == "restricted") return 8 * kMicro;
    if (sensitivity_token == "high") return 5 * kMicro;
    throw std::invalid_argument("unknown sensitivity token: " + sensitivity_token);
}

BudgetLedger::BudgetLedger(WeightProfile profile, double alpha)
    : profile_(std::move(profile)), alpha_(alpha) {
    if (!(alpha_ > 0.0)) throw std::invalid_argument("alpha must be positive");
}

void BudgetLedger::register_object(const TwinObject& obj) {
    const std::string& key = obj.budget_key();
    if (records_.count(key)) return;
    Record r;
    r.kind = obj.kind;
    r.sensitivity = obj.sensitivity;
    r.tau_micro = default_tau_micro(obj.sensitivity);
    r.cap_micro = static_cast<std::int64_t>(std::llround(alpha_ * static_cast<double>(r.tau_micro)));
    r.potential = object_field_ids(obj);
    records_.emplace(key, std::move(r));
}

bool BudgetLedger::is_registered(const std::string& key) const { return records_.count(key) > 0; }

const BudgetLedger::Record& BudgetLedger::record(const std::string& key) const {
    auto it = records_.find(key);
    if (it == records_.end()) throw std::out_of_range("unknown object: " + key);
    return it->second;
}

std::int64_t BudgetLedger::estimate_micro(const std::string& key, const FieldSet& fields) const {
    const Record& r = record(key);
    std::int64_t total = 0;
    for (const FieldId& f : fields) {
        if (!r.disclosed.count(f)) total += profile_.cost_micro(f);
    }
    return total;
}

double BudgetLedger::estimate_cost(const std::string& key, const FieldSet& fields) const {
    return micro_to_cost(estimate_micro(key, fields));
}

bool BudgetLedger::can_disclose(const std::string& key, const FieldSet& fields) const {
    const Record& r = record(key);
    return r.spent_micro + estimate_micro(key, fields) <= r.cap_micro;
}

std::optional<double> BudgetLedger::charge(const std::string& key, const FieldSet& fields, int turn) {
    auto it = records_.find(key);
    if (it == records_.end()) throw std::out_of_range("unknown object: " + key);
    Record& r = it->second;
    std::int64_t delta = estimate_micro(key, fields);
    if (r.spent_micro + delta > r.cap_micro) return std::nullopt;  // refusal: ledger unchanged
    std::vector<std::string> charged;
    for (const FieldId& f : fields) {
        if (r.disclosed.insert(f).second) charged.push_back(f.to_string());
    }
    r.spent_micro += delta;
    events_.push_back(ChargeEvent{turn, key, std::move(charged), delta, r.spent_micro});
    return micro_to_cost(delta);
}

std::int64_t BudgetLedger::spent_micro(const std::string& key) const { return record(key).spent_micro; }
std::int64_t BudgetLedger::cap_micro(const std::string& key) const { return record(key).cap_micro; }

std::int64_t BudgetLedger::headroom_micro(const std::string& key) const {
    const Record& r = record(key);
    return r.cap_micro - r.spent_micro;
}

const FieldSet& BudgetLedger::disclosed(const std::string& key) const { return record(key).disclosed; }

bool BudgetLedger::field_disclosed(const std::string& key, const FieldId& f) const {
    return record(key).disclosed.count(f) > 0;
}

std::int64_t BudgetLedger::recompute_micro(const std::string& key) const {
    const Record& r = record(key);
    std::int64_t total = 0;
    for (const FieldId& f : r.disclosed) total += profile_.cost_micro(f);
    return total;
}

const std::string& BudgetLedger::kind_of(const std::string& key) const { return record(key).kind; }
const std::string& BudgetLedger::sensitivity_of(const std::string& key) const {
    return record(key).sensitivity;
}
const FieldSet& BudgetLedger::potential_fields(const std::string& key) const {
    return record(key).potential;
}

std::vector<std::string> BudgetLedger::registered_keys() const {
    std::vector<std::string> keys;
    keys.reserve(records_.size());
    for (const auto& [k, _] : records_) keys.push_back(k);
    return keys;
}

std::string BudgetLedger::serialize_state() const {
    nlohmann::json doc;
    doc["alpha"] = alpha_;
    doc["profile"] = profile_.name;
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& [key, r] : records_) {
        nlohmann::json o;
        o["key"] = key;
        o["sensitivity"] = r.sensitivity;
        o["tau_micro"] = r.tau_micro;
        o["cap_micro"] = r.cap_micro;
        o["spent_micro"] = r.spent_micro;
        nlohmann::json fields = nlohmann::json::array();
        for (const FieldId& f : r.disclosed) fields.push_back(f.to_string());
        o["disclosed"] = fields;
        objs.push_back(o);
    }
    doc["objects"] = objs;
    return doc.dump();
}

double grain(const std::vector<double>& charged_per_call) {
    if (charged_per_call.empty()) throw std::invalid_argument("grain: empty usage log");
    double sum = std::accumulate(charged_per_call.begin(), charged_per_call.end(), 0.0);
    return sum / static_cast<double>(charged_per_call.size());
}

}  // namespace plantwin
