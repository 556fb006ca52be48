#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plantwin/budget.hpp"
#include "plantwin/capability.hpp"

namespace plantwin {

struct PqsResult {
    double pqs = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// F1 between approved and expected capabilities. The approved multiset is
// collapsed to a set; empty approved gives precision 0; both empty gives
// pqs 1.
PqsResult pqs(const std::vector<std::string>& approved, const std::set<std::string>& expected);

// Fraction of sensitive items that never appear (case-insensitive substring)
// in any byte that crossed the trust boundary. Empty item list: 1.0.
double snd(const std::vector<std::string>& boundary_payloads,
           const std::vector<std::string>& sensitive_items);

// Normalized leakage: sum over registered objects of consumed budget divided
// by sum of caps, clipped to [0, 1]. A depleted object (disclosure still
// wanted by some capability but nothing affordable remains) counts at its
// full cap: the leftover headroom is unusable. Throws std::invalid_argument
// when nothing is registered.
double nl(const BudgetLedger& ledger, const Catalog& catalog);

struct TaskMetrics {
    std::string task_id;
    std::string domain;
    double pqs = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double snd = 1.0;
    double nl = 0.0;
    bool degenerate = false;  // empty plan
    int excluded_objects = 0;
    bool planner_fallback = false;
};

struct MetricsReport {
    std::vector<TaskMetrics> tasks;
    std::map<std::string, TaskMetrics> per_domain;  // mean values per domain
    TaskMetrics combined;                           // mean over non-excluded tasks
    std::vector<std::string> excluded_tasks;        // degenerate task ids

    nlohmann::json to_json() const;
    std::string to_table() const;  // fixed-width text, one row per domain
    std::string to_tsv() const;    // per-task vectors for external tools
};

MetricsReport assemble_report(const std::vector<TaskMetrics>& tasks);

}  // namespace plantwin
