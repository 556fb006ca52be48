#include "plantwin/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace plantwin {

PqsResult pqs(const std::vector<std::string>& approved, const std::set<std::string>& expected) {
    std::set<std::string> approved_set(approved.begin(), approved.end());
    PqsResult r;
    if (approved_set.empty() && expected.empty()) {
        r.pqs = r.precision = r.recall = 1.0;
        return r;
    }
    std::size_t inter = 0;
    for (const auto& a : approved_set) inter += expected.count(a);
    r.precision = approved_set.empty() ? 0.0 : static_cast<double>(inter) / approved_set.size();
    r.recall = expected.empty() ? 0.0 : static_cast<double>(inter) / expected.size();
    r.pqs = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                           : 0.0;
    return r;
}

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

double snd(const std::vector<std::string>& boundary_payloads,
           const std::vector<std::string>& sensitive_items) {
    if (sensitive_items.empty()) return 1.0;
    std::string haystack;
    for (const auto& p : boundary_payloads) {
        haystack += lowercase(p);
        haystack += '\x1e';  // record separator: items never span payloads
    }
    std::size_t hits = 0;
    for (const auto& item : sensitive_items) {
        if (item.empty()) continue;
        if (haystack.find(lowercase(item)) != std::string::npos) ++hits;
    }
    return 1.0 - static_cast<double>(hits) / static_cast<double>(sensitive_items.size());
}

double nl(const BudgetLedger& ledger, const Catalog& catalog) {
    auto keys = ledger.registered_keys();
    if (keys.empty()) throw std::invalid_argument("nl: no registered objects");
    std::int64_t consumed = 0;
    std::int64_t capacity = 0;
    for (const auto& key : keys) {
        std::int64_t cap = ledger.cap_micro(key);
        capacity += cap;
        consumed += object_depleted(ledger, catalog, key) ? cap : ledger.spent_micro(key);
    }
    if (capacity <= 0) return 0.0;
    double value = static_cast<double>(consumed) / static_cast<double>(capacity);
    return std::clamp(value, 0.0, 1.0);
}

namespace {

TaskMetrics mean_of(const std::vector<const TaskMetrics*>& rows) {
    TaskMetrics m;
    m.snd = 0.0;
    if (rows.empty()) return m;
    for (const auto* r : rows) {
        m.pqs += r->pqs;
        m.precision += r->precision;
        m.recall += r->recall;
        m.snd += r->snd;
        m.nl += r->nl;
        m.excluded_objects += r->excluded_objects;
    }
    double n = static_cast<double>(rows.size());
    m.pqs /= n;
    m.precision /= n;
    m.recall /= n;
    m.snd /= n;
    m.nl /= n;
    return m;
}

nlohmann::json row_json(const TaskMetrics& m) {
    nlohmann::json j;
    j["pqs"] = m.pqs;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["snd"] = m.snd;
    j["nl"] = m.nl;
    return j;
}

}  // namespace

MetricsReport assemble_report(const std::vector<TaskMetrics>& tasks) {
    MetricsReport report;
    report.tasks = tasks;
    std::map<std::string, std::vector<const TaskMetrics*>> by_domain;
    std::vector<const TaskMetrics*> included;
    for (const auto& t : report.tasks) {
        if (t.degenerate) {
            report.excluded_tasks.push_back(t.task_id);
            continue;
        }
        included.push_back(&t);
        by_domain[t.domain].push_back(&t);
    }
    for (const auto& [domain, rows] : by_domain) {
        TaskMetrics m = mean_of(rows);
        m.domain = domain;
        report.per_domain[domain] = m;
    }
    report.combined = mean_of(included);
    report.combined.task_id = "combined";
    return report;
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json j;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& t : tasks) {
        nlohmann::json r = row_json(t);
        r["task_id"] = t.task_id;
        r["domain"] = t.domain;
        r["degenerate"] = t.degenerate;
        r["excluded_objects"] = t.excluded_objects;
        r["planner_fallback"] = t.planner_fallback;
        rows.push_back(r);
    }
    j["tasks"] = rows;
    nlohmann::json domains = nlohmann::json::object();
    for (const auto& [domain, m] : per_domain) domains[domain] = row_json(m);
    j["per_domain"] = domains;
    j["combined"] = row_json(combined);
    j["excluded_tasks"] = excluded_tasks;
    return j;
}

std::string MetricsReport::to_table() const {
    std::ostringstream out;
    out << std::left << std::setw(22) << "domain" << std::right << std::setw(8) << "PQS"
        << std::setw(8) << "Prec" << std::setw(8) << "SND" << std::setw(8) << "NL" << "\n";
    out << std::string(54, '-') << "\n";
    out << std::fixed << std::setprecision(3);
    for (const auto& [domain, m] : per_domain) {
        out << std::left << std::setw(22) << domain << std::right << std::setw(8) << m.pqs
            << std::setw(8) << m.precision << std::setw(8) << m.snd << std::setw(8) << m.nl << "\n";
    }
    out << std::string(54, '-') << "\n";
    out << std::left << std::setw(22) << "combined" << std::right << std::setw(8) << combined.pqs
        << std::setw(8) << combined.precision << std::setw(8) << combined.snd << std::setw(8)
        << combined.nl << "\n";
    if (!excluded_tasks.empty()) {
        out << "excluded tasks:";
        for (const auto& id : excluded_tasks) out << " " << id;
        out << "\n";
    }
    return out.str();
}

std::string MetricsReport::to_tsv() const {
    std::ostringstream out;
    out << "task_id\tdomain\tpqs\tprecision\trecall\tsnd\tnl\tdegenerate\n";
    out << std::fixed << std::setprecision(6);
    for (const auto& t : tasks) {
        out << t.task_id << "\t" << t.domain << "\t" << t.pqs << "\t" << t.precision << "\t"
            << t.recall << "\t" << t.snd << "\t" << t.nl << "\t" << (t.degenerate ? 1 : 0) << "\n";
    }
    return out.str();
}

}  // namespace plantwin
