#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "plantwin/projection.hpp"

namespace plantwin {

// One benchmark task: a request over a small raw environment with planted
// ground-truth sensitive items and the capability set a competent plan
// would use.
struct Task {
    std::string id;
    std::string domain;
    std::string request;
    std::vector<RawArtifact> environment;
    std::set<std::string> expected_capabilities;
    std::vector<std::string> sensitive_items;
    std::int64_t now = 0;  // reference clock for freshness bucketing
    std::vector<DeclaredRelation> declared_edges;
};

const std::vector<std::string>& corpus_domains();  // the ten task domains

// Deterministic synthetic corpus: tasks cycle through all ten domains,
// environments come from the template library, and each task plants
// sensitive artifacts recorded in sensitive_items.
std::vector<Task> generate_tasks(int count, std::uint64_t seed);

// Directory layout: one directory per task holding task.meta (id, domain,
// request, expected capabilities, sensitive items, clock, per-file ages)
// and an env/ subtree with the raw artifacts.
void save_corpus(const std::vector<Task>& tasks, const std::string& directory);
std::vector<Task> load_corpus(const std::string& directory);

}  // namespace plantwin
