#pragma once

#include <random>
#include <string>
#include <vector>

#include "plantwin/projection.hpp"

namespace plantwin {

// One synthesized raw artifact plus the ground-truth sensitive strings that
// were planted into it.
struct TemplateInstance {
    RawArtifact artifact;
    std::vector<std::string> planted;
};

// A parameterized raw-artifact generator. Fillers vary per instance so that
// candidate pools contain pairwise-distinct artifacts; optional identifier
// and secret blocks vary the projected sensitivity and tag fingerprint.
struct ArtifactTemplate {
    std::string id;
    std::string kind_token;      // kind the artifact is built to project to
    std::string semantic_hint;   // semantic class the content targets
};

// Frozen library: 44 templates across all six kinds and 20+ semantic
// classes. Versioned by content; regression values depend on it.
const std::vector<ArtifactTemplate>& template_library();

// Distinct-template capacity (pool sizes must not exceed it).
std::size_t template_capacity();

// Builds one artifact from the library entry at `index`. plant_secrets
// forces every secret-bearing section on; otherwise sections appear with
// their per-template probabilities. The artifact's mtime is a negative age
// offset to be rebased on the caller's clock.
TemplateInstance instantiate_template(std::size_t index, std::mt19937_64& rng, bool plant_secrets);

// Library index by template id; throws std::out_of_range if absent.
std::size_t template_index(const std::string& id);

}  // namespace plantwin
