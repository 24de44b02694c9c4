#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mim/agent.hpp"
#include "mim/align.hpp"
#include "mim/candidate.hpp"
#include "mim/world.hpp"

#include "json.hpp"

namespace mim {

// Sparse score table: explicit per-phase entries over a broadcast default.
struct SparseTable {
    double fallback = 0.0;
    std::map<std::string, double> entries;

    static SparseTable parse(const nlohmann::json& j, const std::string& where);
    std::vector<double> resolve(const PhaseRegistry& reg, const std::string& where) const;
};

struct AgentConfig {
    std::string id;
    SparseTable foreground, explore, stabilize;
    SparseTable error_cost, threshold, maturity;
    Plasticity plasticity;
    std::map<std::string, double> target_weights;
    IBOptions solver;
    std::size_t transmit_cap = 64;
    ScoreWeights score_weights;
    PlanWeights plan_weights;
    double firing_temperature = 1.0;
    double plan_temperature = 0.0;
    std::size_t queue_capacity = 3;
    double feasibility_cap = 1e9;
    double sensitization_threshold = 1.0;
    bool adapt_threshold = false;
    std::array<PlanCosts, kPlanKindCount> plan_costs{};
    std::array<PlanContext, kPlanKindCount> plan_context{};
};

struct EngineSettings {
    std::size_t steps = 0;
    bool shared_observations = false;
    AlignOptions align;
};

// Fully validated run configuration. `document` preserves the parsed JSON for
// canonical serialization and digesting; `world_document` is the world spec
// after resolving a file reference.
struct RunConfig {
    nlohmann::json document;
    nlohmann::json world_document;
    std::uint64_t seed = 0;
    std::vector<std::string> targets;
    std::vector<ConditioningBasis> bases;
    std::vector<Resolution> resolutions;
    Labeling labeling;
    double epsilon = 0.05;
    EngineSettings engine;
    std::vector<AgentConfig> agents;  // sorted by id
    nlohmann::json scenario;          // empty object when absent

    const AgentConfig& agent(const std::string& id) const;
};

// Parses and validates; error messages carry the JSON path of the first
// offending field. The world file reference resolves relative to the config.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& doc, const std::string& base_dir);

// Canonical bytes of the config document (sorted keys, 17-digit floats).
std::string canonical_config_bytes(const RunConfig& cfg);
// SHA-256 of the canonical bytes.
std::string config_digest(const RunConfig& cfg);

}  // namespace mim
