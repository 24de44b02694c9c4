#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mim/config.hpp"

namespace mim {

// Seeded, fully replayable log of one run. Serialization is canonical JSON;
// two runs of the same config produce identical bytes.
struct RunRecord {
    std::string config_digest;
    nlohmann::json events = nlohmann::json::array();
    nlohmann::json metrics = nlohmann::json::object();

    nlohmann::json to_json() const;
    std::string canonical_bytes() const;
    std::string digest() const;
};

// One agent's world-model state: its candidate space, profile, and the
// registries they are defined over (shared across agents).
struct AgentState {
    AgentConfig cfg;
    ProfileState profile;
    CandidateSpace space;
};

class Simulation {
public:
    explicit Simulation(const RunConfig& cfg);

    const World& world() const { return world_; }
    const PhaseRegistry& registry() const { return registry_; }
    const std::vector<AgentState>& agents() const { return agents_; }
    const AgentState& agent(const std::string& id) const;

    // Advances one tick: every agent reads the same pre-step snapshot, then
    // all profile updates commit. Returns the events of this step.
    nlohmann::json step();

    RunRecord finish();  // metrics + record assembly after stepping

    RunRecord run();  // config.engine.steps steps, then finish

private:
    RunConfig cfg_;
    World world_;
    PhaseRegistry registry_;
    std::vector<AgentState> agents_;
    std::map<std::string, RngStream> streams_;
    nlohmann::json events_ = nlohmann::json::array();
    std::size_t step_index_ = 0;

    RngStream& stream(const std::string& name);
    nlohmann::json agent_tick(std::size_t agent_index, std::size_t observation,
                              ProfileState& next_profile);
};

RunRecord run(const RunConfig& cfg);

// Writes metrics.json and curves.csv (header "series,x,y") to out_dir,
// atomically. Returns the list of written paths.
std::vector<std::string> emit_metrics(const RunRecord& record, const std::string& out_dir);

}  // namespace mim
