#pragma once

#include <string>

#include "mim/engine.hpp"

namespace mim {

struct HypothesisOutcome {
    std::string id;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    nlohmann::json details = nlohmann::json::object();

    nlohmann::json to_json() const;
};

// Two agents on the identical observation stream: total variation distance
// between their foregrounding-frequency histograms over phase points.
HypothesisOutcome h1_divergence(const RunConfig& cfg, const RunRecord& record);

// Receptivity prediction from the receiver profile (directional
// compatibility and error intensity against the threshold) scored against
// simulated processability of the optimally aligned delivery.
HypothesisOutcome h2_receptivity(const RunConfig& cfg);

// Mean receiver error of index-preserving raw delivery minus the error under
// the optimized alignment map; positive means alignment helps.
HypothesisOutcome h3_alignment_effect(const RunConfig& cfg);

// Fine- vs coarse-horizon foregrounding: total variation distance of the two
// agents' plan-kind histograms restricted to {Act, Explore} vs
// {Reinterpret, Suspend}.
HypothesisOutcome h4_resolution_strategy(const RunConfig& cfg, const RunRecord& record);

// Dispatch on cfg.scenario.hypothesis. The record is used by the histogram
// hypotheses (h1, h4) and ignored by the construction hypotheses (h2, h3).
HypothesisOutcome evaluate_hypothesis(const RunConfig& cfg, const RunRecord& record);

}  // namespace mim
