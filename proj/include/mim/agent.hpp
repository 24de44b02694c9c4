#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "mim/candidate.hpp"
#include "mim/rng.hpp"

namespace mim {

// Score fields over phase points: foregrounding (unrestricted), exploration
// and stabilization (non-negative).
struct OperatingProfile {
    std::vector<double> foreground;
    std::vector<double> explore;
    std::vector<double> stabilize;
};

struct Plasticity {
    double foreground_rate = 0.0;  // in [0, 1]
    double maturity_rate = 0.0;
    double threshold_rate = 0.0;
};

// Firing parameters: error cost and reflective threshold per phase point.
struct Firing {
    std::vector<double> error_cost;
    std::vector<double> threshold;
};

// Representation-formation profile: target inclusion weights, solver options
// used when building this agent's candidates, and the transmit cap on
// representation cardinality.
struct Formation {
    std::map<std::string, double> target_weights;
    IBOptions solver;
    std::size_t transmit_cap = 64;

    double weight_for(const std::string& target) const {
        auto it = target_weights.find(target);
        return it == target_weights.end() ? 1.0 : it->second;
    }
};

struct ProfileState {
    OperatingProfile theta;
    Plasticity plasticity;
    Firing firing;
    Formation formation;
    std::vector<double> maturity;  // in [0, 1] per phase point
};

// Weights of the linear foregrounding score
//   S(c) = r + explore*e - stabilize*s + error*L + maturity*sigma.
struct ScoreWeights {
    double explore = 0.0;
    double stabilize = 0.0;
    double error = 0.0;
    double maturity = 0.0;
};

struct PostOperatingState {
    std::size_t fired = 0;       // phase index of the fired candidate
    std::vector<double> pi;      // selection distribution over all phase points
    double fired_error = 0.0;    // L at the fired candidate
    double intensity = 0.0;      // error_cost * L
    bool crossed = false;
    std::vector<double> direction;  // foregrounding direction field
};

enum class PlanKind { Report, Suspend, Reinterpret, Explore, Act, Align };

const char* plan_kind_name(PlanKind k);
PlanKind parse_plan_kind(const std::string& s);
constexpr std::size_t kPlanKindCount = 6;

struct PlanCosts {
    double body = 0.0;
    double time = 0.0;
    double skill = 0.0;
    double coop = 0.0;
    double comm = 0.0;

    double total() const { return body + time + skill + coop + comm; }
};

struct Plan {
    PlanKind kind = PlanKind::Suspend;
    std::string candidate_key;
    std::string peer;  // required for Align
    PlanCosts costs;
};

// Per-plan scoring context supplied by the caller (scenario config in runs).
struct PlanContext {
    double expected_error_drop = 0.0;
    double value = 0.0;
    double compute_cost = 0.0;
    double observation_cost = 0.0;
};

struct PlanWeights {
    double error_reduction = 0.0;
    double value = 0.0;
    double compute_cost = 0.0;
    double observation_cost = 0.0;
    double action_cost = 0.0;
    double horizon = 0.0;
};

struct PlanQueue {
    std::vector<std::pair<Plan, double>> entries;  // non-increasing priority
    std::size_t capacity = 0;
};

struct Feedback {
    double error_delta = 0.0;        // dL: new minus old prediction error
    double value_delta = 0.0;        // dU
    double action_cost_delta = 0.0;  // dC_act realized
    double coop_cost_delta = 0.0;    // dC_coop realized
    double alignment_delta = 0.0;    // dPhi: negative transformation loss
};

// Pointwise prediction error at one observation: KL between the exact
// posterior and the candidate's predictive through the representation.
// Averaging over the observation marginal reproduces admissibility_gap.
double prediction_error(const World& w, const PhaseRegistry& reg, const Candidate& c,
                        std::size_t obs);

std::pair<double, bool> error_intensity(const ProfileState& st, std::size_t phase, double error);

// Softmax foregrounding over admissible candidates whose target carries a
// positive inclusion weight. Temperature 0 is argmax with enumeration-order
// ties. `mask` (optional) removes phase points from consideration.
PostOperatingState foreground(const ProfileState& st, const CandidateSpace& space,
                              const PhaseRegistry& reg, const std::vector<double>& errors,
                              const ScoreWeights& weights, double temperature, RngStream& rng,
                              const std::vector<bool>* mask = nullptr);

// Direction field v(x) = error_weight * L(x) + (e(x) - s(x)); the error term
// counts only admissible candidates.
std::vector<double> foregrounding_direction(const ProfileState& st, const CandidateSpace& space,
                                            const std::vector<double>& errors,
                                            const ScoreWeights& weights);

// Fixed plan set {Report, Suspend, Reinterpret, Explore, Act} + Align per peer.
std::vector<Plan> generate_plans(const std::array<PlanCosts, kPlanKindCount>& costs,
                                 const std::string& fired_key,
                                 const std::vector<std::string>& peers);

// Linear priority; the horizon bonus couples the fired resolution tag to the
// plan kind (fine -> Act/Explore, coarse -> Reinterpret/Suspend).
double plan_priority(const PlanWeights& w, const Plan& plan, const PlanContext& ctx,
                     Horizon fired_horizon);

// Softmax selection over feasible priorities; the rest enter the queue in
// priority order up to capacity. Throws NoFeasiblePlan when nothing survives
// the cap filter (apply the cap before calling; this checks emptiness).
std::pair<Plan, PlanQueue> select_plan(const std::vector<Plan>& plans,
                                       const std::vector<double>& priorities, double temperature,
                                       std::size_t queue_capacity, RngStream& rng);

struct FeedbackOptions {
    double sensitization_threshold = 1.0;  // error_cost gate for defensive fixation
    bool adapt_threshold = false;          // EMA threshold adaptation, off by default
};

// Returns the updated profile; touches exactly the fired phase point.
ProfileState apply_feedback(const ProfileState& st, std::size_t phase, const Feedback& fb,
                            double observed_intensity, const FeedbackOptions& opts);

}  // namespace mim
