#include "mim/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "mim/errors.hpp"
#include "mim/info.hpp"

namespace mim {

const char* plan_kind_name(PlanKind k) {
    static const char* names[] = {"Report", "Suspend", "Reinterpret", "Explore", "Act", "Align"};
    return names[static_cast<int>(k)];
}

PlanKind parse_plan_kind(const std::string& s) {
    for (std::size_t i = 0; i < kPlanKindCount; ++i)
        if (s == plan_kind_name(static_cast<PlanKind>(i))) return static_cast<PlanKind>(i);
    throw SchemaError("unknown plan kind '" + s + "'");
}

double prediction_error(const World& w, const PhaseRegistry& reg, const Candidate& c,
                        std::size_t obs) {
    const PhasePoint& pt = reg.points.at(c.phase);
    const std::size_t target = reg.target_indices[pt.target];
    const std::size_t feature = reg.bases[pt.basis].map.at(obs);
    return kl_divergence(w.posterior_target(target, obs), c.predictive(feature));
}

std::pair<double, bool> error_intensity(const ProfileState& st, std::size_t phase, double error) {
    const double intensity = st.firing.error_cost.at(phase) * error;
    return {intensity, intensity > st.firing.threshold.at(phase)};
}

PostOperatingState foreground(const ProfileState& st, const CandidateSpace& space,
                              const PhaseRegistry& reg, const std::vector<double>& errors,
                              const ScoreWeights& weights, double temperature, RngStream& rng,
                              const std::vector<bool>* mask) {
    const std::size_t n = space.candidates.size();
    std::vector<std::size_t> active;
    std::vector<double> score;
    std::vector<double> inclusion;
    for (std::size_t i = 0; i < n; ++i) {
        if (!space.candidates[i].admissible) continue;
        if (mask && !(*mask)[i]) continue;
        const PhasePoint& pt = reg.points[i];
        const double chi = st.formation.weight_for(reg.target_names[pt.target]);
        if (!(chi > 0.0)) continue;
        active.push_back(i);
        inclusion.push_back(chi);
        score.push_back(st.theta.foreground[i] + weights.explore * st.theta.explore[i] -
                        weights.stabilize * st.theta.stabilize[i] + weights.error * errors[i] +
                        weights.maturity * st.maturity[i]);
    }
    if (active.empty()) throw EmptyAdmissibleSpace("no admissible candidate to foreground");

    PostOperatingState post;
    post.pi.assign(n, 0.0);
    if (temperature <= 0.0) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < active.size(); ++k)
            if (score[k] > score[best]) best = k;
        post.fired = active[best];
        post.pi[post.fired] = 1.0;
    } else {
        const double top = *std::max_element(score.begin(), score.end());
        std::vector<double> weight(active.size());
        double z = 0.0;
        for (std::size_t k = 0; k < active.size(); ++k) {
            weight[k] = inclusion[k] * std::exp((score[k] - top) / temperature);
            z += weight[k];
        }
        for (std::size_t k = 0; k < active.size(); ++k) post.pi[active[k]] = weight[k] / z;
        post.fired = active[rng.sample(weight)];
    }

    post.fired_error = errors[post.fired];
    std::tie(post.intensity, post.crossed) = error_intensity(st, post.fired, post.fired_error);
    post.direction = foregrounding_direction(st, space, errors, weights);
    return post;
}

std::vector<double> foregrounding_direction(const ProfileState& st, const CandidateSpace& space,
                                            const std::vector<double>& errors,
                                            const ScoreWeights& weights) {
    const std::size_t n = space.candidates.size();
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double err = space.candidates[i].admissible ? errors[i] : 0.0;
        v[i] = weights.error * err + (st.theta.explore[i] - st.theta.stabilize[i]);
    }
    return v;
}

std::vector<Plan> generate_plans(const std::array<PlanCosts, kPlanKindCount>& costs,
                                 const std::string& fired_key,
                                 const std::vector<std::string>& peers) {
    std::vector<Plan> plans;
    for (PlanKind k : {PlanKind::Report, PlanKind::Suspend, PlanKind::Reinterpret,
                       PlanKind::Explore, PlanKind::Act}) {
        Plan p;
        p.kind = k;
        p.candidate_key = fired_key;
        p.costs = costs[static_cast<std::size_t>(k)];
        plans.push_back(std::move(p));
    }
    for (const std::string& peer : peers) {
        Plan p;
        p.kind = PlanKind::Align;
        p.candidate_key = fired_key;
        p.peer = peer;
        p.costs = costs[static_cast<std::size_t>(PlanKind::Align)];
        plans.push_back(std::move(p));
    }
    return plans;
}

double plan_priority(const PlanWeights& w, const Plan& plan, const PlanContext& ctx,
                     Horizon fired_horizon) {
    double bonus = 0.0;
    if (fired_horizon == Horizon::Fine &&
        (plan.kind == PlanKind::Act || plan.kind == PlanKind::Explore))
        bonus = 1.0;
    if (fired_horizon == Horizon::Coarse &&
        (plan.kind == PlanKind::Reinterpret || plan.kind == PlanKind::Suspend))
        bonus = 1.0;
    return w.error_reduction * ctx.expected_error_drop + w.value * ctx.value -
           w.compute_cost * ctx.compute_cost - w.observation_cost * ctx.observation_cost -
           w.action_cost * plan.costs.total() + w.horizon * bonus;
}

namespace {

// Tie order: plan kind, then candidate key, then peer.
bool plan_before(const Plan& a, const Plan& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.candidate_key != b.candidate_key) return a.candidate_key < b.candidate_key;
    return a.peer < b.peer;
}

}  // namespace

std::pair<Plan, PlanQueue> select_plan(const std::vector<Plan>& plans,
                                       const std::vector<double>& priorities, double temperature,
                                       std::size_t queue_capacity, RngStream& rng) {
    if (plans.empty()) throw NoFeasiblePlan("empty plan list");

    std::size_t chosen;
    if (temperature <= 0.0) {
        chosen = 0;
        for (std::size_t i = 1; i < plans.size(); ++i) {
            if (priorities[i] > priorities[chosen] ||
                (priorities[i] == priorities[chosen] && plan_before(plans[i], plans[chosen])))
                chosen = i;
        }
    } else {
        const double top = *std::max_element(priorities.begin(), priorities.end());
        std::vector<double> weight(plans.size());
        for (std::size_t i = 0; i < plans.size(); ++i)
            weight[i] = std::exp((priorities[i] - top) / temperature);
        chosen = rng.sample(weight);
    }

    PlanQueue queue;
    queue.capacity = queue_capacity;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < plans.size(); ++i)
        if (i != chosen) rest.push_back(i);
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
        if (priorities[a] != priorities[b]) return priorities[a] > priorities[b];
        return plan_before(plans[a], plans[b]);
    });
    for (std::size_t i : rest) {
        if (queue.entries.size() >= queue.capacity) break;  // low priority drops out
        queue.entries.emplace_back(plans[i], priorities[i]);
    }
    return {plans[chosen], queue};
}

ProfileState apply_feedback(const ProfileState& st, std::size_t phase, const Feedback& fb,
                            double observed_intensity, const FeedbackOptions& opts) {
    ProfileState out = st;
    const Plasticity& lr = st.plasticity;

    // Error reduction strengthens foregrounding at the fired point.
    out.theta.foreground[phase] += lr.foreground_rate * (-fb.error_delta);
    // Costly failure re-strengthens as defensive fixation.
    if (fb.error_delta > 0.0 &&
        st.firing.error_cost[phase] >= opts.sensitization_threshold) {
        out.theta.stabilize[phase] += lr.foreground_rate * fb.error_delta;
    }
    // Success matures the direction; failure leaves maturity unchanged.
    if (fb.error_delta <= 0.0) {
        out.maturity[phase] += lr.maturity_rate * (1.0 - out.maturity[phase]);
        out.maturity[phase] = std::clamp(out.maturity[phase], 0.0, 1.0);
    }
    if (opts.adapt_threshold) {
        out.firing.threshold[phase] = (1.0 - lr.threshold_rate) * out.firing.threshold[phase] +
                                      lr.threshold_rate * observed_intensity;
    }
    return out;
}

}  // namespace mim
