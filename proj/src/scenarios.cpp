#include "mim/scenarios.hpp"

#include <cmath>

#include "mim/errors.hpp"

namespace mim {

namespace {

// Total variation distance between two count maps normalized over the union
// of keys; an empty histogram counts as all-zero.
double tv_distance(const nlohmann::json& a, const nlohmann::json& b,
                   const std::vector<std::string>* restrict = nullptr) {
    std::map<std::string, std::pair<double, double>> mass;
    double na = 0.0, nb = 0.0;
    auto admit = [&](const std::string& key) {
        if (!restrict) return true;
        for (const std::string& k : *restrict)
            if (k == key) return true;
        return false;
    };
    for (const auto& kv : a.items())
        if (admit(kv.key())) {
            mass[kv.key()].first = kv.value().get<double>();
            na += kv.value().get<double>();
        }
    for (const auto& kv : b.items())
        if (admit(kv.key())) {
            mass[kv.key()].second = kv.value().get<double>();
            nb += kv.value().get<double>();
        }
    double tv = 0.0;
    for (const auto& [key, pq] : mass) {
        (void)key;
        const double pa = na > 0.0 ? pq.first / na : 0.0;
        const double pb = nb > 0.0 ? pq.second / nb : 0.0;
        tv += std::fabs(pa - pb);
    }
    return 0.5 * tv;
}

std::pair<std::string, std::string> two_agent_ids(const RunConfig& cfg) {
    if (cfg.agents.size() != 2)
        throw SchemaError("scenario needs exactly two agents, got " +
                          std::to_string(cfg.agents.size()));
    return {cfg.agents[0].id, cfg.agents[1].id};
}

// Sender candidate for construction scenarios: the top-foregrounding
// admissible candidate of the named agent, ties by enumeration order.
std::size_t top_candidate(const AgentState& st) {
    std::size_t best = SIZE_MAX;
    for (std::size_t i = 0; i < st.space.candidates.size(); ++i) {
        if (!st.space.candidates[i].admissible) continue;
        if (best == SIZE_MAX ||
            st.profile.theta.foreground[i] > st.profile.theta.foreground[best])
            best = i;
    }
    if (best == SIZE_MAX) throw EmptyAdmissibleSpace("sender has no admissible candidate");
    return best;
}

}  // namespace

nlohmann::json HypothesisOutcome::to_json() const {
    return {{"id", id},
            {"statistic", statistic},
            {"threshold", threshold},
            {"pass", pass},
            {"details", details}};
}

HypothesisOutcome h1_divergence(const RunConfig& cfg, const RunRecord& record) {
    if (!cfg.engine.shared_observations)
        throw SchemaError("h1 requires engine.shared_observations");
    const auto [a, b] = two_agent_ids(cfg);
    const nlohmann::json& agents = record.metrics["agents"];

    HypothesisOutcome out;
    out.id = "h1";
    out.threshold = cfg.scenario.value("threshold", 0.5);
    out.statistic =
        tv_distance(agents[a]["foreground_counts"], agents[b]["foreground_counts"]);
    out.pass = out.statistic >= out.threshold;
    out.details = {{"histogram_a", agents[a]["foreground_counts"]},
                   {"histogram_b", agents[b]["foreground_counts"]}};
    return out;
}

HypothesisOutcome h2_receptivity(const RunConfig& cfg) {
    if (!cfg.scenario.contains("receiver") || !cfg.scenario.contains("probes"))
        throw SchemaError("h2 requires scenario.receiver and scenario.probes");
    Simulation sim(cfg);
    const AgentState& receiver = sim.agent(cfg.scenario["receiver"].get<std::string>());
    const AgentState& sender = cfg.scenario.contains("sender")
                                   ? sim.agent(cfg.scenario["sender"].get<std::string>())
                                   : receiver;

    nlohmann::json rows = nlohmann::json::array();
    std::vector<bool> outcomes;
    std::size_t correct = 0;
    for (const auto& probe : cfg.scenario["probes"]) {
        const std::size_t phase = sim.registry().index_of(probe.get<std::string>());
        const Candidate& cand = sender.space.candidates[phase];

        // Prediction from the profile alone: where would a raw delivery land,
        // and does the intensity rule or compatibility admit it there?
        const AlignmentReport naive =
            naive_delivery(sim.world(), sim.registry(), cand, receiver.profile, receiver.space,
                           cfg.engine.align.delta);
        const std::size_t landing = receiver.space.candidates.empty()
                                        ? 0
                                        : sim.registry().index_of(naive.receiver_key);
        const auto [intensity, crossed] =
            error_intensity(receiver.profile, landing, naive.receiver_error);
        const bool predicted = !crossed || naive.mu > 0.0;

        const AlignmentReport optimal =
            optimize_alignment(sim.world(), sim.registry(), cand, receiver.profile,
                               receiver.space, sender.cfg.transmit_cap, cfg.engine.align);
        outcomes.push_back(optimal.processable);
        if (predicted == optimal.processable) ++correct;
        rows.push_back({{"probe", probe},
                        {"predicted", predicted},
                        {"processable", optimal.processable},
                        {"naive_error", naive.receiver_error},
                        {"intensity", intensity},
                        {"mu", naive.mu}});
    }
    if (outcomes.empty()) throw SchemaError("h2: empty probe set");

    // Control: uniformly random labels scored against the same outcomes.
    const std::size_t draws = cfg.scenario.value("control_draws", std::size_t{200});
    RngStream control(cfg.seed, "h2-control");
    std::size_t control_correct = 0;
    for (std::size_t k = 0; k < draws; ++k) {
        const bool label = control.uniform() < 0.5;
        if (label == outcomes[k % outcomes.size()]) ++control_correct;
    }

    HypothesisOutcome out;
    out.id = "h2";
    const double margin = cfg.scenario.value("margin", 0.2);
    out.threshold = 0.5 + margin;
    out.statistic = static_cast<double>(correct) / static_cast<double>(outcomes.size());
    out.pass = out.statistic > out.threshold;
    out.details = {{"probes", rows},
                   {"control_accuracy",
                    static_cast<double>(control_correct) / static_cast<double>(draws)}};
    return out;
}

HypothesisOutcome h3_alignment_effect(const RunConfig& cfg) {
    if (!cfg.scenario.contains("sender") || !cfg.scenario.contains("receiver"))
        throw SchemaError("h3 requires scenario.sender and scenario.receiver");
    Simulation sim(cfg);
    const AgentState& sender = sim.agent(cfg.scenario["sender"].get<std::string>());
    const AgentState& receiver = sim.agent(cfg.scenario["receiver"].get<std::string>());
    const Candidate& cand = sender.space.candidates[top_candidate(sender)];

    const AlignmentReport naive =
        naive_delivery(sim.world(), sim.registry(), cand, receiver.profile, receiver.space,
                       cfg.engine.align.delta);
    const AlignmentReport optimized =
        cfg.scenario.value("force_naive", false)
            ? naive
            : optimize_alignment(sim.world(), sim.registry(), cand, receiver.profile,
                                 receiver.space, sender.cfg.transmit_cap, cfg.engine.align);

    HypothesisOutcome out;
    out.id = "h3";
    out.threshold = cfg.scenario.value("threshold", 0.0);
    out.statistic = naive.receiver_error - optimized.receiver_error;
    out.pass = out.statistic > out.threshold;
    out.details = {{"sender_candidate", cand.key},
                   {"naive_error", naive.receiver_error},
                   {"naive_landing", naive.receiver_key},
                   {"optimized_error", optimized.receiver_error},
                   {"optimized_landing", optimized.receiver_key},
                   {"optimized_loss", optimized.transformation_loss},
                   {"optimized_class", align_class_name(optimized.classification)}};
    return out;
}

HypothesisOutcome h4_resolution_strategy(const RunConfig& cfg, const RunRecord& record) {
    const auto [a, b] = two_agent_ids(cfg);
    const nlohmann::json& agents = record.metrics["agents"];
    static const std::vector<std::string> restricted = {"Act", "Explore", "Reinterpret",
                                                        "Suspend"};
    HypothesisOutcome out;
    out.id = "h4";
    out.threshold = cfg.scenario.value("threshold", 0.4);
    out.statistic =
        tv_distance(agents[a]["plan_kinds"], agents[b]["plan_kinds"], &restricted);
    out.pass = out.statistic >= out.threshold;
    out.details = {{"plans_a", agents[a]["plan_kinds"]}, {"plans_b", agents[b]["plan_kinds"]}};
    return out;
}

HypothesisOutcome evaluate_hypothesis(const RunConfig& cfg, const RunRecord& record) {
    const std::string id = cfg.scenario.value("hypothesis", std::string());
    if (id == "h1") return h1_divergence(cfg, record);
    if (id == "h2") return h2_receptivity(cfg);
    if (id == "h3") return h3_alignment_effect(cfg);
    if (id == "h4") return h4_resolution_strategy(cfg, record);
    throw SchemaError("scenario.hypothesis: expected h1..h4, got '" + id + "'");
}

}  // namespace mim
