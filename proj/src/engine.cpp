#include "mim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "mim/canonical.hpp"
#include "mim/errors.hpp"

namespace mim {

namespace {

nlohmann::json costs_json(const PlanCosts& c) {
    return {{"body", c.body}, {"time", c.time},     {"skill", c.skill},
            {"coop", c.coop}, {"comm", c.comm},     {"total", c.total()}};
}

nlohmann::json align_json(const AlignmentReport& r) {
    nlohmann::json map = nlohmann::json::array();
    for (const Dist& row : r.channel.channel.rows) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < row.size(); ++i)
            if (row[i] > row[best]) best = i;
        map.push_back(best);
    }
    return {{"receiver_key", r.receiver_key},
            {"map", map},
            {"transformation_loss", r.transformation_loss},
            {"receiver_error", r.receiver_error},
            {"mu", r.mu},
            {"processable", r.processable},
            {"reason", r.reason},
            {"class", align_class_name(r.classification)}};
}

}  // namespace

nlohmann::json RunRecord::to_json() const {
    return {{"config_digest", config_digest}, {"events", events}, {"metrics", metrics}};
}

std::string RunRecord::canonical_bytes() const { return canonical_dump(to_json()); }

std::string RunRecord::digest() const { return sha256_hex(canonical_bytes()); }

Simulation::Simulation(const RunConfig& cfg)
    : cfg_(cfg), world_(World::build(cfg.world_document)) {
    registry_ = PhaseRegistry::build(world_, cfg.targets, cfg.bases, cfg.resolutions);
    // All agents share the construction seed; spaces differ only through each
    // agent's own solver options.
    const std::uint64_t space_seed = splitmix64(cfg_.seed ^ fnv1a("space"));
    for (const AgentConfig& a : cfg_.agents) {
        AgentState st;
        st.cfg = a;
        st.space = enumerate_candidate_space(world_, registry_, cfg_.epsilon, a.solver, space_seed);
        st.profile.theta.foreground = a.foreground.resolve(registry_, a.id);
        st.profile.theta.explore = a.explore.resolve(registry_, a.id);
        st.profile.theta.stabilize = a.stabilize.resolve(registry_, a.id);
        st.profile.firing.error_cost = a.error_cost.resolve(registry_, a.id);
        st.profile.firing.threshold = a.threshold.resolve(registry_, a.id);
        st.profile.maturity = a.maturity.resolve(registry_, a.id);
        st.profile.plasticity = a.plasticity;
        st.profile.formation.target_weights = a.target_weights;
        st.profile.formation.solver = a.solver;
        st.profile.formation.transmit_cap = a.transmit_cap;
        agents_.push_back(std::move(st));
    }
}

const AgentState& Simulation::agent(const std::string& id) const {
    for (const AgentState& a : agents_)
        if (a.cfg.id == id) return a;
    throw UnknownReferenceError("agent '" + id + "'");
}

RngStream& Simulation::stream(const std::string& name) {
    auto it = streams_.find(name);
    if (it == streams_.end())
        it = streams_.emplace(name, RngStream(cfg_.seed, name)).first;
    return it->second;
}

nlohmann::json Simulation::agent_tick(std::size_t agent_index, std::size_t observation,
                                      ProfileState& next_profile) {
    AgentState& st = agents_[agent_index];
    const std::string& id = st.cfg.id;
    nlohmann::json ev;
    ev["step"] = step_index_;
    ev["agent"] = id;
    ev["observation"] = observation;

    // Pointwise errors for every candidate at this observation.
    std::vector<double> errors(st.space.candidates.size(), 0.0);
    for (std::size_t i = 0; i < errors.size(); ++i)
        errors[i] = prediction_error(world_, registry_, st.space.candidates[i], observation);

    PostOperatingState post =
        foreground(st.profile, st.space, registry_, errors, st.cfg.score_weights,
                   st.cfg.firing_temperature, stream("agent:" + id + ":fire"));
    const Candidate& fired = st.space.candidates[post.fired];
    ev["fired"] = fired.key;
    ev["fired_error"] = post.fired_error;
    ev["intensity"] = post.intensity;
    ev["crossed"] = post.crossed;
    ev["pi"] = post.pi;

    // Plan generation and selection.
    std::vector<std::string> peers;
    for (const AgentState& other : agents_)
        if (other.cfg.id != id) peers.push_back(other.cfg.id);
    std::vector<Plan> plans = generate_plans(st.cfg.plan_costs, fired.key, peers);
    std::vector<Plan> feasible;
    for (Plan& p : plans)
        if (p.costs.total() <= st.cfg.feasibility_cap) feasible.push_back(std::move(p));
    if (feasible.empty()) throw NoFeasiblePlan("agent " + id + ": all plans exceed the cap");

    const Horizon fired_horizon = registry_.resolutions[registry_.points[post.fired].resolution].horizon;
    std::vector<double> priorities;
    for (const Plan& p : feasible)
        priorities.push_back(plan_priority(st.cfg.plan_weights, p,
                                           st.cfg.plan_context[static_cast<std::size_t>(p.kind)],
                                           fired_horizon));
    auto [plan, queue] = select_plan(feasible, priorities, st.cfg.plan_temperature,
                                     st.cfg.queue_capacity, stream("agent:" + id + ":plan"));
    ev["plan"] = {{"kind", plan_kind_name(plan.kind)},
                  {"candidate", plan.candidate_key},
                  {"cost", costs_json(plan.costs)}};
    if (!plan.peer.empty()) ev["plan"]["peer"] = plan.peer;
    (void)queue;  // queue is ephemeral within the step

    // Execute the plan's desk-scale effect.
    Feedback fb;
    fb.action_cost_delta = plan.costs.total();
    fb.coop_cost_delta = plan.costs.coop;
    fb.value_delta = st.cfg.plan_context[static_cast<std::size_t>(plan.kind)].value;

    switch (plan.kind) {
        case PlanKind::Suspend:
            break;
        case PlanKind::Report: {
            const std::size_t feature =
                registry_.bases[registry_.points[post.fired].basis].map[observation];
            const std::size_t rep =
                stream("agent:" + id + ":rep").sample(fired.encoder.rows[feature].probs);
            ev["representation"] = rep;
            break;
        }
        case PlanKind::Reinterpret: {
            // Re-foreground with the fired basis masked out.
            std::vector<bool> mask(st.space.candidates.size(), true);
            const std::size_t fired_basis = registry_.points[post.fired].basis;
            for (std::size_t i = 0; i < mask.size(); ++i)
                if (registry_.points[i].basis == fired_basis) mask[i] = false;
            try {
                PostOperatingState re =
                    foreground(st.profile, st.space, registry_, errors, st.cfg.score_weights,
                               st.cfg.firing_temperature, stream("agent:" + id + ":fire"), &mask);
                ev["refired"] = st.space.candidates[re.fired].key;
                fb.error_delta = errors[re.fired] - errors[post.fired];
            } catch (const EmptyAdmissibleSpace&) {
                // Nothing left outside the fired basis; reinterpretation is a no-op.
            }
            break;
        }
        case PlanKind::Explore:
        case PlanKind::Act: {
            const std::size_t extra =
                stream("agent:" + id + ":obs").sample(world_.obs_marginal().probs);
            ev["extra_observation"] = extra;
            const double before = errors[post.fired];
            const double after = prediction_error(world_, registry_, fired, extra);
            fb.error_delta = after - before;
            break;
        }
        case PlanKind::Align: {
            const AgentState& peer = agent(plan.peer);
            AlignmentReport report =
                optimize_alignment(world_, registry_, fired, peer.profile, peer.space,
                                   st.cfg.transmit_cap, cfg_.engine.align);
            const std::size_t feature =
                registry_.bases[registry_.points[post.fired].basis].map[observation];
            const std::size_t rep =
                stream("agent:" + id + ":rep").sample(fired.encoder.rows[feature].probs);
            std::size_t delivered = 0;
            const Dist& row = report.channel.channel.rows[rep];
            for (std::size_t i = 0; i < row.size(); ++i)
                if (row[i] > row[delivered]) delivered = i;
            ev["representation"] = rep;
            ev["delivered"] = delivered;
            ev["align"] = align_json(report);
            fb.alignment_delta = -report.transformation_loss;
            break;
        }
    }

    ev["feedback"] = {{"dL", fb.error_delta},
                      {"dU", fb.value_delta},
                      {"dC_act", fb.action_cost_delta},
                      {"dC_coop", fb.coop_cost_delta},
                      {"dPhi", fb.alignment_delta}};

    FeedbackOptions fo;
    fo.sensitization_threshold = st.cfg.sensitization_threshold;
    fo.adapt_threshold = st.cfg.adapt_threshold;
    next_profile = apply_feedback(st.profile, post.fired, fb, post.intensity, fo);
    return ev;
}

nlohmann::json Simulation::step() {
    nlohmann::json events = nlohmann::json::array();
    // Shared-observation mode draws once per step for every agent.
    std::size_t shared_obs = 0;
    if (cfg_.engine.shared_observations)
        shared_obs = stream("shared:obs").sample(world_.obs_marginal().probs);

    // Read phase: every agent computes against the pre-step profiles.
    std::vector<ProfileState> next(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const std::size_t obs =
            cfg_.engine.shared_observations
                ? shared_obs
                : stream("agent:" + agents_[i].cfg.id + ":obs").sample(world_.obs_marginal().probs);
        events.push_back(agent_tick(i, obs, next[i]));
    }
    // Commit phase.
    for (std::size_t i = 0; i < agents_.size(); ++i) agents_[i].profile = std::move(next[i]);

    for (const auto& ev : events) events_.push_back(ev);
    ++step_index_;
    return events;
}

RunRecord Simulation::finish() {
    RunRecord record;
    record.config_digest = config_digest(cfg_);
    record.events = events_;

    nlohmann::json per_agent = nlohmann::json::object();
    for (const AgentState& st : agents_) {
        nlohmann::json m;
        m["foreground_counts"] = nlohmann::json::object();
        m["plan_kinds"] = nlohmann::json::object();
        m["mean_intensity"] = 0.0;
        m["crossed_count"] = 0;
        m["align"] = {{"count", 0}, {"mean_transformation_loss", 0.0}, {"classes", nlohmann::json::object()}};
        per_agent[st.cfg.id] = std::move(m);
    }
    for (const auto& ev : events_) {
        if (!ev.contains("agent")) continue;
        nlohmann::json& m = per_agent[ev["agent"].get<std::string>()];
        const std::string fired = ev["fired"].get<std::string>();
        m["foreground_counts"][fired] = m["foreground_counts"].value(fired, 0) + 1;
        const std::string kind = ev["plan"]["kind"].get<std::string>();
        m["plan_kinds"][kind] = m["plan_kinds"].value(kind, 0) + 1;
        m["mean_intensity"] = m["mean_intensity"].get<double>() + ev["intensity"].get<double>();
        if (ev["crossed"].get<bool>())
            m["crossed_count"] = m["crossed_count"].get<int>() + 1;
        if (ev.contains("align")) {
            nlohmann::json& al = m["align"];
            al["count"] = al["count"].get<int>() + 1;
            al["mean_transformation_loss"] =
                al["mean_transformation_loss"].get<double>() +
                ev["align"]["transformation_loss"].get<double>();
            const std::string cls = ev["align"]["class"].get<std::string>();
            al["classes"][cls] = al["classes"].value(cls, 0) + 1;
        }
    }
    // Turn sums into means.
    for (auto it = per_agent.begin(); it != per_agent.end(); ++it) {
        nlohmann::json& m = it.value();
        double n = 0.0;
        for (const auto& kv : m["foreground_counts"].items()) n += kv.value().get<int>();
        if (n > 0.0) m["mean_intensity"] = m["mean_intensity"].get<double>() / n;
        const int ac = m["align"]["count"].get<int>();
        if (ac > 0)
            m["align"]["mean_transformation_loss"] =
                m["align"]["mean_transformation_loss"].get<double>() / ac;
    }

    record.metrics = {{"steps", step_index_},
                      {"agent_count", agents_.size()},
                      {"agents", per_agent}};
    return record;
}

RunRecord Simulation::run() {
    for (std::size_t s = 0; s < cfg_.engine.steps; ++s) {
        try {
            step();
        } catch (const Error& e) {
            // A propagated module error aborts the step with a logged cause.
            events_.push_back({{"step", step_index_}, {"error", e.what()}});
            break;
        }
    }
    return finish();
}

RunRecord run(const RunConfig& cfg) { return Simulation(cfg).run(); }

std::vector<std::string> emit_metrics(const RunRecord& record, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir);

    const std::string metrics_path = (fs::path(out_dir) / "metrics.json").string();
    atomic_write(metrics_path, canonical_dump(record.metrics));

    // Plot-ready long format: one series per agent and quantity.
    std::string csv = "series,x,y\n";
    char buf[96];
    for (const auto& ev : record.events) {
        if (!ev.contains("agent")) continue;
        const std::string agent = ev["agent"].get<std::string>();
        const std::size_t step = ev["step"].get<std::size_t>();
        std::snprintf(buf, sizeof(buf), "intensity.%s,%zu,%.17g\n", agent.c_str(), step,
                      ev["intensity"].get<double>());
        csv += buf;
        std::snprintf(buf, sizeof(buf), "error.%s,%zu,%.17g\n", agent.c_str(), step,
                      ev["fired_error"].get<double>());
        csv += buf;
    }
    const std::string curves_path = (fs::path(out_dir) / "curves.csv").string();
    atomic_write(curves_path, csv);
    return {metrics_path, curves_path};
}

}  // namespace mim
