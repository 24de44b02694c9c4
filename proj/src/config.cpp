#include "mim/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mim/canonical.hpp"
#include "mim/errors.hpp"

namespace mim {

namespace {

double require_number(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number()) throw SchemaError(where + ": expected a number");
    return j.get<double>();
}

double number_or(const nlohmann::json& obj, const char* key, double fallback,
                 const std::string& where) {
    if (!obj.contains(key)) return fallback;
    return require_number(obj[key], where + "." + key);
}

bool bool_or(const nlohmann::json& obj, const char* key, bool fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) throw SchemaError(where + "." + key + ": expected a boolean");
    return obj[key].get<bool>();
}

// Sections must be objects when present; a scalar in their place is a
// schema error, not a silent fallback to defaults.
nlohmann::json section_or_empty(const nlohmann::json& obj, const char* key,
                                const std::string& where) {
    if (!obj.contains(key)) return nlohmann::json::object();
    if (!obj[key].is_object()) throw SchemaError(where + "." + key + ": expected an object");
    return obj[key];
}

bool is_count(const nlohmann::json& j) {
    return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

std::size_t size_or(const nlohmann::json& obj, const char* key, std::size_t fallback,
                    const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!is_count(obj[key])) throw SchemaError(where + "." + key + ": expected a count");
    return obj[key].get<std::size_t>();
}

}  // namespace

SparseTable SparseTable::parse(const nlohmann::json& j, const std::string& where) {
    SparseTable t;
    if (j.is_number()) {
        t.fallback = j.get<double>();
        return t;
    }
    if (!j.is_object()) throw SchemaError(where + ": expected a number or an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const double v = require_number(it.value(), where + "." + it.key());
        if (it.key() == "default") {
            t.fallback = v;
        } else {
            t.entries[it.key()] = v;
        }
    }
    return t;
}

std::vector<double> SparseTable::resolve(const PhaseRegistry& reg, const std::string& where) const {
    std::vector<double> out(reg.size(), fallback);
    for (const auto& [key, value] : entries) {
        auto it = reg.key_to_point.find(key);
        if (it == reg.key_to_point.end())
            throw UnknownReferenceError(where + ": unknown phase key '" + key + "'");
        out[it->second] = value;
    }
    return out;
}

namespace {

ConditioningBasis parse_basis(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("id") || !j.contains("map"))
        throw SchemaError(where + ": basis needs id and map");
    std::vector<std::size_t> map;
    for (const auto& v : j["map"]) {
        if (!is_count(v)) throw SchemaError(where + ".map: expected indices");
        map.push_back(v.get<std::size_t>());
    }
    return ConditioningBasis::make(j["id"].get<std::string>(), j.value("domain", std::string()),
                                   std::move(map));
}

Resolution parse_resolution(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("id") || !j.contains("cardinality"))
        throw SchemaError(where + ": resolution needs id and cardinality");
    Resolution r;
    r.id = j["id"].get<std::string>();
    r.cardinality = size_or(j, "cardinality", 1, where);
    if (r.cardinality < 1) throw SchemaError(where + ".cardinality: must be >= 1");
    r.beta = number_or(j, "beta", 0.0, where);
    if (r.beta < 0.0) throw SchemaError(where + ".beta: must be >= 0");
    const std::string horizon = j.value("horizon", std::string("fine"));
    if (horizon == "fine") {
        r.horizon = Horizon::Fine;
    } else if (horizon == "coarse") {
        r.horizon = Horizon::Coarse;
    } else {
        throw SchemaError(where + ".horizon: expected 'fine' or 'coarse'");
    }
    return r;
}

PlanCosts parse_costs(const nlohmann::json& j, const std::string& where) {
    PlanCosts c;
    c.body = number_or(j, "body", 0.0, where);
    c.time = number_or(j, "time", 0.0, where);
    c.skill = number_or(j, "skill", 0.0, where);
    c.coop = number_or(j, "coop", 0.0, where);
    c.comm = number_or(j, "comm", 0.0, where);
    for (double v : {c.body, c.time, c.skill, c.coop, c.comm})
        if (v < 0.0) throw SchemaError(where + ": costs must be >= 0");
    return c;
}

AgentConfig parse_agent(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("id")) throw SchemaError(where + ": agent needs an id");
    AgentConfig a;
    a.id = j["id"].get<std::string>();

    const nlohmann::json profile = section_or_empty(j, "profile", where);
    a.foreground = SparseTable::parse(profile.value("foreground", nlohmann::json(0.0)),
                                      where + ".profile.foreground");
    a.explore =
        SparseTable::parse(profile.value("explore", nlohmann::json(0.0)), where + ".profile.explore");
    a.stabilize = SparseTable::parse(profile.value("stabilize", nlohmann::json(0.0)),
                                     where + ".profile.stabilize");

    const nlohmann::json firing = section_or_empty(j, "firing", where);
    a.error_cost =
        SparseTable::parse(firing.value("error_cost", nlohmann::json(1.0)), where + ".firing.error_cost");
    a.threshold =
        SparseTable::parse(firing.value("threshold", nlohmann::json(1.0)), where + ".firing.threshold");
    a.maturity = SparseTable::parse(j.value("maturity", nlohmann::json(0.0)), where + ".maturity");

    const nlohmann::json pl = section_or_empty(j, "plasticity", where);
    a.plasticity.foreground_rate =
        number_or(pl, "foreground_rate", 0.0, where + ".plasticity");
    a.plasticity.maturity_rate = number_or(pl, "maturity_rate", 0.0, where + ".plasticity");
    a.plasticity.threshold_rate = number_or(pl, "threshold_rate", 0.0, where + ".plasticity");
    for (double v : {a.plasticity.foreground_rate, a.plasticity.maturity_rate,
                     a.plasticity.threshold_rate})
        if (v < 0.0 || v > 1.0) throw SchemaError(where + ".plasticity: rates must be in [0,1]");

    const nlohmann::json fm = section_or_empty(j, "formation", where);
    if (fm.contains("target_weights")) {
        if (!fm["target_weights"].is_object())
            throw SchemaError(where + ".formation.target_weights: expected an object");
        for (auto it = fm["target_weights"].begin(); it != fm["target_weights"].end(); ++it)
            a.target_weights[it.key()] =
                require_number(it.value(), where + ".formation.target_weights." + it.key());
    }
    a.transmit_cap = size_or(fm, "transmit_cap", 64, where + ".formation");
    if (a.transmit_cap < 1) throw SchemaError(where + ".formation.transmit_cap: must be >= 1");
    const nlohmann::json solver = section_or_empty(fm, "solver", where + ".formation");
    a.solver.tolerance = number_or(solver, "tolerance", 1e-9, where + ".formation.solver");
    a.solver.max_iters =
        static_cast<int>(size_or(solver, "max_iters", 10000, where + ".formation.solver"));
    a.solver.restarts =
        static_cast<int>(size_or(solver, "restarts", 1, where + ".formation.solver"));

    const nlohmann::json sw = section_or_empty(j, "score_weights", where);
    a.score_weights.explore = number_or(sw, "explore", 1.0, where + ".score_weights");
    a.score_weights.stabilize = number_or(sw, "stabilize", 1.0, where + ".score_weights");
    a.score_weights.error = number_or(sw, "error", 1.0, where + ".score_weights");
    a.score_weights.maturity = number_or(sw, "maturity", 0.0, where + ".score_weights");

    const nlohmann::json pw = section_or_empty(j, "plan_weights", where);
    a.plan_weights.error_reduction = number_or(pw, "error_reduction", 0.0, where + ".plan_weights");
    a.plan_weights.value = number_or(pw, "value", 0.0, where + ".plan_weights");
    a.plan_weights.compute_cost = number_or(pw, "compute_cost", 0.0, where + ".plan_weights");
    a.plan_weights.observation_cost =
        number_or(pw, "observation_cost", 0.0, where + ".plan_weights");
    a.plan_weights.action_cost = number_or(pw, "action_cost", 0.0, where + ".plan_weights");
    a.plan_weights.horizon = number_or(pw, "horizon", 0.0, where + ".plan_weights");

    const nlohmann::json temps = section_or_empty(j, "temperatures", where);
    a.firing_temperature = number_or(temps, "firing", 1.0, where + ".temperatures");
    a.plan_temperature = number_or(temps, "plan", 0.0, where + ".temperatures");
    if (a.firing_temperature < 0.0 || a.plan_temperature < 0.0)
        throw SchemaError(where + ".temperatures: must be >= 0");

    a.queue_capacity = size_or(j, "queue_capacity", 3, where);
    a.feasibility_cap = number_or(j, "feasibility_cap", 1e9, where);
    a.sensitization_threshold = number_or(j, "sensitization_threshold", 1.0, where);
    a.adapt_threshold = bool_or(j, "adapt_threshold", false, where);

    const nlohmann::json costs = section_or_empty(j, "plan_costs", where);
    const nlohmann::json ctx = section_or_empty(j, "plan_context", where);
    for (std::size_t k = 0; k < kPlanKindCount; ++k) {
        const char* kind = plan_kind_name(static_cast<PlanKind>(k));
        if (costs.contains(kind))
            a.plan_costs[k] = parse_costs(costs[kind], where + ".plan_costs." + kind);
        if (ctx.contains(kind)) {
            const nlohmann::json& c = ctx[kind];
            const std::string cw = where + ".plan_context." + std::string(kind);
            a.plan_context[k].expected_error_drop = number_or(c, "expected_error_drop", 0.0, cw);
            a.plan_context[k].value = number_or(c, "value", 0.0, cw);
            a.plan_context[k].compute_cost = number_or(c, "compute_cost", 0.0, cw);
            a.plan_context[k].observation_cost = number_or(c, "observation_cost", 0.0, cw);
        }
    }
    return a;
}

}  // namespace

const AgentConfig& RunConfig::agent(const std::string& id) const {
    for (const AgentConfig& a : agents)
        if (a.id == id) return a;
    throw UnknownReferenceError("agent '" + id + "'");
}

namespace {
RunConfig parse_config_impl(const nlohmann::json& doc, const std::string& base_dir);
}

RunConfig parse_config_json(const nlohmann::json& doc, const std::string& base_dir) {
    try {
        return parse_config_impl(doc, base_dir);
    } catch (const nlohmann::json::exception& e) {
        // Type mismatches surface as schema errors, not runtime failures.
        throw SchemaError(e.what());
    }
}

namespace {
RunConfig parse_config_impl(const nlohmann::json& doc, const std::string& base_dir) {
    if (!doc.is_object()) throw SchemaError("config: expected a JSON object");
    RunConfig cfg;
    cfg.document = doc;

    if (doc.contains("seed")) {
        if (!is_count(doc["seed"])) throw SchemaError("seed: expected an unsigned integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }

    if (!doc.contains("world")) throw SchemaError("world: missing");
    if (doc["world"].is_string()) {
        const std::filesystem::path p =
            std::filesystem::path(base_dir) / doc["world"].get<std::string>();
        std::ifstream in(p);
        if (!in) throw IoError("world: cannot open " + p.string());
        try {
            in >> cfg.world_document;
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("world: " + std::string(e.what()));
        }
        // Inline the resolved spec so the canonical form and its digest cover
        // the world content, not the reference.
        cfg.document["world"] = cfg.world_document;
    } else if (doc["world"].is_object()) {
        cfg.world_document = doc["world"];
    } else {
        throw SchemaError("world: expected an object or a file path");
    }
    // Validate the world spec up front so config errors surface before runs.
    const World world = World::build(cfg.world_document);

    if (!doc.contains("bases") || !doc["bases"].is_array() || doc["bases"].empty())
        throw SchemaError("bases: missing or empty");
    for (std::size_t i = 0; i < doc["bases"].size(); ++i)
        cfg.bases.push_back(parse_basis(doc["bases"][i], "bases[" + std::to_string(i) + "]"));

    if (!doc.contains("resolutions") || !doc["resolutions"].is_array() || doc["resolutions"].empty())
        throw SchemaError("resolutions: missing or empty");
    for (std::size_t i = 0; i < doc["resolutions"].size(); ++i)
        cfg.resolutions.push_back(
            parse_resolution(doc["resolutions"][i], "resolutions[" + std::to_string(i) + "]"));

    if (doc.contains("targets")) {
        if (!doc["targets"].is_array()) throw SchemaError("targets: expected an array of names");
        for (const auto& t : doc["targets"]) cfg.targets.push_back(t.get<std::string>());
    } else {
        for (const TargetMap& t : world.targets()) cfg.targets.push_back(t.name);
    }
    for (const std::string& t : cfg.targets) world.target_index(t);  // reference check

    const nlohmann::json labeling = section_or_empty(doc, "labeling", "config");
    cfg.labeling.fine =
        parse_direction(labeling.value("fine", std::string("stabilizing")));
    cfg.labeling.coarse =
        parse_direction(labeling.value("coarse", std::string("explorative")));

    cfg.epsilon = number_or(doc, "epsilon", 0.05, "config");
    if (cfg.epsilon < 0.0) throw SchemaError("epsilon: must be >= 0");

    const nlohmann::json engine = section_or_empty(doc, "engine", "config");
    cfg.engine.steps = size_or(engine, "steps", 0, "engine");
    cfg.engine.shared_observations = bool_or(engine, "shared_observations", false, "engine");
    cfg.engine.align.delta = number_or(engine, "delta", 0.01, "engine");
    const std::string mode = engine.value("align_mode", std::string("exhaustive"));
    if (mode == "exhaustive") {
        cfg.engine.align.mode = AlignMode::Exhaustive;
    } else if (mode == "greedy") {
        cfg.engine.align.mode = AlignMode::Greedy;
    } else {
        throw SchemaError("engine.align_mode: expected 'exhaustive' or 'greedy'");
    }
    cfg.engine.align.exhaustive_cap = size_or(engine, "exhaustive_cap", 6, "engine");

    const nlohmann::json agents = doc.value("agents", nlohmann::json::array());
    if (!agents.is_array()) throw SchemaError("agents: expected an array");
    for (std::size_t i = 0; i < agents.size(); ++i)
        cfg.agents.push_back(parse_agent(agents[i], "agents[" + std::to_string(i) + "]"));
    std::stable_sort(cfg.agents.begin(), cfg.agents.end(),
                     [](const AgentConfig& a, const AgentConfig& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < cfg.agents.size(); ++i)
        if (cfg.agents[i].id == cfg.agents[i - 1].id)
            throw SchemaError("agents: duplicate id '" + cfg.agents[i].id + "'");

    cfg.scenario = doc.value("scenario", nlohmann::json::object());

    // Cross-reference and range checks that need the registry.
    PhaseRegistry reg = PhaseRegistry::build(world, cfg.targets, cfg.bases, cfg.resolutions);
    auto check_range = [&](const std::vector<double>& v, double lo, double hi,
                           const std::string& where) {
        for (double x : v)
            if (!(x >= lo) || !(x <= hi))
                throw SchemaError(where + ": values must lie in [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
    };
    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
        const AgentConfig& a = cfg.agents[i];
        const std::string where = "agents[" + std::to_string(i) + "]";
        a.foreground.resolve(reg, where + ".profile.foreground");
        check_range(a.explore.resolve(reg, where + ".profile.explore"), 0.0, kInf,
                    where + ".profile.explore");
        check_range(a.stabilize.resolve(reg, where + ".profile.stabilize"), 0.0, kInf,
                    where + ".profile.stabilize");
        check_range(a.error_cost.resolve(reg, where + ".firing.error_cost"), 0.0, kInf,
                    where + ".firing.error_cost");
        check_range(a.threshold.resolve(reg, where + ".firing.threshold"), 0.0, kInf,
                    where + ".firing.threshold");
        check_range(a.maturity.resolve(reg, where + ".maturity"), 0.0, 1.0, where + ".maturity");
        for (const auto& [target, weight] : a.target_weights) {
            (void)weight;
            if (std::find(cfg.targets.begin(), cfg.targets.end(), target) == cfg.targets.end())
                throw UnknownReferenceError(where + ".formation.target_weights: unknown target '" +
                                            target + "'");
        }
    }
    return cfg;
}
}  // namespace

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return parse_config_json(doc, std::filesystem::path(path).parent_path().string());
}

std::string canonical_config_bytes(const RunConfig& cfg) { return canonical_dump(cfg.document); }

std::string config_digest(const RunConfig& cfg) { return sha256_hex(canonical_config_bytes(cfg)); }

}  // namespace mim
