#include "mim/world.hpp"

#include <cmath>
#include <fstream>

#include "mim/errors.hpp"
#include "mim/info.hpp"
#include "mim/rng.hpp"

namespace mim {

namespace {

bool is_count(const nlohmann::json& j) {
    return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

// World tables are checked at 1e-9 (file precision), then renormalized onto
// the exact 1e-12 invariant the kernel relies on.
std::vector<double> checked_row(const nlohmann::json& arr, std::size_t n,
                                const std::string& where) {
    if (!arr.is_array() || arr.size() != n)
        throw SchemaError(where + ": expected array of " + std::to_string(n) + " numbers");
    std::vector<double> row(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!arr[i].is_number()) throw SchemaError(where + "[" + std::to_string(i) + "]: not a number");
        row[i] = arr[i].get<double>();
        if (row[i] < 0.0) throw SchemaError(where + "[" + std::to_string(i) + "]: negative");
        sum += row[i];
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw NormalizationError(where + " sums to " + std::to_string(sum));
    for (double& v : row) v /= sum;
    return row;
}

}  // namespace

World World::build(const nlohmann::json& spec) {
    World w;
    w.id_ = spec.value("id", std::string("world"));

    if (!spec.contains("latents") || !spec["latents"].is_array() || spec["latents"].empty())
        throw SchemaError("world.latents: missing or empty");
    std::size_t n_latent = 1;
    for (const auto& l : spec["latents"]) {
        if (!l.contains("name") || !l.contains("size") || !is_count(l["size"]))
            throw SchemaError("world.latents: each entry needs name and size");
        LatentVar var{l["name"].get<std::string>(), l["size"].get<std::size_t>()};
        if (var.size == 0) throw SchemaError("world.latents." + var.name + ": size 0");
        w.latents_.push_back(var);
        n_latent *= var.size;
    }

    if (!spec.contains("joint")) throw SchemaError("world.joint: missing");
    w.latent_joint_ = Dist(checked_row(spec["joint"], n_latent, "world.joint"));

    if (!spec.contains("obs_size") || !is_count(spec["obs_size"]))
        throw SchemaError("world.obs_size: missing");
    const std::size_t n_obs = spec["obs_size"].get<std::size_t>();
    if (n_obs == 0) throw SchemaError("world.obs_size: must be >= 1");
    if (!spec.contains("obs_channel") || !spec["obs_channel"].is_array() ||
        spec["obs_channel"].size() != n_latent * n_obs)
        throw SchemaError("world.obs_channel: expected " + std::to_string(n_latent * n_obs) +
                          " entries");
    std::vector<Dist> rows;
    rows.reserve(n_latent);
    for (std::size_t z = 0; z < n_latent; ++z) {
        nlohmann::json slice = nlohmann::json::array();
        for (std::size_t o = 0; o < n_obs; ++o) slice.push_back(spec["obs_channel"][z * n_obs + o]);
        rows.push_back(Dist(checked_row(slice, n_obs, "world.obs_channel[" + std::to_string(z) + "]")));
    }
    w.obs_channel_ = Channel(std::move(rows));

    if (!spec.contains("targets") || !spec["targets"].is_array() || spec["targets"].empty())
        throw SchemaError("world.targets: missing or empty");
    for (const auto& t : spec["targets"]) {
        if (!t.contains("name") || !t.contains("table"))
            throw SchemaError("world.targets: each entry needs name and table");
        TargetMap tm;
        tm.name = t["name"].get<std::string>();
        if (!t["table"].is_array() || t["table"].size() != n_latent)
            throw SchemaError("world.targets." + tm.name + ".table: expected " +
                              std::to_string(n_latent) + " entries");
        for (const auto& v : t["table"]) {
            if (!is_count(v))
                throw SchemaError("world.targets." + tm.name + ".table: non-index entry");
            tm.table.push_back(v.get<std::size_t>());
            tm.alphabet = std::max(tm.alphabet, tm.table.back() + 1);
        }
        w.targets_.push_back(std::move(tm));
    }

    // Precompute induced joints. p(o, y) = sum_z p(z) c(o|z) [target(z) = y].
    std::vector<double> po(n_obs, 0.0);
    for (std::size_t z = 0; z < n_latent; ++z)
        for (std::size_t o = 0; o < n_obs; ++o)
            po[o] += w.latent_joint_[z] * w.obs_channel_.rows[z][o];
    w.obs_marginal_ = Dist(std::move(po));

    for (const TargetMap& tm : w.targets_) {
        JointDist joy(n_obs, tm.alphabet);
        for (std::size_t z = 0; z < n_latent; ++z) {
            const double pz = w.latent_joint_[z];
            if (pz == 0.0) continue;
            for (std::size_t o = 0; o < n_obs; ++o)
                joy.at(o, tm.table[z]) += pz * w.obs_channel_.rows[z][o];
        }
        joy.validate(("world-induced joint for " + tm.name).c_str());
        w.target_priors_.push_back(joy.col_marginal());
        w.target_obs_info_.push_back(mutual_information(joy));
        w.obs_target_joints_.push_back(std::move(joy));
    }
    return w;
}

World World::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open world spec " + path);
    nlohmann::json spec;
    try {
        in >> spec;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return build(spec);
}

std::size_t World::target_index(const std::string& name) const {
    for (std::size_t i = 0; i < targets_.size(); ++i)
        if (targets_[i].name == name) return i;
    throw UnknownReferenceError("target '" + name + "' not in world '" + id_ + "'");
}

const JointDist& World::obs_target_joint(std::size_t target) const {
    return obs_target_joints_.at(target);
}

const Dist& World::target_prior(std::size_t target) const { return target_priors_.at(target); }

double World::target_obs_information(std::size_t target) const {
    return target_obs_info_.at(target);
}

Dist World::posterior_target(std::size_t target, std::size_t obs) const {
    const JointDist& joy = obs_target_joints_.at(target);
    if (obs >= joy.rows) throw SchemaError("observation index out of range");
    if (obs_marginal_[obs] == 0.0)
        throw ZeroProbabilityObservation("observation " + std::to_string(obs) + " in world '" +
                                         id_ + "'");
    std::vector<double> post(joy.cols);
    for (std::size_t y = 0; y < joy.cols; ++y) post[y] = joy.at(obs, y) / obs_marginal_[obs];
    return Dist(std::move(post));
}

ObservationSequence sample_observations(const World& w, std::size_t n, std::uint64_t seed) {
    ObservationSequence seq;
    seq.seed = seed;
    seq.world_id = w.id();
    seq.symbols.reserve(n);
    RngStream rng(seed, "obs:" + w.id());
    // Inverse-CDF over the fixed marginal table keeps draws bit-reproducible.
    const Dist& p = w.obs_marginal();
    for (std::size_t i = 0; i < n; ++i) seq.symbols.push_back(rng.sample(p.probs));
    return seq;
}

}  // namespace mim
