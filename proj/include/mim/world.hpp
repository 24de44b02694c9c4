#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mim/dist.hpp"

#include "json.hpp"

namespace mim {

// A named latent variable with a finite alphabet.
struct LatentVar {
    std::string name;
    std::size_t size = 0;
};

// Deterministic map from the latent product space to a target alphabet.
struct TargetMap {
    std::string name;
    std::vector<std::size_t> table;  // indexed by latent tuple (row-major)
    std::size_t alphabet = 0;
};

// Exact finite generative world: a joint over latent tuples, named targets as
// functions of the latents, and an observation channel. Everything downstream
// is computed by summation over these tables; nothing is estimated.
class World {
public:
    static World build(const nlohmann::json& spec);
    static World load(const std::string& path);

    const std::string& id() const { return id_; }
    const std::vector<LatentVar>& latents() const { return latents_; }
    const Dist& latent_joint() const { return latent_joint_; }
    const Channel& obs_channel() const { return obs_channel_; }
    std::size_t obs_size() const { return obs_channel_.output_size(); }

    const std::vector<TargetMap>& targets() const { return targets_; }
    std::size_t target_index(const std::string& name) const;

    // Induced marginal p(o).
    const Dist& obs_marginal() const { return obs_marginal_; }
    // Induced joint p(o, y) for one target.
    const JointDist& obs_target_joint(std::size_t target) const;
    // Prior p(y).
    const Dist& target_prior(std::size_t target) const;
    // I(Y; O) in nats.
    double target_obs_information(std::size_t target) const;

    // Exact Bayes posterior over the target alphabet given one observation.
    // Throws ZeroProbabilityObservation when p(o) = 0.
    Dist posterior_target(std::size_t target, std::size_t obs) const;

private:
    std::string id_;
    std::vector<LatentVar> latents_;
    Dist latent_joint_;
    Channel obs_channel_;
    std::vector<TargetMap> targets_;

    Dist obs_marginal_;
    std::vector<JointDist> obs_target_joints_;
    std::vector<Dist> target_priors_;
    std::vector<double> target_obs_info_;
};

// Seeded i.i.d. draws from the observation marginal.
struct ObservationSequence {
    std::vector<std::size_t> symbols;
    std::uint64_t seed = 0;
    std::string world_id;
};

ObservationSequence sample_observations(const World& w, std::size_t n, std::uint64_t seed);

}  // namespace mim
