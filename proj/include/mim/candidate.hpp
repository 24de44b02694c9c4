#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mim/dist.hpp"
#include "mim/ib.hpp"
#include "mim/world.hpp"

namespace mim {

// Deterministic partition of the observation alphabet into feature classes.
struct ConditioningBasis {
    std::string id;
    std::string domain;             // coarse-label tag; may be empty (unlabeled)
    std::vector<std::size_t> map;   // observation index -> feature index
    std::size_t feature_count = 0;

    static ConditioningBasis make(std::string id, std::string domain,
                                  std::vector<std::size_t> map);
    static ConditioningBasis identity(std::string id, std::string domain, std::size_t n_obs);
};

enum class Horizon { Fine, Coarse };

// Representational form of a statistic: alphabet cap, bottleneck tradeoff,
// and the horizon tag used by plan weighting.
struct Resolution {
    std::string id;
    std::size_t cardinality = 1;
    double beta = 0.0;
    Horizon horizon = Horizon::Fine;
};

// One (target, basis, resolution) triple; the key is "target/basis/resolution".
struct PhasePoint {
    std::size_t target = 0;
    std::size_t basis = 0;
    std::size_t resolution = 0;
    std::string key;
};

// Fixed enumeration of phase points (target-major, then basis, then
// resolution) shared by candidate spaces and profile tables.
struct PhaseRegistry {
    std::vector<std::string> target_names;  // world target indices follow these
    std::vector<std::size_t> target_indices;
    std::vector<ConditioningBasis> bases;
    std::vector<Resolution> resolutions;
    std::vector<PhasePoint> points;
    std::map<std::string, std::size_t> key_to_point;

    static PhaseRegistry build(const World& w, std::vector<std::string> targets,
                               std::vector<ConditioningBasis> bases,
                               std::vector<Resolution> resolutions);

    std::size_t size() const { return points.size(); }
    std::size_t index_of(const std::string& key) const;
};

// A candidate statistic: encoder from feature alphabet to representation
// alphabet plus its Bayes decoder and admissibility diagnostics.
struct Candidate {
    std::size_t phase = 0;  // index into the registry
    std::string key;
    Channel encoder;   // q(t | feature)
    Channel decoder;   // p(y | t)
    double gap = 0.0;  // admissibility KL, nats
    double i_ot = 0.0;
    double i_ty = 0.0;
    bool admissible = false;
    bool converged = true;

    // Predictive distribution over the target through the representation:
    // sum_t q(t|feature) p(y|t).
    Dist predictive(std::size_t feature) const;
};

struct CandidateSpace {
    std::vector<Candidate> candidates;  // aligned with registry points
    double epsilon = 0.0;
    std::vector<bool> phase_admissible;
};

// Exact joint p(feature, y) for a target seen through a basis.
JointDist feature_target_joint(const World& w, std::size_t target,
                               const ConditioningBasis& basis);

// Builds the candidate for one phase point via the bottleneck solver.
Candidate build_encoder(const World& w, const PhaseRegistry& reg, std::size_t phase,
                        const IBOptions& opts, std::uint64_t seed);

// Wraps an externally supplied encoder (e.g. a deterministic map) with its
// Bayes decoder and diagnostics.
Candidate build_candidate_from_encoder(const World& w, const PhaseRegistry& reg,
                                       std::size_t phase, Channel encoder);

// E_o[ KL(p(y|o) || predictive at psi(o)) ], by exact summation.
double admissibility_gap(const World& w, const PhaseRegistry& reg, const Candidate& c);

CandidateSpace enumerate_candidate_space(const World& w, const PhaseRegistry& reg,
                                         double epsilon, const IBOptions& opts,
                                         std::uint64_t seed);

// Coarse labels: four domains crossed with two update directions.
enum class Domain { Empirical, Ideational, Structural, Existential };
enum class Direction { Explorative, Stabilizing };

struct CoarseLabel {
    Domain domain = Domain::Empirical;
    Direction direction = Direction::Explorative;

    // Fixed tie order: domain-major, explorative before stabilizing.
    std::size_t index() const {
        return static_cast<std::size_t>(domain) * 2 + static_cast<std::size_t>(direction);
    }
    std::string name() const;
};

constexpr std::size_t kCoarseLabelCount = 8;

// Config-declared labeling: which direction each horizon tag maps to.
struct Labeling {
    Direction fine = Direction::Stabilizing;
    Direction coarse = Direction::Explorative;
};

Domain parse_domain(const std::string& s);
Direction parse_direction(const std::string& s);

// Pure lookup; throws UnlabeledPhase when the basis carries no domain tag.
CoarseLabel coarse_label(const PhaseRegistry& reg, std::size_t phase, const Labeling& labeling);

struct ConstraintEntry {
    CoarseLabel label;
    double strength = 0.0;
};

// Ranking of the eight labels by mean foregrounding strength, descending,
// ties broken by the fixed label order. Labels with no phase points rank
// with strength 0.
std::vector<ConstraintEntry> constraint_sequence(const std::vector<double>& r_field,
                                                 const PhaseRegistry& reg,
                                                 const Labeling& labeling);

// Mean squared deviation of the field from its eight label means.
double lowdim_reconstruction_error(const std::vector<double>& r_field,
                                   const PhaseRegistry& reg, const Labeling& labeling);

}  // namespace mim
