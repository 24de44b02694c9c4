#include "mim/candidate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mim/errors.hpp"
#include "mim/info.hpp"
#include "mim/rng.hpp"

namespace mim {

ConditioningBasis ConditioningBasis::make(std::string id, std::string domain,
                                          std::vector<std::size_t> map) {
    if (map.empty()) throw SchemaError("basis '" + id + "': empty map");
    ConditioningBasis b;
    b.id = std::move(id);
    b.domain = std::move(domain);
    b.map = std::move(map);
    b.feature_count = *std::max_element(b.map.begin(), b.map.end()) + 1;
    if (b.feature_count > b.map.size())
        throw SchemaError("basis '" + b.id + "': feature alphabet exceeds observation alphabet");
    return b;
}

ConditioningBasis ConditioningBasis::identity(std::string id, std::string domain,
                                              std::size_t n_obs) {
    std::vector<std::size_t> map(n_obs);
    std::iota(map.begin(), map.end(), std::size_t{0});
    return make(std::move(id), std::move(domain), std::move(map));
}

PhaseRegistry PhaseRegistry::build(const World& w, std::vector<std::string> targets,
                                   std::vector<ConditioningBasis> bases,
                                   std::vector<Resolution> resolutions) {
    PhaseRegistry reg;
    reg.target_names = std::move(targets);
    for (const std::string& t : reg.target_names) reg.target_indices.push_back(w.target_index(t));
    reg.bases = std::move(bases);
    reg.resolutions = std::move(resolutions);
    for (const ConditioningBasis& b : reg.bases) {
        if (b.map.size() != w.obs_size())
            throw SchemaError("basis '" + b.id + "': map covers " + std::to_string(b.map.size()) +
                              " observations, world has " + std::to_string(w.obs_size()));
    }
    for (std::size_t ti = 0; ti < reg.target_names.size(); ++ti)
        for (std::size_t bi = 0; bi < reg.bases.size(); ++bi)
            for (std::size_t ri = 0; ri < reg.resolutions.size(); ++ri) {
                PhasePoint pt;
                pt.target = ti;
                pt.basis = bi;
                pt.resolution = ri;
                pt.key = reg.target_names[ti] + "/" + reg.bases[bi].id + "/" +
                         reg.resolutions[ri].id;
                reg.key_to_point[pt.key] = reg.points.size();
                reg.points.push_back(std::move(pt));
            }
    return reg;
}

std::size_t PhaseRegistry::index_of(const std::string& key) const {
    auto it = key_to_point.find(key);
    if (it == key_to_point.end()) throw UnknownReferenceError("phase point '" + key + "'");
    return it->second;
}

Dist Candidate::predictive(std::size_t feature) const {
    const std::size_t n_y = decoder.output_size();
    std::vector<double> p(n_y, 0.0);
    const Dist& row = encoder.rows[feature];
    for (std::size_t t = 0; t < row.size(); ++t) {
        if (row[t] == 0.0) continue;
        for (std::size_t y = 0; y < n_y; ++y) p[y] += row[t] * decoder.rows[t][y];
    }
    return Dist(std::move(p));
}

JointDist feature_target_joint(const World& w, std::size_t target,
                               const ConditioningBasis& basis) {
    const JointDist& joy = w.obs_target_joint(target);
    JointDist out(basis.feature_count, joy.cols);
    for (std::size_t o = 0; o < joy.rows; ++o)
        for (std::size_t y = 0; y < joy.cols; ++y) out.at(basis.map[o], y) += joy.at(o, y);
    return out;
}

Candidate build_candidate_from_encoder(const World& w, const PhaseRegistry& reg,
                                       std::size_t phase, Channel encoder) {
    const PhasePoint& pt = reg.points.at(phase);
    const std::size_t target = reg.target_indices[pt.target];
    const ConditioningBasis& basis = reg.bases[pt.basis];

    const JointDist fy = feature_target_joint(w, target, basis);
    const Dist pf = fy.row_marginal();
    const JointDist ty = apply_row_channel(fy, encoder);

    Candidate c;
    c.phase = phase;
    c.key = pt.key;
    c.encoder = std::move(encoder);
    c.decoder = condition_rows(ty, w.target_prior(target));
    c.i_ot = mutual_information(joint_from_channel(pf, c.encoder));
    c.i_ty = mutual_information(ty);
    c.gap = admissibility_gap(w, reg, c);
    return c;
}

Candidate build_encoder(const World& w, const PhaseRegistry& reg, std::size_t phase,
                        const IBOptions& opts, std::uint64_t seed) {
    const PhasePoint& pt = reg.points.at(phase);
    const std::size_t target = reg.target_indices[pt.target];
    const ConditioningBasis& basis = reg.bases[pt.basis];
    const Resolution& rho = reg.resolutions[pt.resolution];

    const JointDist fy = feature_target_joint(w, target, basis);
    const IBResult ib = ib_solve(fy, rho.cardinality, rho.beta, opts, seed);

    Candidate c = build_candidate_from_encoder(w, reg, phase, ib.encoder);
    c.converged = ib.converged;
    return c;
}

double admissibility_gap(const World& w, const PhaseRegistry& reg, const Candidate& c) {
    const PhasePoint& pt = reg.points.at(c.phase);
    const std::size_t target = reg.target_indices[pt.target];
    const ConditioningBasis& basis = reg.bases[pt.basis];
    const Dist& po = w.obs_marginal();

    // Predictive rows depend on o only through the feature class; cache them.
    std::vector<Dist> predictive(basis.feature_count);
    std::vector<bool> built(basis.feature_count, false);

    double gap = 0.0;
    for (std::size_t o = 0; o < po.size(); ++o) {
        if (po[o] == 0.0) continue;
        const std::size_t f = basis.map[o];
        if (!built[f]) {
            predictive[f] = c.predictive(f);
            built[f] = true;
        }
        gap += po[o] * kl_divergence_or_inf(w.posterior_target(target, o), predictive[f]);
    }
    return gap;
}

CandidateSpace enumerate_candidate_space(const World& w, const PhaseRegistry& reg,
                                         double epsilon, const IBOptions& opts,
                                         std::uint64_t seed) {
    CandidateSpace space;
    space.epsilon = epsilon;
    space.candidates.reserve(reg.size());
    for (std::size_t i = 0; i < reg.size(); ++i) {
        // Per-candidate seed keyed by the phase key: stable under registry edits.
        const std::uint64_t sub = splitmix64(seed ^ fnv1a(reg.points[i].key));
        Candidate c = build_encoder(w, reg, i, opts, sub);
        c.admissible = c.gap <= epsilon;
        space.phase_admissible.push_back(c.admissible);
        space.candidates.push_back(std::move(c));
    }
    return space;
}

std::string CoarseLabel::name() const {
    static const char* domains[] = {"empirical", "ideational", "structural", "existential"};
    static const char* directions[] = {"explorative", "stabilizing"};
    return std::string(domains[static_cast<int>(domain)]) + "-" +
           directions[static_cast<int>(direction)];
}

Domain parse_domain(const std::string& s) {
    if (s == "empirical") return Domain::Empirical;
    if (s == "ideational") return Domain::Ideational;
    if (s == "structural") return Domain::Structural;
    if (s == "existential") return Domain::Existential;
    throw SchemaError("unknown domain '" + s + "'");
}

Direction parse_direction(const std::string& s) {
    if (s == "explorative") return Direction::Explorative;
    if (s == "stabilizing") return Direction::Stabilizing;
    throw SchemaError("unknown direction '" + s + "'");
}

CoarseLabel coarse_label(const PhaseRegistry& reg, std::size_t phase, const Labeling& labeling) {
    const PhasePoint& pt = reg.points.at(phase);
    const ConditioningBasis& basis = reg.bases[pt.basis];
    if (basis.domain.empty())
        throw UnlabeledPhase("basis '" + basis.id + "' carries no domain tag");
    CoarseLabel label;
    label.domain = parse_domain(basis.domain);
    label.direction =
        reg.resolutions[pt.resolution].horizon == Horizon::Fine ? labeling.fine : labeling.coarse;
    return label;
}

namespace {

// Label index per phase point plus per-label counts and sums of the field.
struct LabelMeans {
    std::vector<std::size_t> label_of;
    double mean[kCoarseLabelCount] = {0};
    std::size_t count[kCoarseLabelCount] = {0};
};

LabelMeans label_means(const std::vector<double>& field, const PhaseRegistry& reg,
                       const Labeling& labeling) {
    if (field.size() != reg.size()) throw SchemaError("field size does not match registry");
    LabelMeans lm;
    double sum[kCoarseLabelCount] = {0};
    for (std::size_t i = 0; i < reg.size(); ++i) {
        const std::size_t li = coarse_label(reg, i, labeling).index();
        lm.label_of.push_back(li);
        sum[li] += field[i];
        lm.count[li] += 1;
    }
    for (std::size_t l = 0; l < kCoarseLabelCount; ++l)
        lm.mean[l] = lm.count[l] ? sum[l] / static_cast<double>(lm.count[l]) : 0.0;
    return lm;
}

}  // namespace

std::vector<ConstraintEntry> constraint_sequence(const std::vector<double>& r_field,
                                                 const PhaseRegistry& reg,
                                                 const Labeling& labeling) {
    const LabelMeans lm = label_means(r_field, reg, labeling);
    std::vector<ConstraintEntry> ranking(kCoarseLabelCount);
    for (std::size_t l = 0; l < kCoarseLabelCount; ++l) {
        ranking[l].label.domain = static_cast<Domain>(l / 2);
        ranking[l].label.direction = static_cast<Direction>(l % 2);
        ranking[l].strength = lm.mean[l];
    }
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const ConstraintEntry& a, const ConstraintEntry& b) {
                         return a.strength > b.strength;
                     });
    return ranking;
}

double lowdim_reconstruction_error(const std::vector<double>& r_field,
                                   const PhaseRegistry& reg, const Labeling& labeling) {
    const LabelMeans lm = label_means(r_field, reg, labeling);
    if (r_field.empty()) return 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < r_field.size(); ++i) {
        const double dev = r_field[i] - lm.mean[lm.label_of[i]];
        sq += dev * dev;
    }
    return sq / static_cast<double>(r_field.size());
}

}  // namespace mim
