#include "mim/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mim/errors.hpp"
#include "mim/info.hpp"

namespace mim {

namespace {

// Serialization-safe stand-in for an infinite receiver error (decoder support
// does not cover the delivered statistic).
constexpr double kErrorSentinel = 1e300;

double finite_or_sentinel(double v) { return std::isfinite(v) ? v : kErrorSentinel; }

}  // namespace

const char* align_class_name(AlignClass c) {
    static const char* names[] = {"Full", "Partial", "Severed"};
    return names[static_cast<int>(c)];
}

double transformation_loss(const JointDist& sender_joint, const Channel& a) {
    const double before = mutual_information(sender_joint);
    const double after = mutual_information(apply_row_channel(sender_joint, a));
    return before - after;
}

double directional_compatibility(const ProfileState& receiver, const CandidateSpace& space,
                                 std::size_t phase) {
    double sum = 0.0, count = 0.0;
    for (std::size_t i = 0; i < space.candidates.size(); ++i) {
        if (!space.candidates[i].admissible) continue;
        sum += receiver.theta.foreground[i];
        count += 1.0;
    }
    if (count == 0.0) return 0.0;
    const double mean = sum / count;
    double var = 0.0;
    for (std::size_t i = 0; i < space.candidates.size(); ++i) {
        if (!space.candidates[i].admissible) continue;
        const double d = receiver.theta.foreground[i] - mean;
        var += d * d;
    }
    const double sd = std::sqrt(var / count);
    if (sd < 1e-12) return 0.0;
    return (receiver.theta.foreground[phase] - mean) / sd;
}

std::pair<bool, std::string> processability(const ProfileState& receiver, std::size_t phase,
                                            double receiver_error, double mu) {
    if (receiver_error <= receiver.firing.threshold.at(phase)) return {true, "below-threshold"};
    if (mu > 0.0) return {true, "receptive"};
    return {false, "rejected"};
}

JointDist representation_target_joint(const World& w, const PhaseRegistry& reg,
                                      const Candidate& sender, std::size_t world_target) {
    const PhasePoint& pt = reg.points.at(sender.phase);
    const ConditioningBasis& basis = reg.bases[pt.basis];
    // Lift the feature encoder to an observation encoder, then push the
    // world-induced joint p(o, y) through it.
    std::vector<Dist> rows;
    rows.reserve(w.obs_size());
    for (std::size_t o = 0; o < w.obs_size(); ++o) rows.push_back(sender.encoder.rows[basis.map[o]]);
    return apply_row_channel(w.obs_target_joint(world_target), Channel(std::move(rows)));
}

namespace {

// Aggregate joint rows by a deterministic symbol map.
JointDist aggregate_rows(const JointDist& j, const std::vector<std::size_t>& map,
                         std::size_t n_out) {
    JointDist out(n_out, j.cols);
    for (std::size_t r = 0; r < j.rows; ++r)
        for (std::size_t c = 0; c < j.cols; ++c) out.at(map[r], c) += j.at(r, c);
    return out;
}

std::size_t image_size(const std::vector<std::size_t>& map, std::size_t n_out) {
    std::vector<bool> used(n_out, false);
    std::size_t n = 0;
    for (std::size_t v : map)
        if (!used[v]) {
            used[v] = true;
            ++n;
        }
    return n;
}

// Receiver-side error of a delivered statistic: expected KL between the exact
// posterior of the receiver's target given the delivered symbol and the
// receiver candidate's own decoder row.
double receiver_side_error(const JointDist& delivered_joint, const Candidate& receiver_cand) {
    const Dist pt = delivered_joint.row_marginal();
    double err = 0.0;
    for (std::size_t t = 0; t < delivered_joint.rows; ++t) {
        if (pt[t] == 0.0) continue;
        std::vector<double> post(delivered_joint.cols);
        for (std::size_t y = 0; y < delivered_joint.cols; ++y)
            post[y] = delivered_joint.at(t, y) / pt[t];
        err += pt[t] * kl_divergence_or_inf(Dist(std::move(post)), receiver_cand.decoder.rows[t]);
    }
    return err;
}

struct SearchHit {
    std::vector<std::size_t> map;
    std::size_t receiver_index = 0;  // index into receiver space candidates
    double loss = 0.0;
    double receiver_error = 0.0;
    double mu = 0.0;
    bool processable = false;
    std::string reason;
};

// Strict ordering of search hits: processable first, then loss, then receiver
// error; earlier-discovered hits win remaining ties (callers iterate in the
// fixed search order). Losses within 1e-12 count as tied so that summation
// roundoff cannot override the error tie-break.
bool better_hit(const SearchHit& a, const SearchHit& b) {
    if (a.processable != b.processable) return a.processable;
    if (std::fabs(a.loss - b.loss) > 1e-12) return a.loss < b.loss;
    return a.receiver_error < b.receiver_error;
}

class AlignmentSearch {
public:
    AlignmentSearch(const World& w, const PhaseRegistry& reg, const Candidate& sender,
                    const ProfileState& receiver, const CandidateSpace& space,
                    std::size_t transmit_cap)
        : world_(w),
          reg_(reg),
          sender_(sender),
          receiver_(receiver),
          space_(space),
          transmit_cap_(transmit_cap) {
        const PhasePoint& pt = reg.points.at(sender.phase);
        sender_joint_ = representation_target_joint(w, reg, sender, reg.target_indices[pt.target]);
        sender_info_ = mutual_information(sender_joint_);
    }

    std::size_t sender_alphabet() const { return sender_joint_.rows; }

    // Receiver candidates that participate in the search, in enumeration
    // order: admissible, with the receiver's target-inclusion weight positive.
    std::vector<std::size_t> receiver_candidates() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < space_.candidates.size(); ++i) {
            if (!space_.candidates[i].admissible) continue;
            const PhasePoint& pt = reg_.points[space_.candidates[i].phase];
            if (!(receiver_.formation.weight_for(reg_.target_names[pt.target]) > 0.0)) continue;
            out.push_back(i);
        }
        return out;
    }

    std::size_t alphabet_of(std::size_t receiver_index) const {
        return space_.candidates[receiver_index].encoder.output_size();
    }

    std::size_t map_cap(std::size_t receiver_index) const {
        return std::min(alphabet_of(receiver_index), transmit_cap_);
    }

    // Joint p(T_sender, Y_receiver) for one receiver candidate, cached.
    const JointDist& cross_joint(std::size_t receiver_index) {
        auto it = cross_.find(receiver_index);
        if (it != cross_.end()) return it->second;
        const PhasePoint& pt = reg_.points[space_.candidates[receiver_index].phase];
        JointDist j = representation_target_joint(world_, reg_, sender_,
                                                  reg_.target_indices[pt.target]);
        return cross_.emplace(receiver_index, std::move(j)).first->second;
    }

    SearchHit evaluate(std::size_t receiver_index, const std::vector<std::size_t>& map) {
        const Candidate& cand = space_.candidates[receiver_index];
        const std::size_t n_out = cand.encoder.output_size();
        SearchHit hit;
        hit.map = map;
        hit.receiver_index = receiver_index;
        hit.loss = sender_info_ - mutual_information(aggregate_rows(sender_joint_, map, n_out));
        hit.receiver_error =
            finite_or_sentinel(receiver_side_error(aggregate_rows(cross_joint(receiver_index), map, n_out), cand));
        hit.mu = directional_compatibility(receiver_, space_, cand.phase);
        std::tie(hit.processable, hit.reason) =
            processability(receiver_, cand.phase, hit.receiver_error, hit.mu);
        return hit;
    }

    double partition_loss(const std::vector<std::size_t>& group_of, std::size_t n_groups) {
        return sender_info_ - mutual_information(aggregate_rows(sender_joint_, group_of, n_groups));
    }

private:
    const World& world_;
    const PhaseRegistry& reg_;
    const Candidate& sender_;
    const ProfileState& receiver_;
    const CandidateSpace& space_;
    std::size_t transmit_cap_;
    JointDist sender_joint_;
    double sender_info_ = 0.0;
    std::map<std::size_t, JointDist> cross_;
};

void exhaustive_pass(AlignmentSearch& search, std::size_t receiver_index, SearchHit& best,
                     bool& any) {
    const std::size_t s = search.sender_alphabet();
    const std::size_t r = search.alphabet_of(receiver_index);
    const std::size_t cap = search.map_cap(receiver_index);
    std::vector<std::size_t> map(s, 0);
    while (true) {
        if (image_size(map, r) <= cap) {
            SearchHit hit = search.evaluate(receiver_index, map);
            if (!any || better_hit(hit, best)) {
                best = std::move(hit);
                any = true;
            }
        }
        // Odometer over maps in lexicographic order.
        std::size_t pos = s;
        while (pos > 0) {
            --pos;
            if (++map[pos] < r) break;
            map[pos] = 0;
            if (pos == 0) return;
        }
    }
}

// Greedy: every deterministic map factors into a partition of the sender
// alphabet and an injective placement of its groups. Small alphabets are
// solved exactly by enumerating partitions; larger ones fall back to
// agglomerative merging by minimal information loss with single-symbol
// refinement.
void greedy_pass(AlignmentSearch& search, std::size_t receiver_index, SearchHit& best, bool& any) {
    const std::size_t s = search.sender_alphabet();
    const std::size_t r = search.alphabet_of(receiver_index);
    const std::size_t cap = search.map_cap(receiver_index);

    std::vector<std::size_t> group_of(s);
    std::iota(group_of.begin(), group_of.end(), std::size_t{0});
    std::size_t n_groups = s;

    auto consider = [&](const std::vector<std::size_t>& map) {
        SearchHit hit = search.evaluate(receiver_index, map);
        if (!any || better_hit(hit, best)) {
            best = std::move(hit);
            any = true;
        }
    };

    auto evaluate_partition = [&](const std::vector<std::size_t>& groups, std::size_t k) {
        // Try every injective placement of the k groups when that is cheap;
        // otherwise fall back to placement by group index.
        double n_injections = 1.0;
        for (std::size_t i = 0; i < k; ++i) n_injections *= static_cast<double>(r - i);
        if (n_injections <= 5040.0) {
            std::vector<std::size_t> assign(k, 0);
            std::vector<bool> used(r, false);
            auto place = [&](auto&& self, std::size_t depth) -> void {
                if (depth == k) {
                    std::vector<std::size_t> map(s);
                    for (std::size_t i = 0; i < s; ++i) map[i] = assign[groups[i]];
                    consider(map);
                    return;
                }
                for (std::size_t sym = 0; sym < r; ++sym) {
                    if (used[sym]) continue;
                    used[sym] = true;
                    assign[depth] = sym;
                    self(self, depth + 1);
                    used[sym] = false;
                }
            };
            place(place, 0);
        } else {
            std::vector<std::size_t> map(s);
            for (std::size_t i = 0; i < s; ++i) map[i] = groups[i];
            consider(map);
        }
    };

    auto normalize = [&](std::vector<std::size_t> groups) {
        // Renumber group ids to 0..k-1 in order of first appearance.
        std::vector<std::size_t> remap(s, s);
        std::size_t next = 0;
        for (std::size_t& g : groups) {
            if (remap[g] == s) remap[g] = next++;
            g = remap[g];
        }
        return std::make_pair(groups, next);
    };

    // Exact path for small alphabets: enumerate restricted growth strings
    // with at most `cap` blocks (at most Bell(6) = 203 partitions, each with
    // at most 6! placements).
    if (s <= 6 && r <= 6) {
        std::vector<std::size_t> rgs(s, 0);
        auto enumerate = [&](auto&& self, std::size_t pos, std::size_t blocks) -> void {
            if (pos == s) {
                evaluate_partition(rgs, blocks);
                return;
            }
            for (std::size_t g = 0; g <= blocks && g < cap; ++g) {
                rgs[pos] = g;
                self(self, pos + 1, std::max(blocks, g + 1));
            }
        };
        enumerate(enumerate, 1, 1);
        return;
    }

    while (true) {
        if (n_groups <= cap) {
            // Refine by single-symbol moves until no move lowers the loss.
            double current = search.partition_loss(group_of, n_groups);
            bool moved = true;
            while (moved) {
                moved = false;
                for (std::size_t i = 0; i < s && !moved; ++i) {
                    const std::size_t from = group_of[i];
                    for (std::size_t g = 0; g < n_groups && !moved; ++g) {
                        if (g == from) continue;
                        std::vector<std::size_t> trial = group_of;
                        trial[i] = g;
                        auto [norm, k] = normalize(trial);
                        if (k > cap) continue;
                        const double loss = search.partition_loss(norm, k);
                        if (loss < current - 1e-15) {
                            group_of = norm;
                            n_groups = k;
                            current = loss;
                            moved = true;
                        }
                    }
                }
            }
            evaluate_partition(group_of, n_groups);
        }
        if (n_groups == 1) break;
        // Merge the pair of groups with the smallest loss increase.
        double best_loss = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> best_pair{0, 1};
        for (std::size_t a = 0; a < n_groups; ++a)
            for (std::size_t b = a + 1; b < n_groups; ++b) {
                std::vector<std::size_t> trial = group_of;
                for (std::size_t& g : trial)
                    if (g == b) g = a;
                auto [norm, k] = normalize(trial);
                const double loss = search.partition_loss(norm, k);
                if (loss < best_loss) {
                    best_loss = loss;
                    best_pair = {a, b};
                }
            }
        std::vector<std::size_t> merged = group_of;
        for (std::size_t& g : merged)
            if (g == best_pair.second) g = best_pair.first;
        std::tie(group_of, n_groups) = normalize(merged);
    }
}

}  // namespace

AlignmentReport optimize_alignment(const World& w, const PhaseRegistry& reg,
                                   const Candidate& sender, const ProfileState& receiver,
                                   const CandidateSpace& receiver_space,
                                   std::size_t transmit_cap, const AlignOptions& opts) {
    AlignmentSearch search(w, reg, sender, receiver, receiver_space, transmit_cap);
    const std::size_t s = search.sender_alphabet();
    if (opts.mode == AlignMode::Exhaustive && s > opts.exhaustive_cap)
        throw AlphabetTooLarge("sender alphabet " + std::to_string(s) + " exceeds cap " +
                               std::to_string(opts.exhaustive_cap));

    SearchHit best;
    bool any = false;
    for (std::size_t idx : search.receiver_candidates()) {
        if (opts.mode == AlignMode::Exhaustive) {
            if (search.alphabet_of(idx) > opts.exhaustive_cap)
                throw AlphabetTooLarge("receiver alphabet exceeds cap");
            exhaustive_pass(search, idx, best, any);
        } else {
            greedy_pass(search, idx, best, any);
        }
    }
    if (!any) throw EmptyAdmissibleSpace("receiver space has no admissible candidate");

    AlignmentReport report;
    const Candidate& landing = receiver_space.candidates[best.receiver_index];
    report.channel.channel =
        Channel::deterministic(best.map, landing.encoder.output_size());
    report.channel.deterministic = true;
    report.receiver_phase = landing.phase;
    report.receiver_key = landing.key;
    report.transformation_loss = best.loss;
    report.receiver_error = best.receiver_error;
    report.mu = best.mu;
    report.processable = best.processable;
    report.reason = best.reason;
    if (!best.processable) {
        report.classification = AlignClass::Severed;
    } else if (best.loss <= opts.delta) {
        report.classification = AlignClass::Full;
    } else {
        report.classification = AlignClass::Partial;
    }
    return report;
}

AlignmentReport naive_delivery(const World& w, const PhaseRegistry& reg, const Candidate& sender,
                               const ProfileState& receiver,
                               const CandidateSpace& receiver_space, double delta) {
    AlignmentSearch search(w, reg, sender, receiver, receiver_space, SIZE_MAX);
    const auto candidates = search.receiver_candidates();
    if (candidates.empty()) throw EmptyAdmissibleSpace("receiver space has no admissible candidate");

    std::size_t landing_index = candidates.front();
    for (std::size_t idx : candidates)
        if (receiver_space.candidates[idx].key == sender.key) {
            landing_index = idx;
            break;
        }

    const std::size_t r = search.alphabet_of(landing_index);
    std::vector<std::size_t> map(search.sender_alphabet());
    for (std::size_t t = 0; t < map.size(); ++t) map[t] = t % r;
    const SearchHit hit = search.evaluate(landing_index, map);

    AlignmentReport report;
    const Candidate& landing = receiver_space.candidates[landing_index];
    report.channel.channel = Channel::deterministic(map, r);
    report.channel.deterministic = true;
    report.receiver_phase = landing.phase;
    report.receiver_key = landing.key;
    report.transformation_loss = hit.loss;
    report.receiver_error = hit.receiver_error;
    report.mu = hit.mu;
    report.processable = hit.processable;
    report.reason = hit.reason;
    report.classification = hit.processable
                                ? (hit.loss <= delta ? AlignClass::Full : AlignClass::Partial)
                                : AlignClass::Severed;
    return report;
}

}  // namespace mim
