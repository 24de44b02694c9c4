#pragma once

#include <string>
#include <vector>

#include "mim/agent.hpp"
#include "mim/candidate.hpp"

namespace mim {

// Channel from a sender representation alphabet into a receiver alphabet.
struct AlignmentChannel {
    Channel channel;
    bool deterministic = false;
};

enum class AlignClass { Full, Partial, Severed };
const char* align_class_name(AlignClass c);

struct AlignmentReport {
    AlignmentChannel channel;
    std::size_t receiver_phase = 0;   // phase index of the receiving candidate
    std::string receiver_key;
    double transformation_loss = 0.0;  // nats, >= -1e-9 by data processing
    double receiver_error = 0.0;       // nats
    double mu = 0.0;                   // directional compatibility at the landing phase
    bool processable = false;
    std::string reason;                // "below-threshold" | "receptive" | "rejected"
    AlignClass classification = AlignClass::Severed;
};

// I(T;Y) - I(A(T);Y) for the sender joint p(T, Y); exact summation.
double transformation_loss(const JointDist& sender_joint, const Channel& a);

// Standardized foregrounding score of a phase point within the receiver's
// profile, over admissible phase points; 0 when the spread is degenerate.
double directional_compatibility(const ProfileState& receiver, const CandidateSpace& space,
                                 std::size_t phase);

// Receiver condition: error within threshold, or above threshold with
// positive directional compatibility.
std::pair<bool, std::string> processability(const ProfileState& receiver, std::size_t phase,
                                            double receiver_error, double mu);

enum class AlignMode { Exhaustive, Greedy };

struct AlignOptions {
    double delta = 0.01;  // Full/Partial transformation-loss bound, nats
    AlignMode mode = AlignMode::Exhaustive;
    std::size_t exhaustive_cap = 6;  // alphabet bound for exhaustive search
};

// Searches deterministic maps from the sender's representation alphabet into
// each admissible receiver candidate's alphabet (image size capped by the
// sender's transmit cap), selects the processable channel with minimal
// transformation loss (ties: lower receiver error, then the fixed search
// order), and classifies Full/Partial/Severed against delta.
AlignmentReport optimize_alignment(const World& w, const PhaseRegistry& reg,
                                   const Candidate& sender, const ProfileState& receiver,
                                   const CandidateSpace& receiver_space,
                                   std::size_t transmit_cap, const AlignOptions& opts);

// Index-preserving raw delivery: lands on the receiver's candidate at the
// sender's own phase key when admissible, else the first admissible one;
// symbols map by index modulo the receiver alphabet.
AlignmentReport naive_delivery(const World& w, const PhaseRegistry& reg, const Candidate& sender,
                               const ProfileState& receiver, const CandidateSpace& receiver_space,
                               double delta = 0.01);

// Exact joint of the sender representation against an arbitrary target seen
// through the world: p(t, y) = sum_o p(o, y) enc(t | psi(o)).
JointDist representation_target_joint(const World& w, const PhaseRegistry& reg,
                                      const Candidate& sender, std::size_t world_target);

}  // namespace mim
