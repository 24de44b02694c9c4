#pragma once

#include <stdexcept>
#include <string>

namespace mim {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A config or world file violates the documented schema.
struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error("schema: " + msg) {}
};

// A probability table is off unit sum beyond tolerance.
struct NormalizationError : Error {
    explicit NormalizationError(const std::string& msg) : Error("normalization: " + msg) {}
};

// A key in a config refers to an unknown target/basis/resolution/agent.
struct UnknownReferenceError : Error {
    explicit UnknownReferenceError(const std::string& msg) : Error("reference: " + msg) {}
};

// KL(p||q) requested with q(x) = 0 < p(x).
struct SupportViolation : Error {
    explicit SupportViolation(const std::string& msg) : Error("support violation: " + msg) {}
};

// Conditioning on an observation symbol with zero marginal probability.
struct ZeroProbabilityObservation : Error {
    explicit ZeroProbabilityObservation(const std::string& msg) : Error("zero-probability observation: " + msg) {}
};

// A phase point has no coarse label under the configured labeling.
struct UnlabeledPhase : Error {
    explicit UnlabeledPhase(const std::string& msg) : Error("unlabeled phase: " + msg) {}
};

// Foregrounding requested over an empty admissible set.
struct EmptyAdmissibleSpace : Error {
    explicit EmptyAdmissibleSpace(const std::string& msg) : Error("empty admissible space: " + msg) {}
};

// Every generated plan exceeds the feasibility cap.
struct NoFeasiblePlan : Error {
    explicit NoFeasiblePlan(const std::string& msg) : Error("no feasible plan: " + msg) {}
};

// Exhaustive channel search requested over an alphabet above the cap.
struct AlphabetTooLarge : Error {
    explicit AlphabetTooLarge(const std::string& msg) : Error("alphabet too large: " + msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("io: " + msg) {}
};

}  // namespace mim
