#pragma once

#include "mim/dist.hpp"

namespace mim {

// All information quantities are in nats; 0 log 0 = 0 throughout.

double entropy(const Dist& p);

// I(X;Y) = sum p(x,y) log(p(x,y) / (p(x) p(y))). Non-negative, symmetric.
double mutual_information(const JointDist& j);

// KL(p||q). Throws SupportViolation when q(x) = 0 < p(x); never returns inf.
double kl_divergence(const Dist& p, const Dist& q);

// Solver-internal variant: returns +inf instead of throwing on a support
// violation, so iterative updates can zero out the offending weight.
double kl_divergence_or_inf(const Dist& p, const Dist& q);

}  // namespace mim
