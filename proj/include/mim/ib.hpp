#pragma once

#include <cstdint>
#include <vector>

#include "mim/dist.hpp"

namespace mim {

struct IBOptions {
    double tolerance = 1e-9;  // stop when the objective moves less than this
    int max_iters = 10000;
    int restarts = 1;  // independent Dirichlet(1) initializations, best kept
    // Warm-up stages on a geometric beta schedule before the final run. At
    // large beta the alternating updates harden immediately and cannot split
    // merged clusters; annealing from a soft regime avoids those collapses.
    // 0 runs directly at the target beta.
    int anneal_stages = 32;
};

// Output of the alternating-minimization bottleneck solver.
// objective_trace holds I(O;T) - beta * I(T;Y) measured once per full update
// cycle, at points where the cluster marginal and decoder are Bayes-consistent
// with the encoder; the trace of the kept restart is non-increasing.
struct IBResult {
    Channel encoder;                      // q(t|o)
    std::vector<double> objective_trace;  // nats
    double i_ot = 0.0;                    // I(O;T)
    double i_ty = 0.0;                    // I(T;Y)
    int iterations = 0;
    bool converged = false;
};

// Compress the row variable of `joint` (observations) into `cardinality`
// symbols, trading compression against information about the column variable
// (the target) at weight `beta`. Deterministic for a fixed seed.
IBResult ib_solve(const JointDist& joint, std::size_t cardinality, double beta,
                  const IBOptions& opts, std::uint64_t seed);

// Relabels encoder clusters so that cluster ids follow the first input symbol
// that lands on them (argmax row weight); dead clusters sort last. Removes the
// label arbitrariness of random initialization. Applied by ib_solve.
Channel canonical_cluster_order(const Channel& encoder);

}  // namespace mim
