#pragma once

#include <vector>

#include "mim/dist.hpp"

namespace mim {

// Discrete exponential family over a finite alphabet:
//   p_nu(x) = h(x) exp(nu . stats(x) - log_partition(nu)).
// The natural parameter is written nu throughout.
struct ExpFam {
    std::size_t alphabet = 0;
    std::size_t dim = 0;
    std::vector<double> stats;  // alphabet x dim, row-major: T_k(x)
    std::vector<double> base;   // h(x) > 0 per symbol
    std::vector<double> nu;     // natural parameters, length dim

    static ExpFam make(std::size_t alphabet, std::size_t dim, std::vector<double> stats,
                       std::vector<double> base, std::vector<double> nu);

    // Convenience: Bernoulli with T(x) = x over {0, 1}.
    static ExpFam bernoulli(double nu);

    double stat(std::size_t x, std::size_t k) const { return stats[x * dim + k]; }
};

// log sum_x h(x) exp(nu . stats(x)), computed via log-sum-exp.
double log_partition(const ExpFam& ef);

// Induced distribution p_nu; always a valid Dist.
Dist expfam_dist(const ExpFam& ef);

// E_{p_nu}[stats(x)]: the gradient of the log-partition at nu.
std::vector<double> expfam_mean(const ExpFam& ef);

}  // namespace mim
