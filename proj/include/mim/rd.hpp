#pragma once

#include <vector>

#include "mim/dist.hpp"

namespace mim {

struct RDPoint {
    double distortion = 0.0;  // requested D
    double rate = 0.0;        // R(D) in nats
};

// Rate-distortion curve for a finite source and distortion table d(x, xhat)
// (row-major, size |source| x n_hat). For each grid value D, computes
//   R(D) = min_{channels with E[d] <= D} I(X; Xhat)
// by Blahut iteration at a fixed slope, with a bisection sweep over slopes to
// hit the distortion budget. R is non-increasing and convex in D.
std::vector<RDPoint> rd_curve(const Dist& source, const std::vector<double>& distortion,
                              std::size_t n_hat, const std::vector<double>& grid);

// Hamming distortion table over an n-symbol alphabet.
std::vector<double> hamming_distortion(std::size_t n);

}  // namespace mim
