#include "mim/expfam.hpp"

#include <algorithm>
#include <cmath>

#include "mim/errors.hpp"

namespace mim {

ExpFam ExpFam::make(std::size_t alphabet, std::size_t dim, std::vector<double> stats,
                    std::vector<double> base, std::vector<double> nu) {
    if (alphabet == 0 || dim == 0) throw SchemaError("ExpFam needs alphabet and dim >= 1");
    if (stats.size() != alphabet * dim) throw SchemaError("ExpFam stats table size mismatch");
    if (base.size() != alphabet) throw SchemaError("ExpFam base measure size mismatch");
    if (nu.size() != dim) throw SchemaError("ExpFam parameter size mismatch");
    for (double h : base)
        if (!(h > 0.0)) throw SchemaError("ExpFam base measure must be positive");
    ExpFam ef;
    ef.alphabet = alphabet;
    ef.dim = dim;
    ef.stats = std::move(stats);
    ef.base = std::move(base);
    ef.nu = std::move(nu);
    return ef;
}

ExpFam ExpFam::bernoulli(double nu) {
    return make(2, 1, {0.0, 1.0}, {1.0, 1.0}, {nu});
}

double log_partition(const ExpFam& ef) {
    std::vector<double> exponents(ef.alphabet);
    for (std::size_t x = 0; x < ef.alphabet; ++x) {
        double e = std::log(ef.base[x]);
        for (std::size_t k = 0; k < ef.dim; ++k) e += ef.nu[k] * ef.stat(x, k);
        exponents[x] = e;
    }
    const double top = *std::max_element(exponents.begin(), exponents.end());
    double sum = 0.0;
    for (double e : exponents) sum += std::exp(e - top);
    return top + std::log(sum);
}

Dist expfam_dist(const ExpFam& ef) {
    const double a = log_partition(ef);
    std::vector<double> p(ef.alphabet);
    for (std::size_t x = 0; x < ef.alphabet; ++x) {
        double e = std::log(ef.base[x]);
        for (std::size_t k = 0; k < ef.dim; ++k) e += ef.nu[k] * ef.stat(x, k);
        p[x] = std::exp(e - a);
    }
    // Renormalize the last ulps so downstream validation at 1e-12 holds.
    double sum = 0.0;
    for (double v : p) sum += v;
    for (double& v : p) v /= sum;
    return Dist(std::move(p));
}

std::vector<double> expfam_mean(const ExpFam& ef) {
    const Dist p = expfam_dist(ef);
    std::vector<double> mean(ef.dim, 0.0);
    for (std::size_t x = 0; x < ef.alphabet; ++x)
        for (std::size_t k = 0; k < ef.dim; ++k) mean[k] += p[x] * ef.stat(x, k);
    return mean;
}

}  // namespace mim
