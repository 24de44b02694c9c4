#include "mim/info.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mim/errors.hpp"

namespace mim {

double entropy(const Dist& p) {
    double h = 0.0;
    for (double v : p.probs)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

double mutual_information(const JointDist& j) {
    const Dist px = j.row_marginal();
    const Dist py = j.col_marginal();
    double mi = 0.0;
    for (std::size_t x = 0; x < j.rows; ++x) {
        if (px[x] == 0.0) continue;
        for (std::size_t y = 0; y < j.cols; ++y) {
            const double v = j.at(x, y);
            if (v > 0.0) mi += v * std::log(v / (px[x] * py[y]));
        }
    }
    return mi;
}

double kl_divergence(const Dist& p, const Dist& q) {
    if (p.size() != q.size()) throw SchemaError("kl_divergence alphabets differ");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) {
            throw SupportViolation("q(" + std::to_string(i) + ") = 0 with p > 0");
        }
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

double kl_divergence_or_inf(const Dist& p, const Dist& q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

}  // namespace mim
