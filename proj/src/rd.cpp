#include "mim/rd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mim/errors.hpp"

namespace mim {

namespace {

struct BlahutOut {
    double distortion = 0.0;
    double rate = 0.0;
};

// Fixed-slope Blahut iteration; slope <= 0. Works in the log domain so that
// extreme slopes reduce cleanly to hard assignment on argmin distortion.
BlahutOut blahut_at_slope(const Dist& p, const std::vector<double>& d, std::size_t n_hat,
                          double slope) {
    const std::size_t n = p.size();
    std::vector<double> q(n_hat, 1.0 / static_cast<double>(n_hat));
    std::vector<double> channel(n * n_hat, 0.0);

    for (int iter = 0; iter < 20000; ++iter) {
        // Channel update: rows proportional to q(xhat) exp(slope * d).
        for (std::size_t x = 0; x < n; ++x) {
            double logmax = -std::numeric_limits<double>::infinity();
            for (std::size_t h = 0; h < n_hat; ++h) {
                if (q[h] == 0.0) continue;
                logmax = std::max(logmax, std::log(q[h]) + slope * d[x * n_hat + h]);
            }
            double z = 0.0;
            for (std::size_t h = 0; h < n_hat; ++h) {
                double w = 0.0;
                if (q[h] > 0.0) w = std::exp(std::log(q[h]) + slope * d[x * n_hat + h] - logmax);
                channel[x * n_hat + h] = w;
                z += w;
            }
            for (std::size_t h = 0; h < n_hat; ++h) channel[x * n_hat + h] /= z;
        }
        // Output marginal update.
        std::vector<double> q_next(n_hat, 0.0);
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t h = 0; h < n_hat; ++h) q_next[h] += p[x] * channel[x * n_hat + h];
        double delta = 0.0;
        for (std::size_t h = 0; h < n_hat; ++h) delta += std::fabs(q_next[h] - q[h]);
        q = std::move(q_next);
        if (delta < 1e-15) break;
    }

    BlahutOut out;
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t h = 0; h < n_hat; ++h) {
            const double w = channel[x * n_hat + h];
            if (w == 0.0) continue;
            out.distortion += p[x] * w * d[x * n_hat + h];
            if (q[h] > 0.0) out.rate += p[x] * w * std::log(w / q[h]);
        }
    }
    out.rate = std::max(out.rate, 0.0);
    return out;
}

}  // namespace

std::vector<double> hamming_distortion(std::size_t n) {
    std::vector<double> d(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
    return d;
}

std::vector<RDPoint> rd_curve(const Dist& source, const std::vector<double>& distortion,
                              std::size_t n_hat, const std::vector<double>& grid) {
    const std::size_t n = source.size();
    if (n_hat == 0 || distortion.size() != n * n_hat)
        throw SchemaError("rd_curve distortion table size mismatch");
    for (double v : distortion)
        if (!(v >= 0.0)) throw SchemaError("rd_curve distortion must be >= 0");
    for (double v : grid)
        if (!(v >= 0.0)) throw SchemaError("rd_curve grid values must be >= 0");

    // Best constant reproduction: above this distortion the rate is zero.
    double d_max = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < n_hat; ++h) {
        double e = 0.0;
        for (std::size_t x = 0; x < n; ++x) e += source[x] * distortion[x * n_hat + h];
        d_max = std::min(d_max, e);
    }
    // Floor: every x reproduced at its own argmin.
    double d_floor = 0.0;
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < n; ++x) {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t h = 0; h < n_hat; ++h) lo = std::min(lo, distortion[x * n_hat + h]);
        d_floor += source[x] * lo;
        for (std::size_t h = 0; h < n_hat; ++h) {
            const double gap = distortion[x * n_hat + h] - lo;
            if (gap > 0.0) min_gap = std::min(min_gap, gap);
        }
    }
    const double slope_floor = std::isinf(min_gap) ? -1.0 : -60.0 / min_gap;

    std::vector<RDPoint> out;
    out.reserve(grid.size());
    for (double target : grid) {
        RDPoint pt;
        pt.distortion = target;
        if (target >= d_max - 1e-12) {
            pt.rate = 0.0;
        } else if (target <= d_floor + 1e-12) {
            pt.rate = blahut_at_slope(source, distortion, n_hat, slope_floor).rate;
        } else {
            // D(slope) is non-decreasing in slope; bisect to the budget.
            double lo = slope_floor, hi = 0.0;
            BlahutOut best = blahut_at_slope(source, distortion, n_hat, slope_floor);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const BlahutOut res = blahut_at_slope(source, distortion, n_hat, mid);
                if (res.distortion <= target) {
                    best = res;
                    lo = mid;
                } else {
                    hi = mid;
                }
                if (std::fabs(res.distortion - target) < 1e-11) break;
            }
            pt.rate = best.rate;
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace mim
