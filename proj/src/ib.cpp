#include "mim/ib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mim/errors.hpp"
#include "mim/info.hpp"
#include "mim/rng.hpp"

namespace mim {

namespace {

// Dirichlet(1) row: normalized exponentials of uniform draws.
std::vector<double> dirichlet_row(RngStream& rng, std::size_t n) {
    std::vector<double> row(n);
    double sum = 0.0;
    for (double& v : row) {
        double u = rng.uniform();
        if (u <= 0.0) u = 0x1.0p-53;
        v = -std::log(u);
        sum += v;
    }
    for (double& v : row) v /= sum;
    return row;
}

struct IBState {
    // encoder[o][t], cluster marginal q[t], decoder[t][y]
    std::vector<std::vector<double>> encoder;
    std::vector<double> cluster;
    std::vector<std::vector<double>> decoder;
};

// Recompute cluster marginal and Bayes decoder from the encoder.
void recompute(const JointDist& joint, const Dist& po, IBState& st) {
    const std::size_t n_o = joint.rows, n_y = joint.cols, m = st.cluster.size();
    std::fill(st.cluster.begin(), st.cluster.end(), 0.0);
    for (auto& row : st.decoder) std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t o = 0; o < n_o; ++o) {
        if (po[o] == 0.0) continue;
        for (std::size_t t = 0; t < m; ++t) {
            const double w = st.encoder[o][t];
            if (w == 0.0) continue;
            st.cluster[t] += po[o] * w;
            for (std::size_t y = 0; y < n_y; ++y) st.decoder[t][y] += w * joint.at(o, y);
        }
    }
    for (std::size_t t = 0; t < m; ++t) {
        if (st.cluster[t] > 0.0) {
            for (double& v : st.decoder[t]) v /= st.cluster[t];
        }
        // Dead clusters keep a zero decoder row; they carry no weight.
    }
}

double objective(const JointDist& joint, const Dist& po, const IBState& st, double beta) {
    const std::size_t n_o = joint.rows, n_y = joint.cols, m = st.cluster.size();
    double i_ot = 0.0;
    for (std::size_t o = 0; o < n_o; ++o) {
        if (po[o] == 0.0) continue;
        for (std::size_t t = 0; t < m; ++t) {
            const double w = st.encoder[o][t];
            if (w > 0.0 && st.cluster[t] > 0.0)
                i_ot += po[o] * w * std::log(w / st.cluster[t]);
        }
    }
    const Dist py = joint.col_marginal();
    double i_ty = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        if (st.cluster[t] == 0.0) continue;
        for (std::size_t y = 0; y < n_y; ++y) {
            const double v = st.decoder[t][y];
            if (v > 0.0 && py[y] > 0.0)
                i_ty += st.cluster[t] * v * std::log(v / py[y]);
        }
    }
    return i_ot - beta * i_ty;
}

}  // namespace

Channel canonical_cluster_order(const Channel& encoder) {
    const std::size_t n_in = encoder.input_size(), m = encoder.output_size();
    // first_owner[t] = smallest input index whose argmax cluster is t.
    std::vector<std::size_t> first_owner(m, n_in);
    for (std::size_t o = 0; o < n_in; ++o) {
        std::size_t best = 0;
        for (std::size_t t = 1; t < m; ++t)
            if (encoder.rows[o][t] > encoder.rows[o][best]) best = t;
        if (first_owner[best] == n_in) first_owner[best] = o;
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return first_owner[a] < first_owner[b];
    });
    std::vector<std::size_t> pos(m);
    for (std::size_t i = 0; i < m; ++i) pos[order[i]] = i;
    std::vector<Dist> rows;
    rows.reserve(n_in);
    for (std::size_t o = 0; o < n_in; ++o) {
        std::vector<double> row(m, 0.0);
        for (std::size_t t = 0; t < m; ++t) row[pos[t]] = encoder.rows[o][t];
        rows.push_back(Dist(std::move(row)));
    }
    return Channel(std::move(rows));
}

IBResult ib_solve(const JointDist& joint, std::size_t cardinality, double beta,
                  const IBOptions& opts, std::uint64_t seed) {
    if (cardinality < 1) throw SchemaError("ib_solve cardinality must be >= 1");
    if (!(beta >= 0.0)) throw SchemaError("ib_solve beta must be >= 0");

    const std::size_t n_o = joint.rows, n_y = joint.cols, m = cardinality;
    const Dist po = joint.row_marginal();

    // Exact posteriors p(y|o); rows with p(o)=0 never contribute.
    std::vector<std::vector<double>> posterior(n_o, std::vector<double>(n_y, 0.0));
    for (std::size_t o = 0; o < n_o; ++o) {
        if (po[o] == 0.0) continue;
        for (std::size_t y = 0; y < n_y; ++y) posterior[o][y] = joint.at(o, y) / po[o];
    }

    // One full update cycle: encoder block, then marginal and decoder blocks.
    // A pinned input keeps its row fixed so a candidate reassignment can
    // hold while the decoders specialize around it.
    auto cycle = [&](IBState& st, double b, std::size_t pinned = SIZE_MAX) {
        for (std::size_t o = 0; o < n_o; ++o) {
            if (po[o] == 0.0 || o == pinned) continue;
            std::vector<double> logw(m, -std::numeric_limits<double>::infinity());
            double logmax = -std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < m; ++t) {
                if (st.cluster[t] == 0.0) continue;
                double d = 0.0;
                if (b > 0.0) {  // the KL term vanishes at beta = 0
                    for (std::size_t y = 0; y < n_y; ++y) {
                        const double p = posterior[o][y];
                        if (p == 0.0) continue;
                        if (st.decoder[t][y] == 0.0) {
                            d = std::numeric_limits<double>::infinity();
                            break;
                        }
                        d += p * std::log(p / st.decoder[t][y]);
                    }
                    if (std::isinf(d)) continue;
                }
                logw[t] = std::log(st.cluster[t]) - b * d;
                logmax = std::max(logmax, logw[t]);
            }
            if (std::isinf(logmax)) continue;  // keep previous row
            double z = 0.0;
            for (std::size_t t = 0; t < m; ++t) {
                st.encoder[o][t] = std::isinf(logw[t]) ? 0.0 : std::exp(logw[t] - logmax);
                z += st.encoder[o][t];
            }
            for (double& v : st.encoder[o]) v /= z;
        }
        recompute(joint, po, st);
    };

    RngStream rng(seed, "ib");
    const int restarts = std::max(1, opts.restarts);

    IBResult best;
    double best_final = std::numeric_limits<double>::infinity();

    for (int attempt = 0; attempt < restarts; ++attempt) {
        IBState st;
        st.encoder.assign(n_o, {});
        for (std::size_t o = 0; o < n_o; ++o) st.encoder[o] = dirichlet_row(rng, m);
        st.cluster.assign(m, 0.0);
        st.decoder.assign(m, std::vector<double>(n_y, 0.0));
        recompute(joint, po, st);

        // Annealing warm-up toward the target beta, with a small seeded
        // jitter after each stage so equalized clusters can re-separate.
        if (beta > 0.0 && opts.anneal_stages > 0 && m > 1) {
            const double lo = std::min(0.5, beta);
            for (int stage = 0; stage < opts.anneal_stages; ++stage) {
                const double b =
                    lo * std::pow(beta / lo, static_cast<double>(stage + 1) / opts.anneal_stages);
                double prev = objective(joint, po, st, b);
                for (int it = 0; it < 400; ++it) {
                    cycle(st, b);
                    const double cur = objective(joint, po, st, b);
                    if (std::fabs(prev - cur) < 1e-7) break;
                    prev = cur;
                }
                for (std::size_t o = 0; o < n_o; ++o) {
                    double z = 0.0;
                    for (double& v : st.encoder[o]) {
                        v *= 1.0 + 1e-3 * (rng.uniform() - 0.5);
                        z += v;
                    }
                    for (double& v : st.encoder[o]) v /= z;
                }
                recompute(joint, po, st);
            }
        }

        std::vector<double> trace;
        trace.push_back(objective(joint, po, st, beta));
        bool converged = false;
        int iter = 0;
        for (; iter < opts.max_iters; ++iter) {
            cycle(st, beta);
            trace.push_back(objective(joint, po, st, beta));
            const std::size_t k = trace.size();
            if (std::fabs(trace[k - 2] - trace[k - 1]) < opts.tolerance) {
                converged = true;
                ++iter;
                break;
            }
        }

        // Reassignment rescue: merged posterior classes and inputs split
        // across clusters with identical decoders are fixed points the
        // updates cannot leave. Pin one input onto one cluster, re-converge,
        // and keep the move only when the objective strictly improves; the
        // recorded trace stays non-increasing.
        for (int round = 0; round < 50; ++round) {
            bool improved = false;
            for (std::size_t o = 0; o < n_o && !improved; ++o) {
                if (po[o] == 0.0) continue;
                for (std::size_t t = 0; t < m && !improved; ++t) {
                    if (st.encoder[o][t] == 1.0) continue;
                    const IBState saved = st;
                    std::fill(st.encoder[o].begin(), st.encoder[o].end(), 0.0);
                    st.encoder[o][t] = 1.0;
                    recompute(joint, po, st);
                    for (int it = 0; it < 30; ++it) cycle(st, beta, o);
                    double prev = objective(joint, po, st, beta);
                    for (int it = 0; it < 500; ++it) {
                        cycle(st, beta);
                        const double cur = objective(joint, po, st, beta);
                        if (std::fabs(prev - cur) < opts.tolerance) break;
                        prev = cur;
                    }
                    const double cand = objective(joint, po, st, beta);
                    if (cand < trace.back() - opts.tolerance) {
                        trace.push_back(cand);
                        improved = true;
                    } else {
                        st = saved;
                    }
                }
            }
            if (!improved) break;
        }

        if (trace.back() < best_final) {
            best_final = trace.back();
            IBResult res;
            std::vector<Dist> enc_rows;
            enc_rows.reserve(n_o);
            for (std::size_t o = 0; o < n_o; ++o) {
                // Inputs with zero marginal never see an update; pin them to a
                // fixed row so output does not depend on the initialization.
                if (po[o] == 0.0) {
                    enc_rows.push_back(Dist::point_mass(m, 0));
                    continue;
                }
                enc_rows.push_back(Dist(st.encoder[o]));
            }
            res.encoder = canonical_cluster_order(Channel(std::move(enc_rows)));
            res.objective_trace = std::move(trace);
            res.iterations = iter;
            res.converged = converged;
            // Report I(O;T) and I(T;Y) from the canonical encoder.
            res.i_ot = mutual_information(joint_from_channel(po, res.encoder));
            res.i_ty = mutual_information(apply_row_channel(joint, res.encoder).transposed());
            best = std::move(res);
        }
    }
    return best;
}

}  // namespace mim
