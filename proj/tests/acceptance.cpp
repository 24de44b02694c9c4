// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "mim/align.hpp"
#include "mim/canonical.hpp"
#include "mim/engine.hpp"
#include "mim/expfam.hpp"
#include "mim/ib.hpp"
#include "mim/info.hpp"
#include "mim/rd.hpp"
#include "mim/scenarios.hpp"
#include "oracles.hpp"

using namespace mim;

namespace {

int failures = 0;

struct Criterion {
    const char* name;
    std::function<bool(std::string&)> body;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool check(bool ok, std::string& msg, const std::string& detail) {
    if (!ok && msg.empty()) msg = detail;
    return ok;
}

// ---- criterion 1: data processing / transformation loss -------------------

bool dpi_suite(std::string& msg) {
    const auto t0 = std::chrono::steady_clock::now();
    RngStream rng(2024, "acceptance-dpi");
    bool ok = true;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n_obs = 2 + static_cast<std::size_t>(rng.uniform() * 3);
        const std::size_t n_y = 2 + static_cast<std::size_t>(rng.uniform() * 3);
        const std::size_t n_t = 2 + static_cast<std::size_t>(rng.uniform() * 3);
        const std::size_t n_out = 1 + static_cast<std::size_t>(rng.uniform() * 4);
        // World joint, stochastic encoder, then a channel on the T side.
        const JointDist oy = oracle::random_joint(rng, n_obs, n_y);
        const Channel encoder = oracle::random_channel(rng, n_obs, n_t);
        const JointDist ty = apply_row_channel(oy, encoder);
        const Channel a = oracle::random_channel(rng, n_t, n_out);
        ok &= check(transformation_loss(ty, a) >= -1e-9, msg, "loss below -1e-9");
        ok &= check(std::fabs(transformation_loss(ty, Channel::identity(n_t))) <= 1e-12, msg,
                    "identity channel loss above 1e-12");
    }
    const double dt = seconds_since(t0);
    ok &= check(dt < 5.0, msg, "runtime " + std::to_string(dt) + "s exceeds 5s");
    return ok;
}

// ---- criterion 2: bottleneck solver ----------------------------------------

bool ib_suite(std::string& msg) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;

    std::vector<JointDist> shipped;
    for (const char* path : {"configs/worlds/two_phase.json", "configs/worlds/fair_binary.json"}) {
        const World w = World::load(path);
        for (std::size_t t = 0; t < w.targets().size(); ++t)
            shipped.push_back(w.obs_target_joint(t));
    }

    // Monotone traces over shipped worlds and 100 seeds.
    for (const JointDist& j : shipped) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const IBResult res = ib_solve(j, 3, 5.0, {}, seed);
            for (std::size_t k = 1; k < res.objective_trace.size(); ++k)
                ok &= check(res.objective_trace[k] <= res.objective_trace[k - 1] + 1e-9, msg,
                            "objective trace increased");
        }
    }

    // beta = 0 collapses compression.
    for (const JointDist& j : shipped) {
        const IBResult res = ib_solve(j, 3, 0.0, {}, 17);
        ok &= check(res.i_ot <= 1e-6, msg, "beta=0 kept I(O;T) above 1e-6");
    }

    // Large beta at full cardinality reaches the exhaustive deterministic
    // optimum. The shipped worlds have posterior pairs as close as 3e-4 nats,
    // so "large" means hard-assignment scale.
    IBOptions opts;
    opts.restarts = 10;
    for (const JointDist& j : shipped) {
        if (j.rows > 5) continue;
        const double best_det = oracle::exhaustive_deterministic_ib(j, j.rows);
        const IBResult res = ib_solve(j, j.rows, 1e6, opts, 5);
        ok &= check(best_det - res.i_ty <= 1e-6, msg,
                    "bottleneck missed the deterministic optimum by " +
                        std::to_string(best_det - res.i_ty));
    }

    const double dt = seconds_since(t0);
    ok &= check(dt < 10.0, msg, "runtime " + std::to_string(dt) + "s exceeds 10s");
    return ok;
}

// ---- criterion 3: sufficiency identity -------------------------------------

bool sufficiency_identity(std::string& msg) {
    bool ok = true;
    for (const char* path : {"configs/worlds/two_phase.json", "configs/worlds/fair_binary.json"}) {
        const World w = World::load(path);
        std::vector<ConditioningBasis> bases = {
            ConditioningBasis::identity("ident", "empirical", w.obs_size())};
        if (w.obs_size() == 4) {
            bases.push_back(ConditioningBasis::make("phase_part", "structural", {0, 0, 1, 1}));
            bases.push_back(ConditioningBasis::make("detail_part", "ideational", {0, 1, 0, 1}));
            bases.push_back(ConditioningBasis::make("whole", "existential", {0, 0, 0, 0}));
        }
        for (const TargetMap& target : w.targets()) {
            for (const ConditioningBasis& basis : bases) {
                for (std::size_t m : {1, 2, 3, 4}) {
                    PhaseRegistry reg = PhaseRegistry::build(w, {target.name}, {basis},
                                                             {{"m", m, 8.0, Horizon::Fine}});
                    const std::size_t n_f = basis.feature_count;
                    std::vector<std::size_t> map(n_f, 0);
                    while (true) {
                        const Candidate c = build_candidate_from_encoder(
                            w, reg, 0, Channel::deterministic(map, m));
                        const double info = w.target_obs_information(w.target_index(target.name));
                        ok &= check(std::fabs(c.gap - (info - c.i_ty)) <= 1e-9, msg,
                                    "chain identity violated at " + target.name + "/" + basis.id);
                        std::size_t pos = n_f;
                        bool done = true;
                        while (pos > 0) {
                            --pos;
                            if (++map[pos] < m) {
                                done = false;
                                break;
                            }
                            map[pos] = 0;
                        }
                        if (done) break;
                    }
                }
            }
        }
    }
    return ok;
}

// ---- criterion 4: exponential-family gradient ------------------------------

bool expfam_gradient(std::string& msg) {
    bool ok = true;
    RngStream rng(99, "acceptance-expfam");
    for (int i = 0; i < 100; ++i) {
        ExpFam ef = ExpFam::make(5, 3,
                                 {0.0, 1.0, 0.5, 1.0, 0.0, 2.0, 2.0, 1.0, 0.0, 0.5, 0.5, 1.5,
                                  1.0, 2.0, 1.0},
                                 {1.0, 0.8, 1.2, 1.0, 0.6},
                                 {rng.uniform() * 6.0 - 3.0, rng.uniform() * 6.0 - 3.0,
                                  rng.uniform() * 6.0 - 3.0});
        const auto mean = expfam_mean(ef);
        const auto fd = oracle::finite_diff_log_partition(ef, 1e-5);
        for (std::size_t k = 0; k < ef.dim; ++k)
            ok &= check(std::fabs(mean[k] - fd[k]) <= 1e-6, msg,
                        "gradient mismatch " + std::to_string(mean[k] - fd[k]));
    }
    return ok;
}

// ---- criterion 5: alignment optimality -------------------------------------

bool alignment_optimality(std::string& msg) {
    bool ok = true;
    RngStream rng(555, "acceptance-align");
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n_latent = 2 + static_cast<std::size_t>(rng.uniform() * 3);
        const std::size_t n_obs = 3 + static_cast<std::size_t>(rng.uniform() * 2);
        const Dist joint = oracle::random_dist(rng, n_latent);
        nlohmann::json channel = nlohmann::json::array();
        for (std::size_t z = 0; z < n_latent; ++z)
            for (double v : oracle::random_dist(rng, n_obs).probs) channel.push_back(v);
        nlohmann::json table = nlohmann::json::array();
        table.push_back(0);
        table.push_back(1);
        for (std::size_t z = 2; z < n_latent; ++z) table.push_back(rng.uniform() < 0.5 ? 0 : 1);
        nlohmann::json spec;
        spec["id"] = "rand";
        spec["latents"] = nlohmann::json::array({{{"name", "z"}, {"size", n_latent}}});
        spec["joint"] = joint.probs;
        spec["obs_size"] = n_obs;
        spec["obs_channel"] = channel;
        nlohmann::json target;
        target["name"] = "y";
        target["table"] = table;
        spec["targets"] = nlohmann::json::array({target});
        const World w = World::build(spec);

        const std::size_t s_card = 2 + static_cast<std::size_t>(rng.uniform() * 3);
        const std::size_t r_card = 2 + static_cast<std::size_t>(rng.uniform() * 3);
        PhaseRegistry reg = PhaseRegistry::build(
            w, {"y"}, {ConditioningBasis::identity("ident", "empirical", n_obs)},
            {{"s", s_card, 10.0, Horizon::Fine}, {"r", r_card, 6.0, Horizon::Coarse}});
        IBOptions opts;
        opts.restarts = 2;
        CandidateSpace space =
            enumerate_candidate_space(w, reg, 1e9, opts, 7000 + static_cast<std::uint64_t>(trial));
        const Candidate sender = space.candidates[0];

        ProfileState receiver;
        receiver.theta.foreground.assign(reg.size(), 0.0);
        receiver.theta.explore.assign(reg.size(), 0.0);
        receiver.theta.stabilize.assign(reg.size(), 0.0);
        receiver.firing.error_cost.assign(reg.size(), 1.0);
        receiver.firing.threshold.assign(reg.size(), 0.02 + rng.uniform() * 0.2);
        receiver.maturity.assign(reg.size(), 0.0);
        for (double& v : receiver.theta.foreground) v = rng.uniform() * 2.0 - 1.0;

        const std::size_t cap = 1 + static_cast<std::size_t>(rng.uniform() * 4);
        AlignOptions ex;
        ex.mode = AlignMode::Exhaustive;
        AlignOptions gr;
        gr.mode = AlignMode::Greedy;
        const AlignmentReport a = optimize_alignment(w, reg, sender, receiver, space, cap, ex);
        const AlignmentReport b = optimize_alignment(w, reg, sender, receiver, space, cap, gr);
        ok &= check(std::fabs(a.transformation_loss - b.transformation_loss) <= 1e-9, msg,
                    "greedy missed exhaustive by " +
                        std::to_string(b.transformation_loss - a.transformation_loss));
    }
    return ok;
}

// ---- criterion 6: hypothesis scenarios and ablations ------------------------

bool hypothesis_suite(std::string& msg) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;

    auto outcome_of = [](const std::string& path) {
        const RunConfig cfg = parse_config(path);
        return evaluate_hypothesis(cfg, run(cfg));
    };

    const HypothesisOutcome h1 = outcome_of("configs/h1.json");
    ok &= check(h1.pass && h1.statistic >= 0.5, msg, "h1 failed");
    const HypothesisOutcome h1_null = outcome_of("configs/h1_ablation.json");
    ok &= check(h1_null.statistic <= 0.05, msg, "h1 ablation above 0.05");

    const HypothesisOutcome h2 = outcome_of("configs/h2.json");
    ok &= check(h2.pass && h2.statistic >= 0.7, msg, "h2 below 0.7");
    ok &= check(std::fabs(h2.details["control_accuracy"].get<double>() - 0.5) <= 0.1, msg,
                "h2 control off chance");

    const HypothesisOutcome h3 = outcome_of("configs/h3.json");
    ok &= check(h3.pass && h3.statistic > 0.0, msg, "h3 not strictly positive");
    const HypothesisOutcome h3_null = outcome_of("configs/h3_ablation.json");
    ok &= check(std::fabs(h3_null.statistic) <= 1e-9, msg, "h3 ablation nonzero");

    const HypothesisOutcome h4 = outcome_of("configs/h4.json");
    ok &= check(h4.pass && h4.statistic >= 0.4, msg, "h4 below 0.4");
    const HypothesisOutcome h4_null = outcome_of("configs/h4_ablation.json");
    ok &= check(h4_null.statistic <= 0.02, msg, "h4 ablation above 0.02");

    const double dt = seconds_since(t0);
    ok &= check(dt < 30.0, msg, "runtime " + std::to_string(dt) + "s exceeds 30s");
    return ok;
}

// ---- criterion 7: determinism and golden records ----------------------------

std::string hypothesis_record_bytes(const std::string& path) {
    const RunConfig cfg = parse_config(path);
    RunRecord record = run(cfg);
    record.metrics["hypothesis"] = evaluate_hypothesis(cfg, record).to_json();
    return record.canonical_bytes();
}

bool determinism(std::string& msg) {
    bool ok = true;
    for (const char* path :
         {"configs/minimal.json", "configs/h1.json", "configs/h1_ablation.json",
          "configs/h2.json", "configs/h3.json", "configs/h3_ablation.json", "configs/h4.json",
          "configs/h4_ablation.json"}) {
        const RunConfig cfg = parse_config(path);
        ok &= check(run(cfg).digest() == run(cfg).digest(), msg,
                    std::string("non-deterministic record for ") + path);
    }
    for (const auto& [config, golden] :
         std::vector<std::pair<std::string, std::string>>{
             {"configs/h1.json", "tests/golden/h1_record.json"},
             {"configs/h3.json", "tests/golden/h3_record.json"}}) {
        std::ifstream in(golden, std::ios::binary);
        if (!in) {
            ok = check(false, msg, "missing golden file " + golden);
            continue;
        }
        const std::string expected((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
        ok &= check(hypothesis_record_bytes(config) == expected, msg,
                    "golden mismatch for " + config);
    }
    return ok;
}

// ---- criterion 8: rate-distortion suite -------------------------------------

bool rd_suite(std::string& msg) {
    bool ok = true;
    RngStream rng(808, "acceptance-rd");
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 3);
        const Dist src = oracle::random_dist(rng, n);
        std::vector<double> grid;
        for (int i = 0; i <= 10; ++i) grid.push_back(i * 0.1);
        const auto curve = rd_curve(src, hamming_distortion(n), n, grid);
        for (std::size_t i = 1; i < curve.size(); ++i)
            ok &= check(curve[i].rate <= curve[i - 1].rate + 1e-6, msg, "rate not non-increasing");
        for (std::size_t i = 1; i + 1 < curve.size(); ++i)
            ok &= check(curve[i].rate <=
                            0.5 * (curve[i - 1].rate + curve[i + 1].rate) + 1e-6,
                        msg, "rate not convex on the grid");
        // Endpoints: lossless limit and the zero-rate threshold.
        ok &= check(std::fabs(curve.front().rate - entropy(src)) <= 1e-6, msg,
                    "R(0) != H(source)");
        double d_max = 1e18;
        for (std::size_t h = 0; h < n; ++h) {
            double e = 0.0;
            for (std::size_t x = 0; x < n; ++x)
                if (x != h) e += src[x];
            d_max = std::min(d_max, e);
        }
        const auto zero = rd_curve(src, hamming_distortion(n), n, {d_max, d_max + 0.05});
        for (const RDPoint& pt : zero)
            ok &= check(std::fabs(pt.rate) <= 1e-6, msg, "R above 1e-6 past the zero threshold");
    }
    return ok;
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<Criterion> criteria = {
        {"1 data-processing / transformation-loss sweep", dpi_suite},
        {"2 bottleneck solver monotonicity and optima", ib_suite},
        {"3 sufficiency identity gap = I(Y;O) - I(Y;T)", sufficiency_identity},
        {"4 exponential-family gradient check", expfam_gradient},
        {"5 greedy alignment matches exhaustive search", alignment_optimality},
        {"6 hypothesis scenarios h1-h4 with ablations", hypothesis_suite},
        {"7 determinism and golden records", determinism},
        {"8 rate-distortion monotone convex curves", rd_suite},
    };

    for (const Criterion& c : criteria) {
        std::string msg;
        bool ok = false;
        try {
            ok = c.body(msg);
        } catch (const std::exception& e) {
            msg = e.what();
        }
        if (ok) {
            std::printf("PASS  %s\n", c.name);
        } else {
            std::printf("FAIL  %s%s%s\n", c.name, msg.empty() ? "" : " -- ", msg.c_str());
            ++failures;
        }
    }
    const double dt = seconds_since(t0);
    std::printf("%s  total %.1fs (budget 60s)\n", failures == 0 ? "PASS" : "FAIL", dt);
    if (dt >= 60.0) {
        std::printf("FAIL  wall-clock budget exceeded\n");
        ++failures;
    }
    return failures == 0 ? 0 : 1;
}
