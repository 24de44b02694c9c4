#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>

#include "mim/agent.hpp"
#include "mim/config.hpp"
#include "mim/errors.hpp"
#include "mim/info.hpp"

using namespace mim;

namespace {

struct Fixture {
    World world = World::load("configs/worlds/two_phase.json");
    PhaseRegistry reg;
    CandidateSpace space;

    Fixture() {
        reg = PhaseRegistry::build(
            world, {"phase"},
            {ConditioningBasis::identity("ident", "empirical", 4),
             ConditioningBasis::make("phase_part", "structural", {0, 0, 1, 1}),
             ConditioningBasis::make("detail_part", "ideational", {0, 1, 0, 1}),
             ConditioningBasis::make("whole", "existential", {0, 0, 0, 0})},
            {{"fine", 4, 20.0, Horizon::Fine}, {"coarse", 2, 4.0, Horizon::Coarse}});
        IBOptions opts;
        opts.restarts = 3;
        space = enumerate_candidate_space(world, reg, 1e9, opts, 17);
    }

    ProfileState profile() const {
        ProfileState st;
        st.theta.foreground.assign(reg.size(), 0.0);
        st.theta.explore.assign(reg.size(), 0.0);
        st.theta.stabilize.assign(reg.size(), 0.0);
        st.firing.error_cost.assign(reg.size(), 1.0);
        st.firing.threshold.assign(reg.size(), 0.5);
        st.maturity.assign(reg.size(), 0.0);
        st.plasticity = {0.1, 0.2, 0.1};
        return st;
    }

    std::vector<double> errors_at(std::size_t obs) const {
        std::vector<double> e(space.candidates.size());
        for (std::size_t i = 0; i < e.size(); ++i)
            e[i] = prediction_error(world, reg, space.candidates[i], obs);
        return e;
    }
};

}  // namespace

TEST_CASE("prediction error vanishes for an exactly sufficient candidate") {
    const World w = World::load("configs/worlds/fair_binary.json");
    PhaseRegistry reg =
        PhaseRegistry::build(w, {"bit"}, {ConditioningBasis::identity("ident", "empirical", 2)},
                             {{"fine", 2, 30.0, Horizon::Fine}});
    const Candidate c =
        build_candidate_from_encoder(w, reg, 0, Channel::identity(2));
    for (std::size_t o = 0; o < 2; ++o) CHECK(prediction_error(w, reg, c, o) == 0.0);
}

TEST_CASE("constant encoder: observation-average of pointwise errors is I(Y;O)") {
    Fixture fx;
    const std::size_t phase = fx.reg.index_of("phase/ident/fine");
    const Candidate c =
        build_candidate_from_encoder(fx.world, fx.reg, phase, Channel::constant(4, 4, 0));
    double avg = 0.0;
    for (std::size_t o = 0; o < fx.world.obs_size(); ++o)
        avg += fx.world.obs_marginal()[o] * prediction_error(fx.world, fx.reg, c, o);
    CHECK(std::fabs(avg - fx.world.target_obs_information(0)) <= 1e-9);
    CHECK(std::fabs(avg - c.gap) <= 1e-9);
}

TEST_CASE("pointwise errors average to the admissibility gap for every candidate") {
    Fixture fx;
    for (const Candidate& c : fx.space.candidates) {
        double avg = 0.0;
        for (std::size_t o = 0; o < fx.world.obs_size(); ++o)
            avg += fx.world.obs_marginal()[o] * prediction_error(fx.world, fx.reg, c, o);
        CHECK(std::fabs(avg - c.gap) <= 1e-9);
    }
}

TEST_CASE("a decoder hole raises a support violation") {
    Fixture fx;
    Candidate c = fx.space.candidates[fx.reg.index_of("phase/ident/fine")];
    // Punch a hole: decode cluster 0 to a point mass on symbol 0.
    c.decoder.rows[0] = Dist::point_mass(c.decoder.rows[0].size(), 0);
    c.encoder = Channel::identity(4);
    bool threw = false;
    for (std::size_t o = 0; o < 4; ++o) {
        try {
            prediction_error(fx.world, fx.reg, c, o);
        } catch (const SupportViolation&) {
            threw = true;
        }
    }
    CHECK(threw);
}

TEST_CASE("error intensity arithmetic") {
    Fixture fx;
    ProfileState st = fx.profile();
    st.firing.error_cost[0] = 2.0;
    st.firing.threshold[0] = 0.5;
    auto [intensity, crossed] = error_intensity(st, 0, 0.3);
    CHECK(intensity == doctest::Approx(0.6));
    CHECK(crossed);
    st.firing.error_cost[0] = 0.0;
    CHECK(error_intensity(st, 0, 5.0).first == 0.0);
    CHECK_FALSE(error_intensity(st, 0, 5.0).second);
    st.firing.error_cost[0] = 2.0;
    CHECK(error_intensity(st, 0, 0.0).first == 0.0);
}

TEST_CASE("foregrounding distribution") {
    Fixture fx;
    const ProfileState st = fx.profile();
    const ScoreWeights w{1.0, 1.0, 1.0, 0.0};
    const std::vector<double> zero_errors(fx.space.candidates.size(), 0.0);
    RngStream rng(3, "fire");

    SUBCASE("single admissible candidate fires with probability one") {
        std::vector<bool> mask(fx.space.candidates.size(), false);
        mask[2] = true;
        const PostOperatingState post =
            foreground(st, fx.space, fx.reg, zero_errors, w, 1.0, rng, &mask);
        CHECK(post.fired == 2);
        CHECK(post.pi[2] == doctest::Approx(1.0));
    }

    SUBCASE("equal scores make the distribution uniform") {
        const PostOperatingState post = foreground(st, fx.space, fx.reg, zero_errors, w, 1.0, rng);
        const double expect = 1.0 / static_cast<double>(fx.space.candidates.size());
        for (double p : post.pi) CHECK(p == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("a ten-point score gap concentrates the softmax") {
        // Direct evaluation: 1 / (1 + 2 e^{-10}) > 0.9999 among three candidates.
        ProfileState biased = fx.profile();
        biased.theta.foreground[5] = 10.0;
        std::vector<bool> mask(fx.space.candidates.size(), false);
        mask[1] = mask[5] = mask[6] = true;
        const PostOperatingState post =
            foreground(biased, fx.space, fx.reg, zero_errors, w, 1.0, rng, &mask);
        CHECK(post.pi[5] >= 0.9999);
    }

    SUBCASE("pi is a valid distribution and argmax is shift invariant") {
        RngStream gen(9, "fuzz");
        for (int trial = 0; trial < 100; ++trial) {
            ProfileState random_st = fx.profile();
            std::vector<double> errors(fx.space.candidates.size());
            for (std::size_t i = 0; i < fx.space.candidates.size(); ++i) {
                random_st.theta.foreground[i] = gen.uniform() * 4.0 - 2.0;
                errors[i] = gen.uniform();
            }
            const PostOperatingState a =
                foreground(random_st, fx.space, fx.reg, errors, w, 0.0, rng);
            double sum = 0.0;
            for (double p : a.pi) {
                CHECK(p >= 0.0);
                sum += p;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            ProfileState shifted = random_st;
            for (double& v : shifted.theta.foreground) v += 13.7;
            const PostOperatingState b =
                foreground(shifted, fx.space, fx.reg, errors, w, 0.0, rng);
            CHECK(a.fired == b.fired);
        }
    }

    SUBCASE("empty admissible set is an error") {
        std::vector<bool> mask(fx.space.candidates.size(), false);
        CHECK_THROWS_AS(foreground(st, fx.space, fx.reg, zero_errors, w, 1.0, rng, &mask),
                        EmptyAdmissibleSpace);
    }

    SUBCASE("zero inclusion weight removes a target from foregrounding") {
        ProfileState gated = fx.profile();
        gated.formation.target_weights["phase"] = 0.0;
        CHECK_THROWS_AS(foreground(gated, fx.space, fx.reg, zero_errors, w, 1.0, rng),
                        EmptyAdmissibleSpace);
    }
}

TEST_CASE("foregrounding direction field") {
    Fixture fx;
    ProfileState st = fx.profile();
    const ScoreWeights w{1.0, 1.0, 1.0, 0.0};

    SUBCASE("balanced fields and zero errors give the zero vector") {
        st.theta.explore.assign(fx.reg.size(), 0.4);
        st.theta.stabilize.assign(fx.reg.size(), 0.4);
        const auto v = foregrounding_direction(
            st, fx.space, std::vector<double>(fx.space.candidates.size(), 0.0), w);
        for (double x : v) CHECK(x == 0.0);
    }

    SUBCASE("a single nonzero error points exactly there") {
        std::vector<double> errors(fx.space.candidates.size(), 0.0);
        errors[3] = 0.8;
        const auto v = foregrounding_direction(st, fx.space, errors, w);
        for (std::size_t i = 0; i < v.size(); ++i)
            CHECK(v[i] == (i == 3 ? doctest::Approx(0.8) : doctest::Approx(0.0)));
    }

    SUBCASE("shipped explorer profile matches the hand-computed table") {
        std::ifstream in("configs/agents/explorer.json");
        REQUIRE(in.good());
        nlohmann::json doc;
        in >> doc;
        ProfileState ex = fx.profile();
        ex.theta.explore = SparseTable::parse(doc["profile"]["explore"], "e").resolve(fx.reg, "e");
        ex.theta.stabilize =
            SparseTable::parse(doc["profile"]["stabilize"], "s").resolve(fx.reg, "s");
        const auto v = foregrounding_direction(
            ex, fx.space, std::vector<double>(fx.space.candidates.size(), 0.0), w);
        for (std::size_t i = 0; i < fx.reg.size(); ++i) {
            const double expect = fx.reg.points[i].key == "phase/ident/fine" ? 0.75 : 0.25;
            CHECK(v[i] == doctest::Approx(expect));
        }
    }
}

TEST_CASE("plan generation") {
    std::array<PlanCosts, kPlanKindCount> costs{};
    CHECK(generate_plans(costs, "k", {}).size() == 5);
    CHECK(generate_plans(costs, "k", {"p1", "p2"}).size() == 7);
    for (const Plan& p : generate_plans(costs, "k", {"p1"})) CHECK(p.costs.total() == 0.0);
    costs[static_cast<std::size_t>(PlanKind::Act)] = {0.4, 0.2, 0.1, 0.0, 0.0};
    const auto plans = generate_plans(costs, "k", {});
    CHECK(plans[4].kind == PlanKind::Act);
    CHECK(plans[4].costs.total() == doctest::Approx(0.7));
}

TEST_CASE("plan priority is the stated linear form") {
    Plan plan;
    plan.kind = PlanKind::Act;
    plan.costs = {0.1, 0.1, 0.1, 0.1, 0.1};

    SUBCASE("all weights zero") {
        CHECK(plan_priority({}, plan, {0.4, 1.0, 0.3, 0.2}, Horizon::Fine) == 0.0);
    }

    SUBCASE("arithmetic") {
        PlanWeights w;
        w.error_reduction = 1.0;
        w.value = 0.5;
        w.compute_cost = 1.0;
        w.observation_cost = 1.0;
        w.action_cost = 1.0;
        w.horizon = 2.0;
        PlanContext ctx{0.4, 0.0, 0.1, 0.1};
        // 0.4 + 0 - 0.1 - 0.1 - 0.5 + 2 (fine -> Act bonus)
        CHECK(plan_priority(w, plan, ctx, Horizon::Fine) == doctest::Approx(1.7));
        // Coarse horizon drops the bonus for Act.
        CHECK(plan_priority(w, plan, ctx, Horizon::Coarse) == doctest::Approx(-0.3));
    }

    SUBCASE("coarse horizon favors reflective kinds") {
        PlanWeights w;
        w.horizon = 1.0;
        Plan suspend;
        suspend.kind = PlanKind::Suspend;
        CHECK(plan_priority(w, suspend, {}, Horizon::Coarse) == doctest::Approx(1.0));
        CHECK(plan_priority(w, suspend, {}, Horizon::Fine) == doctest::Approx(0.0));
    }
}

TEST_CASE("plan selection") {
    RngStream rng(5, "plan");
    std::array<PlanCosts, kPlanKindCount> costs{};

    SUBCASE("single feasible plan is selected with an empty queue remainder") {
        std::vector<Plan> plans = {Plan{PlanKind::Suspend, "k", "", {}}};
        auto [plan, queue] = select_plan(plans, {0.0}, 1.0, 3, rng);
        CHECK(plan.kind == PlanKind::Suspend);
        CHECK(queue.entries.empty());
    }

    SUBCASE("capacity zero keeps the queue empty") {
        const auto plans = generate_plans(costs, "k", {});
        auto [plan, queue] = select_plan(plans, std::vector<double>(plans.size(), 0.0), 1.0, 0, rng);
        CHECK(queue.entries.empty());
    }

    SUBCASE("queue keeps priority order and drops the lowest") {
        const auto plans = generate_plans(costs, "k", {});
        auto [plan, queue] =
            select_plan(plans, {0.5, 0.1, 0.9, 0.7, 0.3}, 0.0, 2, rng);
        CHECK(plan.kind == PlanKind::Reinterpret);  // priority 0.9
        REQUIRE(queue.entries.size() == 2);
        CHECK(queue.entries[0].second == doctest::Approx(0.7));
        CHECK(queue.entries[1].second == doctest::Approx(0.5));
    }

    SUBCASE("equal priorities sample uniformly") {
        const auto plans = generate_plans(costs, "k", {});
        std::vector<std::size_t> counts(kPlanKindCount, 0);
        RngStream sampler(123, "uniform");
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            auto [plan, queue] =
                select_plan(plans, std::vector<double>(plans.size(), 0.0), 1.0, 0, sampler);
            counts[static_cast<std::size_t>(plan.kind)]++;
        }
        double tv = 0.0;
        for (std::size_t k = 0; k < 5; ++k)
            tv += std::fabs(counts[k] / static_cast<double>(n) - 0.2);
        CHECK(tv / 2.0 <= 0.02);
    }

    SUBCASE("a plan above the feasibility cap is never selected") {
        auto plans = generate_plans(costs, "k", {});
        plans[4].costs = {5.0, 5.0, 0.0, 0.0, 0.0};  // Act, total 10
        const double cap = 1.0;
        std::vector<Plan> feasible;
        for (const Plan& p : plans)
            if (p.costs.total() <= cap) feasible.push_back(p);
        CHECK(feasible.size() == 4);
        RngStream sampler(9, "cap");
        for (int i = 0; i < 10000; ++i) {
            auto [plan, queue] = select_plan(
                feasible, std::vector<double>(feasible.size(), 0.0), 1.0, 0, sampler);
            CHECK(plan.kind != PlanKind::Act);
        }
    }
}

TEST_CASE("feedback updates") {
    Fixture fx;
    const std::size_t x = 5;

    SUBCASE("zero rates leave the profile unchanged") {
        ProfileState st = fx.profile();
        st.plasticity = {0.0, 0.0, 0.0};
        const ProfileState out = apply_feedback(st, x, {0.4, 0, 0, 0, 0}, 1.0, {});
        CHECK(out.theta.foreground == st.theta.foreground);
        CHECK(out.maturity == st.maturity);
        CHECK(out.firing.threshold == st.firing.threshold);
    }

    SUBCASE("full maturity step on success") {
        ProfileState st = fx.profile();
        st.plasticity.maturity_rate = 1.0;
        const ProfileState out = apply_feedback(st, x, {-0.2, 0, 0, 0, 0}, 0.0, {});
        CHECK(out.maturity[x] == doctest::Approx(1.0));
    }

    SUBCASE("repeated success strictly increases foregrounding") {
        ProfileState st = fx.profile();
        double prev = st.theta.foreground[x];
        for (int i = 0; i < 5; ++i) {
            st = apply_feedback(st, x, {-0.3, 0, 0, 0, 0}, 0.0, {});
            CHECK(st.theta.foreground[x] > prev);
            prev = st.theta.foreground[x];
        }
    }

    SUBCASE("only the fired phase point changes") {
        ProfileState st = fx.profile();
        const ProfileState out = apply_feedback(st, x, {0.25, 0, 0, 0, 0}, 0.9, {});
        for (std::size_t i = 0; i < fx.reg.size(); ++i) {
            if (i == x) continue;
            CHECK(out.theta.foreground[i] == st.theta.foreground[i]);
            CHECK(out.theta.explore[i] == st.theta.explore[i]);
            CHECK(out.theta.stabilize[i] == st.theta.stabilize[i]);
            CHECK(out.maturity[i] == st.maturity[i]);
            CHECK(out.firing.threshold[i] == st.firing.threshold[i]);
            CHECK(out.firing.error_cost[i] == st.firing.error_cost[i]);
        }
    }

    SUBCASE("costly failure sensitizes stabilization above the gate") {
        ProfileState st = fx.profile();
        st.firing.error_cost[x] = 1.5;
        FeedbackOptions opts;
        opts.sensitization_threshold = 1.0;
        const ProfileState out = apply_feedback(st, x, {0.3, 0, 0, 0, 0}, 0.0, opts);
        CHECK(out.theta.stabilize[x] == doctest::Approx(st.theta.stabilize[x] + 0.1 * 0.3));
        // Below the gate nothing happens.
        st.firing.error_cost[x] = 0.5;
        const ProfileState out2 = apply_feedback(st, x, {0.3, 0, 0, 0, 0}, 0.0, opts);
        CHECK(out2.theta.stabilize[x] == st.theta.stabilize[x]);
    }

    SUBCASE("maturity stays in the unit interval under any feedback sequence") {
        ProfileState st = fx.profile();
        st.plasticity.maturity_rate = 0.9;
        RngStream rng(31, "fb");
        for (int i = 0; i < 500; ++i) {
            const std::size_t phase = static_cast<std::size_t>(rng.uniform() * fx.reg.size());
            const double dl = rng.uniform() * 2.0 - 1.0;
            st = apply_feedback(st, phase, {dl, 0, 0, 0, 0}, rng.uniform(), {});
            for (double m : st.maturity) {
                CHECK(m >= 0.0);
                CHECK(m <= 1.0);
            }
        }
    }

    SUBCASE("threshold adaptation is off by default and EMA when enabled") {
        ProfileState st = fx.profile();
        st.plasticity.threshold_rate = 0.5;
        const ProfileState off = apply_feedback(st, x, {-0.1, 0, 0, 0, 0}, 2.0, {});
        CHECK(off.firing.threshold[x] == st.firing.threshold[x]);
        FeedbackOptions opts;
        opts.adapt_threshold = true;
        const ProfileState on = apply_feedback(st, x, {-0.1, 0, 0, 0, 0}, 2.0, opts);
        CHECK(on.firing.threshold[x] == doctest::Approx(0.5 * 0.5 + 0.5 * 2.0));
    }
}
