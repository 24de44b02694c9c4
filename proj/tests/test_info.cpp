#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mim/errors.hpp"
#include "mim/info.hpp"
#include "oracles.hpp"

using namespace mim;

TEST_CASE("entropy of analytic cases") {
    CHECK(entropy(Dist::uniform(4)) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(entropy(Dist::point_mass(3, 1)) == 0.0);
    CHECK(entropy(Dist({0.5, 0.25, 0.25})) == doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("entropy bounded by log alphabet") {
    RngStream rng(11, "entropy");
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 6);
        const Dist p = oracle::random_dist(rng, n);
        const double h = entropy(p);
        CHECK(h >= 0.0);
        CHECK(h <= std::log(static_cast<double>(n)) + 1e-12);
    }
}

TEST_CASE("mutual information of independent uniforms is zero") {
    JointDist j(2, 3);
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 3; ++y) j.at(x, y) = 1.0 / 6.0;
    CHECK(mutual_information(j) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("mutual information of a perfectly correlated fair pair is ln 2") {
    JointDist j(2, 2);
    j.at(0, 0) = 0.5;
    j.at(1, 1) = 0.5;
    CHECK(mutual_information(j) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("binary symmetric corruption matches direct summation") {
    // Uniform input, flip probability 0.1.
    JointDist j(2, 2);
    j.at(0, 0) = 0.45;
    j.at(0, 1) = 0.05;
    j.at(1, 0) = 0.05;
    j.at(1, 1) = 0.45;
    CHECK(mutual_information(j) == doctest::Approx(oracle::direct_mi(j)).epsilon(1e-12));
}

TEST_CASE("mutual information bounded by both marginal entropies") {
    RngStream rng(23, "mi-bounds");
    for (int i = 0; i < 500; ++i) {
        const std::size_t r = 2 + static_cast<std::size_t>(rng.uniform() * 4);
        const std::size_t c = 2 + static_cast<std::size_t>(rng.uniform() * 4);
        const JointDist j = oracle::random_joint(rng, r, c);
        const double mi = mutual_information(j);
        CHECK(mi >= -1e-12);
        CHECK(mi <= entropy(j.row_marginal()) + 1e-9);
        CHECK(mi <= entropy(j.col_marginal()) + 1e-9);
        // Symmetry under transposition.
        CHECK(mutual_information(j.transposed()) == doctest::Approx(mi).epsilon(1e-10));
    }
}

TEST_CASE("kl divergence identities and error case") {
    const Dist p({0.3, 0.7});
    CHECK(kl_divergence(p, p) == 0.0);
    CHECK(kl_divergence(Dist({1.0, 0.0}), Dist({0.5, 0.5})) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(kl_divergence(Dist({0.5, 0.5}), Dist({1.0, 0.0})), SupportViolation);
}

TEST_CASE("kl divergence is non-negative and zero only at equality") {
    RngStream rng(31, "kl");
    for (int i = 0; i < 300; ++i) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 5);
        const Dist p = oracle::random_dist(rng, n);
        const Dist q = oracle::random_dist(rng, n);
        CHECK(kl_divergence(p, q) >= -1e-12);
    }
}

TEST_CASE("data processing at the kernel level") {
    // Applying any channel to the T side never raises information about Y.
    RngStream rng(47, "dpi");
    for (int i = 0; i < 1000; ++i) {
        const std::size_t t = 2 + static_cast<std::size_t>(rng.uniform() * 3);
        const std::size_t y = 2 + static_cast<std::size_t>(rng.uniform() * 3);
        const std::size_t z = 1 + static_cast<std::size_t>(rng.uniform() * 4);
        const JointDist j = oracle::random_joint(rng, t, y);
        const Channel a = oracle::random_channel(rng, t, z);
        const double before = mutual_information(j);
        const double after = mutual_information(apply_row_channel(j, a));
        CHECK(after <= before + 1e-9);
    }
}
