#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mim/errors.hpp"
#include "mim/info.hpp"
#include "mim/rd.hpp"
#include "oracles.hpp"

using namespace mim;

TEST_CASE("rate is zero once a constant reproduction meets the budget") {
    const Dist src({0.6, 0.4});
    // Best constant reproduction has expected Hamming distortion 0.4.
    const auto curve = rd_curve(src, hamming_distortion(2), 2, {0.4, 0.5, 1.0});
    for (const RDPoint& pt : curve) CHECK(pt.rate == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("lossless limit equals the source entropy under Hamming") {
    const Dist src({0.3, 0.45, 0.25});
    const auto curve = rd_curve(src, hamming_distortion(3), 3, {0.0});
    CHECK(curve[0].rate == doctest::Approx(entropy(src)).epsilon(1e-6));
}

TEST_CASE("binary uniform point matches the fine grid oracle") {
    const Dist src({0.5, 0.5});
    const auto curve = rd_curve(src, hamming_distortion(2), 2, {0.1});
    const double expect = oracle::rd_binary_grid_oracle(src, 0.1);
    CHECK(std::fabs(curve[0].rate - expect) <= 1e-3);
}

TEST_CASE("curves are non-increasing and convex on the grid") {
    RngStream rng(71, "rd");
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 3);
        const Dist src = oracle::random_dist(rng, n);
        std::vector<double> grid;
        for (int i = 0; i <= 8; ++i) grid.push_back(i * 0.1);
        const auto curve = rd_curve(src, hamming_distortion(n), n, grid);
        for (std::size_t i = 1; i < curve.size(); ++i)
            CHECK(curve[i].rate <= curve[i - 1].rate + 1e-6);
        for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
            const double chord = 0.5 * (curve[i - 1].rate + curve[i + 1].rate);
            CHECK(curve[i].rate <= chord + 1e-6);
        }
    }
}

TEST_CASE("negative budgets are rejected") {
    const Dist src({0.5, 0.5});
    CHECK_THROWS_AS(rd_curve(src, hamming_distortion(2), 2, {-0.1}), SchemaError);
}

TEST_CASE("grid values below the floor clamp to the lossless rate") {
    const Dist src({0.25, 0.25, 0.25, 0.25});
    const auto curve = rd_curve(src, hamming_distortion(4), 4, {0.0, 0.2, 0.75});
    CHECK(curve[0].rate == doctest::Approx(std::log(4.0)).epsilon(1e-6));
    CHECK(curve[2].rate == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(curve[1].rate > 0.0);
    CHECK(curve[1].rate < curve[0].rate);
}
