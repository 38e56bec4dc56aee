#include <doctest.h>

#include <random>

#include "twi/stage_distribution.hpp"

using twi::StageDistribution;

TEST_CASE("from_masses validates and normalises") {
    const auto d = StageDistribution::from_masses(2, {0.25, 0.5, 0.25}, 10.0);
    CHECK(d.n_min == 2);
    CHECK(d.n_max() == 4);
    CHECK(d.mass_at(1) == 0.0);
    CHECK(d.mass_at(3) == doctest::Approx(0.5));
    CHECK(d.mean_ms == doctest::Approx(30.0));
    CHECK(d.variance_ms2 == doctest::Approx(50.0));  // Var(n)=0.5 frames^2

    CHECK_THROWS_AS(StageDistribution::from_masses(0, {}, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(StageDistribution::from_masses(0, {0.5, 0.4}, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(StageDistribution::from_masses(0, {1.5, -0.5}, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(StageDistribution::from_masses(0, {1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("cdf is a valid distribution function") {
    const auto d = StageDistribution::from_masses(1, {0.2, 0.3, 0.5}, 5.0);
    CHECK(d.cdf_at(0) == 0.0);
    CHECK(d.cdf_at(1) == doctest::Approx(0.2));
    CHECK(d.cdf_at(2) == doctest::Approx(0.5));
    CHECK(d.cdf_at(3) == doctest::Approx(1.0));
    CHECK(d.cdf_at(99) == doctest::Approx(1.0));
}

TEST_CASE("convolution adds supports and means") {
    const auto a = StageDistribution::from_masses(1, {0.5, 0.5}, 10.0);
    const auto b = StageDistribution::from_masses(2, {0.25, 0.75}, 10.0);
    const auto c = twi::convolve(a, b);
    CHECK(c.n_min == 3);
    CHECK(c.n_max() == 5);
    CHECK(c.mean_ms == doctest::Approx(a.mean_ms + b.mean_ms));
    CHECK(c.variance_ms2 == doctest::Approx(a.variance_ms2 + b.variance_ms2));

    CHECK_THROWS_AS(twi::convolve(a, StageDistribution::from_masses(0, {1.0}, 7.0)),
                    std::invalid_argument);
}

TEST_CASE("convolution is associative over random distributions") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto random_dist = [&](int n_min, int len) {
            std::vector<double> m(static_cast<std::size_t>(len));
            double total = 0.0;
            for (double& x : m) total += (x = unif(gen) + 1e-3);
            for (double& x : m) x /= total;
            return StageDistribution::from_masses(n_min, std::move(m), 10.0);
        };
        const auto a = random_dist(0, 4);
        const auto b = random_dist(1, 6);
        const auto c = random_dist(2, 3);
        const auto left = twi::convolve(twi::convolve(a, b), c);
        const auto right = twi::convolve(a, twi::convolve(b, c));
        CHECK(twi::total_variation(left, right) < 1e-12);
    }
}

TEST_CASE("total variation compares aligned and disjoint supports") {
    const auto a = StageDistribution::from_masses(1, {1.0}, 10.0);
    const auto b = StageDistribution::from_masses(5, {1.0}, 10.0);
    CHECK(twi::total_variation(a, a) == 0.0);
    CHECK(twi::total_variation(a, b) == doctest::Approx(1.0));
}
