#include <doctest.h>

#include <cmath>
#include <map>

#include "twi/delay_components.hpp"
#include "twi/monte_carlo.hpp"

using namespace twi;
using namespace twi::mc;

namespace {

bool same_retry(const RetrySpec& a, const RetrySpec& b) {
    return a.fail_prob == b.fail_prob && a.max_attempts == b.max_attempts;
}

bool same_path(const PathSpec& a, const PathSpec& b) {
    if (a.hop_count != b.hop_count || a.hops.size() != b.hops.size()) return false;
    if (a.propagation.speed_m_per_ms != b.propagation.speed_m_per_ms) return false;
    if (a.propagation.cell_radius_m != b.propagation.cell_radius_m) return false;
    if (a.first_computation.c_min_ms != b.first_computation.c_min_ms) return false;
    if (a.first_computation.c_max_ms != b.first_computation.c_max_ms) return false;
    for (std::size_t i = 0; i < a.hops.size(); ++i) {
        if (!same_retry(a.hops[i].relay, b.hops[i].relay)) return false;
    }
    return same_retry(a.sr, b.sr) && same_retry(a.pt, b.pt);
}

}  // namespace

TEST_CASE("substreams are deterministic and distinct") {
    SubstreamRng a(42, 7);
    SubstreamRng b(42, 7);
    SubstreamRng c(42, 8);
    bool streams_differ = false;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t x = a.raw();
        CHECK(x == b.raw());
        streams_differ |= (x != c.raw());
    }
    CHECK(streams_differ);
}

TEST_CASE("trivial stage laws sample exactly") {
    SubstreamRng rng(1, 0);
    const TruncGeomStage certain{{0.0, 5}, {10.0}};
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_stage(certain, rng) == 10.0);
    }
    const ComputationStage pinned{{7.5, 7.5}};
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_stage(pinned, rng) == 7.5);
    }
}

TEST_CASE("point-mass stage gives an exactly matching empirical pmf") {
    const RelayHopStage stage{{0.0, 3}, {15.0, 15.0}, {10.0}};
    const auto empirical = empirical_stage_pmf(stage, 10'000, 5);
    const auto analytic = delay::n2_pmf({0.0, 3}, {15.0, 15.0}, {10.0});
    CHECK(total_variation(empirical, analytic) == 0.0);
}

TEST_CASE("event-to-sensor distance sampler matches the integration oracle") {
    const PropagationSpec prop{100.0, 1.0, PropagationKind::EventToSensor};
    const auto expected = delay::event_propagation_moments(prop);
    SubstreamRng rng(2024, 0);
    const std::size_t n = 200'000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = sample_stage(PropagationStage{prop}, rng);
        sum += t;
        sum_sq += t * t;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    const double se_mean = std::sqrt(var / n);
    CHECK(std::abs(mean - expected.mean_ms) <= 4.0 * se_mean);
    // 0.9054*D scaling of the distance mean, with v = 1 m/ms.
    CHECK(mean == doctest::Approx(0.9054 * 100.0).epsilon(0.01));
}

TEST_CASE("truncated geometric and n2 samplers agree with the analytic pmfs") {
    const TruncGeomStage geom{{0.65, 8}, {10.0}};
    const auto geom_emp = empirical_stage_pmf(geom, 200'000, 11);
    CHECK(total_variation(geom_emp, delay::truncated_geometric_pmf({0.65, 8}, {10.0})) < 0.01);

    const RelayHopStage hop{{0.4, 6}, {0.0, 10.0}, {10.0}};
    const auto hop_emp = empirical_stage_pmf(hop, 200'000, 12);
    CHECK(total_variation(hop_emp, delay::n2_pmf({0.4, 6}, {0.0, 10.0}, {10.0})) < 0.01);
}

TEST_CASE("n1 sampler agrees with the quadrature pmf") {
    const PropagationSpec prop{100.0, 0.3, PropagationKind::EventToSensor};
    const FirstStage stage{prop, {0.0, 10.0}, {10.0}};
    const auto empirical = empirical_stage_pmf(stage, 200'000, 13);
    const auto analytic = delay::n1_pmf(prop, {0.0, 10.0}, {10.0});
    CHECK(total_variation(empirical, analytic) < 0.012);
    CHECK(empirical.mean_ms == doctest::Approx(analytic.mean_ms).epsilon(0.005));
}

TEST_CASE("path sampler matches the composed conditional pmf") {
    PathSpec path;
    path.hop_count = 2;
    path.propagation = {100.0, 0.3, PropagationKind::EventToSensor};
    path.first_computation = {0.0, 10.0};
    path.hops.push_back({{0.1, 4}, {0.0, 10.0}});
    path.sr = {0.08, 3};
    path.pt = {0.05, 5};
    path.frame = {10.0};

    const auto summary = summarize_path(path);
    REQUIRE(summary.pmf.has_value());

    SubstreamRng rng(77, 0);
    std::map<int, std::size_t> counts;
    const std::size_t n = 200'000;
    for (std::size_t i = 0; i < n; ++i) {
        ++counts[static_cast<int>(std::llround(sample_path_delay(path, rng) / 10.0))];
    }
    std::vector<double> masses(
        static_cast<std::size_t>(counts.rbegin()->first - counts.begin()->first + 1), 0.0);
    for (const auto& [frames, c] : counts) {
        masses[static_cast<std::size_t>(frames - counts.begin()->first)] =
            static_cast<double>(c) / static_cast<double>(n);
    }
    const auto empirical =
        StageDistribution::from_masses(counts.begin()->first, std::move(masses), 10.0);
    CHECK(total_variation(empirical, *summary.pmf) < 0.012);
}

TEST_CASE("random topology is reproducible and respects the direct-path cap") {
    TopologySpec topo;
    topo.path_count = 5;
    topo.h_max = 1;
    topo.seed = 31337;
    const ParameterRanges ranges;
    const FrameTime frame{10.0};

    const auto first = random_topology(topo, ranges, frame);
    const auto second = random_topology(topo, ranges, frame);
    REQUIRE(first.size() == 5);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(same_path(first[i], second[i]));
    }

    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        TopologySpec t = topo;
        t.seed = seed;
        const auto paths = random_topology(t, ranges, frame);
        int direct = 0;
        for (const auto& p : paths) {
            direct += (p.hop_count == 0);
            if (p.hop_count >= 1) {
                CHECK(p.sr.fail_prob >= ranges.zeta_min);
                CHECK(p.sr.fail_prob <= ranges.zeta_max);
                CHECK(p.pt.fail_prob >= ranges.epslink_min);
                CHECK(p.pt.fail_prob <= ranges.epslink_max);
                CHECK(p.sr.max_attempts >= ranges.mmax_min);
                CHECK(p.sr.max_attempts <= ranges.mmax_max);
            }
        }
        CHECK(direct <= 1);
    }
}

TEST_CASE("sensor-count draws are uniform over {0..h_max}") {
    TopologySpec topo;
    topo.path_count = 1;  // single path per draw: no resampling interference
    topo.h_max = 4;
    const ParameterRanges ranges;
    const FrameTime frame{10.0};
    std::map<int, int> counts;
    const int n = 10'000;
    SubstreamRng rng(5150, 0);
    for (int i = 0; i < n; ++i) {
        ++counts[random_topology(topo, ranges, frame, rng)[0].hop_count];
    }
    const double se = std::sqrt(0.2 * 0.8 / n);
    for (int h = 0; h <= 4; ++h) {
        const double freq = static_cast<double>(counts[h]) / n;
        CHECK(std::abs(freq - 0.2) <= 3.0 * se);
    }
}

TEST_CASE("degenerate topologies") {
    const ParameterRanges ranges;
    const FrameTime frame{10.0};
    TopologySpec solo;
    solo.path_count = 1;
    solo.h_max = 0;
    const auto paths = random_topology(solo, ranges, frame);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].hop_count == 0);

    TopologySpec impossible;
    impossible.path_count = 2;
    impossible.h_max = 0;
    CHECK_THROWS_AS(random_topology(impossible, ranges, frame), std::invalid_argument);
}

TEST_CASE("pinned ranges override the draws") {
    ParameterRanges ranges;
    ranges.fixed_rho = 0.4;
    ranges.fixed_amax = 10;
    TopologySpec topo;
    topo.path_count = 3;
    topo.h_max = 4;
    topo.seed = 9;
    const auto paths = random_topology(topo, ranges, {10.0});
    for (const auto& p : paths) {
        for (const auto& hop : p.hops) {
            CHECK(hop.relay.fail_prob == 0.4);
            CHECK(hop.relay.max_attempts == 10);
        }
    }
}
