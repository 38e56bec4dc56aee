#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twi/delay_components.hpp"
#include "twi/stage_distribution.hpp"
#include "twi/types.hpp"

namespace twi {

// One grant-free relay hop: forwarding retries plus the receiving node's
// processing before it transmits onward.
struct HopSpec {
    RetrySpec relay;
    ComputationSpec computation;
};

// Full parameter set of a causal path. hop_count == 0 denotes direct BS
// sensing; otherwise the path runs event -> sensor_1 -> ... -> sensor_h -> BS
// with hop_count-1 sensor-to-sensor hops and a final SR/PT uplink.
struct PathSpec {
    std::string path_id;
    int hop_count = 0;
    PropagationSpec propagation;
    ComputationSpec first_computation;  // C_1 at the first sensor (hop_count >= 1)
    std::vector<HopSpec> hops;          // length max(hop_count - 1, 0)
    RetrySpec sr;                       // used iff hop_count >= 1
    RetrySpec pt;                       // used iff hop_count >= 1
    FrameTime frame;

    void validate() const;
};

// Per-path quantities the optimizer consumes. The full PMF is present for
// relayed paths; the direct BS path stays continuous (no frame quantisation)
// and carries moments only.
struct PathSummary {
    double mu_ms = 0.0;
    double sigma2_ms2 = 0.0;
    double drop_prob = 0.0;
    std::optional<StageDistribution> pmf;

    double sigma_ms() const;
};

// Moments, drop probability, and (for relayed paths) the exact composed PMF
// of the end-to-end delay conditioned on no drop.
PathSummary summarize_path(const PathSpec& path);

// P(some stage exhausts its retry budget); 0 for the direct BS path.
double drop_probability(const PathSpec& path);

}  // namespace twi
