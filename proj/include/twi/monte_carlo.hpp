#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "twi/path_model.hpp"
#include "twi/stage_distribution.hpp"
#include "twi/types.hpp"

namespace twi::mc {

// Substream RNG contract, version 1: stream s of master seed m is an
// mt19937_64 engine seeded with splitmix64 applied to m mixed with s. Any
// worker holding (m, s) reproduces the identical draw sequence, so trials can
// be scheduled on any number of threads without changing results.
inline constexpr int kRngContractVersion = 1;

std::uint64_t splitmix64(std::uint64_t x);

class SubstreamRng {
  public:
    SubstreamRng(std::uint64_t master_seed, std::uint64_t stream);

    double uniform01();                       // [0, 1)
    double uniform(double lo, double hi);     // [lo, hi)
    int uniform_int(int lo, int hi);          // {lo, ..., hi}
    std::uint64_t raw();

  private:
    std::mt19937_64 engine_;
};

// Stochastic stage descriptions for samplers and empirical validation.
struct TruncGeomStage {
    RetrySpec retry;
    FrameTime frame;
};
struct FirstStage {  // N1: propagation to the first sensor plus its computation
    PropagationSpec prop;
    ComputationSpec comp;
    FrameTime frame;
};
struct RelayHopStage {  // N2: grant-free hop plus the receiving node's computation
    RetrySpec hop;
    ComputationSpec comp;
    FrameTime frame;
};
struct PropagationStage {  // continuous propagation delay, no quantisation
    PropagationSpec prop;
};
struct ComputationStage {  // continuous uniform computation delay
    ComputationSpec comp;
};
using StageSpec =
    std::variant<TruncGeomStage, FirstStage, RelayHopStage, PropagationStage, ComputationStage>;

// One delay sample in ms from the stage's law (frame-quantised for the
// discrete kinds, exact for the continuous ones).
double sample_stage(const StageSpec& spec, SubstreamRng& rng);

// Frame-count sample for the discrete stage kinds; throws for continuous ones.
int sample_stage_frames(const StageSpec& spec, SubstreamRng& rng);

// Histogram estimate of a discrete stage's PMF from n_samples draws.
StageDistribution empirical_stage_pmf(const StageSpec& spec, std::size_t n_samples,
                                      std::uint64_t seed);

// End-to-end no-drop path delay sample (every stage drawn from its truncated,
// success-conditioned law).
double sample_path_delay(const PathSpec& path, SubstreamRng& rng);

// First-stage parameters tied to a sensing modality.
struct ModalityParams {
    double speed_m_per_ms = 3.0e5;
    double c_min_ms = 10.0;
    double c_max_ms = 200.0;
};

// Per-draw parameter ranges (defaults mirror the reference simulation setup).
// Optional pins fix a quantity across draws for single-parameter sweeps.
struct ParameterRanges {
    double rho_min = 0.05, rho_max = 0.15;  // grant-free hop failure
    int amax_min = 2, amax_max = 5;
    double zeta_min = 0.05, zeta_max = 0.10;  // SR detection failure
    int mmax_min = 2, mmax_max = 5;
    double epslink_min = 0.01, epslink_max = 0.10;  // PT failure
    int nmax_min = 3, nmax_max = 7;
    ComputationSpec hop_computation{0.0, 10.0};
    ModalityParams light{3.0e5, 10.0, 200.0};
    ModalityParams sound{0.3, 0.0, 10.0};
    double cell_radius_m = 100.0;

    std::optional<double> fixed_rho;
    std::optional<int> fixed_amax;
    std::optional<double> fixed_zeta;
    std::optional<int> fixed_mmax;
    std::optional<double> fixed_epslink;
    std::optional<int> fixed_nmax;

    void validate() const;
};

struct TopologySpec {
    int path_count = 1;
    int h_max = 1;                   // sensor count per path drawn from {0..h_max}
    bool at_most_one_direct = true;  // extra h=0 draws are resampled from {1..h_max}
    std::uint64_t seed = 0;
};

// K random causal paths: uniform sensor counts, per-path modality coin flip,
// and per-stage parameters drawn uniformly from the ranges.
std::vector<PathSpec> random_topology(const TopologySpec& topo, const ParameterRanges& ranges,
                                      const FrameTime& frame, SubstreamRng& rng);

// Convenience overload deriving the RNG from topo.seed (stream 0).
std::vector<PathSpec> random_topology(const TopologySpec& topo, const ParameterRanges& ranges,
                                      const FrameTime& frame);

}  // namespace twi::mc
