#include "twi/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "twi/delay_components.hpp"

namespace twi::mc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

int truncated_geometric_sample(const RetrySpec& retry, SubstreamRng& rng) {
    const double r = retry.fail_prob;
    if (r == 0.0 || retry.max_attempts == 1) {
        rng.uniform01();  // stage always consumes one draw
        return 1;
    }
    const double u = rng.uniform01();
    const double scaled = u * -std::expm1(retry.max_attempts * std::log(r));
    const int m = 1 + static_cast<int>(std::floor(std::log1p(-scaled) / std::log(r)));
    return std::clamp(m, 1, retry.max_attempts);
}

double disk_point_distance(double radius_m, SubstreamRng& rng) {
    const double r1 = radius_m * std::sqrt(rng.uniform01());
    const double a1 = 2.0 * M_PI * rng.uniform01();
    const double r2 = radius_m * std::sqrt(rng.uniform01());
    const double a2 = 2.0 * M_PI * rng.uniform01();
    const double dx = r1 * std::cos(a1) - r2 * std::cos(a2);
    const double dy = r1 * std::sin(a1) - r2 * std::sin(a2);
    return std::hypot(dx, dy);
}

double propagation_sample(const PropagationSpec& prop, SubstreamRng& rng) {
    if (prop.kind == PropagationKind::EventToBs) {
        // Distance to the centre: density 2r/D^2, inverse CDF D*sqrt(u).
        return prop.cell_radius_m * std::sqrt(rng.uniform01()) / prop.speed_m_per_ms;
    }
    return disk_point_distance(prop.cell_radius_m, rng) / prop.speed_m_per_ms;
}

double computation_sample(const ComputationSpec& comp, SubstreamRng& rng) {
    return rng.uniform(comp.c_min_ms, comp.c_max_ms);
}

double frame_of(const TruncGeomStage& s) { return s.frame.tf_ms; }
double frame_of(const FirstStage& s) { return s.frame.tf_ms; }
double frame_of(const RelayHopStage& s) { return s.frame.tf_ms; }

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

SubstreamRng::SubstreamRng(std::uint64_t master_seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(master_seed) ^ (kGolden * (stream + 1)))) {}

double SubstreamRng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SubstreamRng::uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

int SubstreamRng::uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    // Fixed-point multiply keeps the draw sequence compiler-independent.
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(span);
    return lo + static_cast<int>(wide >> 64);
}

std::uint64_t SubstreamRng::raw() { return engine_(); }

double sample_stage(const StageSpec& spec, SubstreamRng& rng) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PropagationStage>) {
                s.prop.validate();
                return propagation_sample(s.prop, rng);
            } else if constexpr (std::is_same_v<T, ComputationStage>) {
                s.comp.validate();
                return computation_sample(s.comp, rng);
            } else {
                return sample_stage_frames(spec, rng) * frame_of(s);
            }
        },
        spec);
}

int sample_stage_frames(const StageSpec& spec, SubstreamRng& rng) {
    return std::visit(
        [&](const auto& s) -> int {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, TruncGeomStage>) {
                s.retry.validate();
                s.frame.validate();
                return truncated_geometric_sample(s.retry, rng);
            } else if constexpr (std::is_same_v<T, FirstStage>) {
                s.prop.validate();
                s.comp.validate();
                s.frame.validate();
                const double z =
                    propagation_sample(s.prop, rng) + computation_sample(s.comp, rng);
                return delay::frame_ceil(z, s.frame.tf_ms);
            } else if constexpr (std::is_same_v<T, RelayHopStage>) {
                s.hop.validate();
                s.comp.validate();
                s.frame.validate();
                const int attempts = truncated_geometric_sample(s.hop, rng);
                return attempts + delay::frame_ceil(computation_sample(s.comp, rng), s.frame.tf_ms);
            } else {
                throw std::invalid_argument("sample_stage_frames: stage is not frame-quantised");
            }
        },
        spec);
}

StageDistribution empirical_stage_pmf(const StageSpec& spec, std::size_t n_samples,
                                      std::uint64_t seed) {
    if (n_samples == 0) {
        throw std::invalid_argument("empirical_stage_pmf: need at least one sample");
    }
    const double tf = std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, TruncGeomStage> || std::is_same_v<T, FirstStage> ||
                          std::is_same_v<T, RelayHopStage>) {
                return s.frame.tf_ms;
            } else {
                throw std::invalid_argument("empirical_stage_pmf: stage is not frame-quantised");
            }
        },
        spec);

    SubstreamRng rng(seed, 0);
    std::map<int, std::size_t> counts;
    for (std::size_t i = 0; i < n_samples; ++i) {
        ++counts[sample_stage_frames(spec, rng)];
    }
    const int n_lo = counts.begin()->first;
    const int n_hi = counts.rbegin()->first;
    std::vector<double> masses(static_cast<std::size_t>(n_hi - n_lo + 1), 0.0);
    for (const auto& [n, c] : counts) {
        masses[static_cast<std::size_t>(n - n_lo)] =
            static_cast<double>(c) / static_cast<double>(n_samples);
    }
    return StageDistribution::from_masses(n_lo, std::move(masses), tf);
}

double sample_path_delay(const PathSpec& path, SubstreamRng& rng) {
    path.validate();
    if (path.hop_count == 0) {
        return propagation_sample(path.propagation, rng);
    }
    const double tf = path.frame.tf_ms;
    int frames = sample_stage_frames(FirstStage{path.propagation, path.first_computation, path.frame}, rng);
    for (const HopSpec& hop : path.hops) {
        frames += sample_stage_frames(RelayHopStage{hop.relay, hop.computation, path.frame}, rng);
    }
    frames += truncated_geometric_sample(path.sr, rng);
    frames += truncated_geometric_sample(path.pt, rng);
    return frames * tf;
}

void ParameterRanges::validate() const {
    const auto check_prob_range = [](double lo, double hi, const char* name) {
        if (!(lo >= 0.0 && lo <= hi && hi < 1.0)) {
            throw std::invalid_argument(std::string("ParameterRanges: bad range for ") + name);
        }
    };
    check_prob_range(rho_min, rho_max, "rho");
    check_prob_range(zeta_min, zeta_max, "zeta");
    check_prob_range(epslink_min, epslink_max, "eps_link");
    const auto check_int_range = [](int lo, int hi, const char* name) {
        if (!(lo >= 1 && lo <= hi)) {
            throw std::invalid_argument(std::string("ParameterRanges: bad range for ") + name);
        }
    };
    check_int_range(amax_min, amax_max, "a_max");
    check_int_range(mmax_min, mmax_max, "m_max");
    check_int_range(nmax_min, nmax_max, "n_max");
    hop_computation.validate();
    for (const ModalityParams* m : {&light, &sound}) {
        if (!(m->speed_m_per_ms > 0.0)) {
            throw std::invalid_argument("ParameterRanges: modality speed must be > 0");
        }
        ComputationSpec{m->c_min_ms, m->c_max_ms}.validate();
    }
    if (!(cell_radius_m > 0.0)) {
        throw std::invalid_argument("ParameterRanges: cell_radius_m must be > 0");
    }
    if (fixed_rho && !(*fixed_rho >= 0.0 && *fixed_rho < 1.0)) {
        throw std::invalid_argument("ParameterRanges: fixed_rho outside [0, 1)");
    }
    if (fixed_zeta && !(*fixed_zeta >= 0.0 && *fixed_zeta < 1.0)) {
        throw std::invalid_argument("ParameterRanges: fixed_zeta outside [0, 1)");
    }
    if (fixed_epslink && !(*fixed_epslink >= 0.0 && *fixed_epslink < 1.0)) {
        throw std::invalid_argument("ParameterRanges: fixed_epslink outside [0, 1)");
    }
    for (const std::optional<int>* f : {&fixed_amax, &fixed_mmax, &fixed_nmax}) {
        if (*f && **f < 1) {
            throw std::invalid_argument("ParameterRanges: fixed retry limit must be >= 1");
        }
    }
}

std::vector<PathSpec> random_topology(const TopologySpec& topo, const ParameterRanges& ranges,
                                      const FrameTime& frame, SubstreamRng& rng) {
    ranges.validate();
    frame.validate();
    if (topo.path_count < 1) {
        throw std::invalid_argument("random_topology: path_count must be >= 1");
    }
    if (topo.h_max < 0) {
        throw std::invalid_argument("random_topology: h_max must be >= 0");
    }
    if (topo.h_max == 0 && topo.at_most_one_direct && topo.path_count > 1) {
        throw std::invalid_argument(
            "random_topology: h_max = 0 forces every path direct; path_count must be 1");
    }

    // Sensor counts first, then per-path parameters, in a fixed draw order.
    std::vector<int> sensor_counts(static_cast<std::size_t>(topo.path_count));
    bool have_direct = false;
    for (int& h : sensor_counts) {
        h = rng.uniform_int(0, topo.h_max);
        if (h == 0) {
            if (have_direct && topo.at_most_one_direct) {
                h = rng.uniform_int(1, topo.h_max);
            } else {
                have_direct = true;
            }
        }
    }

    const auto draw_prob = [&](std::optional<double> pin, double lo, double hi) {
        return pin ? *pin : rng.uniform(lo, hi);
    };
    const auto draw_limit = [&](std::optional<int> pin, int lo, int hi) {
        return pin ? *pin : rng.uniform_int(lo, hi);
    };

    std::vector<PathSpec> paths;
    paths.reserve(sensor_counts.size());
    for (std::size_t k = 0; k < sensor_counts.size(); ++k) {
        const int h = sensor_counts[k];
        const ModalityParams& modality = (rng.uniform_int(0, 1) == 0) ? ranges.light : ranges.sound;

        PathSpec path;
        path.path_id = "path" + std::to_string(k + 1);
        path.hop_count = h;
        path.frame = frame;
        path.propagation = {ranges.cell_radius_m, modality.speed_m_per_ms,
                            h == 0 ? PropagationKind::EventToBs : PropagationKind::EventToSensor};
        if (h >= 1) {
            path.first_computation = {modality.c_min_ms, modality.c_max_ms};
            path.hops.reserve(static_cast<std::size_t>(h - 1));
            for (int i = 0; i < h - 1; ++i) {
                RetrySpec relay{draw_prob(ranges.fixed_rho, ranges.rho_min, ranges.rho_max),
                                draw_limit(ranges.fixed_amax, ranges.amax_min, ranges.amax_max)};
                path.hops.push_back({relay, ranges.hop_computation});
            }
            path.sr = {draw_prob(ranges.fixed_zeta, ranges.zeta_min, ranges.zeta_max),
                       draw_limit(ranges.fixed_mmax, ranges.mmax_min, ranges.mmax_max)};
            path.pt = {draw_prob(ranges.fixed_epslink, ranges.epslink_min, ranges.epslink_max),
                       draw_limit(ranges.fixed_nmax, ranges.nmax_min, ranges.nmax_max)};
        }
        path.validate();
        paths.push_back(std::move(path));
    }
    return paths;
}

std::vector<PathSpec> random_topology(const TopologySpec& topo, const ParameterRanges& ranges,
                                      const FrameTime& frame) {
    SubstreamRng rng(topo.seed, 0);
    return random_topology(topo, ranges, frame, rng);
}

}  // namespace twi::mc
