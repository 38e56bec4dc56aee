#pragma once

#include <utility>
#include <vector>

#include "twi/types.hpp"

namespace twi {

// Finite PMF over consecutive frame indices n (delay value = n * frame_ms),
// carrying its exact first two moments in millisecond units.
//
// Invariants enforced at construction:
//   - all masses >= 0 and summing to 1 (renormalised after an absolute
//     1e-6 sanity check on the raw sum),
//   - mean_ms / variance_ms2 equal the values implied by the stored masses.
struct StageDistribution {
    int n_min = 0;
    std::vector<double> masses;  // masses[i] = P(N = n_min + i)
    double frame_ms = 1.0;
    double mean_ms = 0.0;
    double variance_ms2 = 0.0;

    // Builds a distribution from raw per-bin masses. Throws if the masses are
    // negative beyond rounding noise or fail the total-mass sanity check.
    static StageDistribution from_masses(int n_min, std::vector<double> masses, double frame_ms);

    static StageDistribution point_mass(int n, double frame_ms);

    int n_max() const { return n_min + static_cast<int>(masses.size()) - 1; }
    double mass_at(int n) const;

    // P(N <= n).
    double cdf_at(int n) const;

    // (mean_ms, variance_ms2) recomputed from the stored masses.
    std::pair<double, double> moments_from_masses() const;
};

// Distribution of the sum of two independent stages on the same frame grid.
StageDistribution convolve(const StageDistribution& a, const StageDistribution& b);

// 0.5 * sum |p_n - q_n| over the union of supports.
double total_variation(const StageDistribution& a, const StageDistribution& b);

}  // namespace twi
