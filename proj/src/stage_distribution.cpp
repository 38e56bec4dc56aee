#include "twi/stage_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace twi {

namespace {

// Compensated summation; bin counts can reach a few thousand and the
// normalisation invariant is 1e-12.
double kahan_sum(const std::vector<double>& v) {
    double sum = 0.0;
    double carry = 0.0;
    for (double x : v) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

StageDistribution StageDistribution::from_masses(int n_min, std::vector<double> masses,
                                                 double frame_ms) {
    if (!(frame_ms > 0.0)) {
        throw std::invalid_argument("StageDistribution: frame_ms must be > 0");
    }
    if (masses.empty()) {
        throw std::invalid_argument("StageDistribution: empty support");
    }
    for (double& m : masses) {
        if (m < 0.0) {
            if (m < -1e-9) {
                throw std::invalid_argument("StageDistribution: negative mass");
            }
            m = 0.0;  // quadrature rounding noise
        }
    }
    const double total = kahan_sum(masses);
    if (std::abs(total - 1.0) > 1e-6) {
        throw std::invalid_argument("StageDistribution: masses sum to " + std::to_string(total));
    }
    for (double& m : masses) {
        m /= total;
    }

    StageDistribution d;
    d.n_min = n_min;
    d.masses = std::move(masses);
    d.frame_ms = frame_ms;
    const auto [mean, var] = d.moments_from_masses();
    d.mean_ms = mean;
    d.variance_ms2 = var;
    return d;
}

StageDistribution StageDistribution::point_mass(int n, double frame_ms) {
    return from_masses(n, {1.0}, frame_ms);
}

double StageDistribution::mass_at(int n) const {
    if (n < n_min || n > n_max()) return 0.0;
    return masses[static_cast<std::size_t>(n - n_min)];
}

double StageDistribution::cdf_at(int n) const {
    if (n < n_min) return 0.0;
    const int hi = std::min(n, n_max());
    double acc = 0.0;
    for (int k = n_min; k <= hi; ++k) {
        acc += masses[static_cast<std::size_t>(k - n_min)];
    }
    return std::min(acc, 1.0);
}

std::pair<double, double> StageDistribution::moments_from_masses() const {
    double mean_frames = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        mean_frames += (n_min + static_cast<double>(i)) * masses[i];
    }
    double var_frames = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        const double d = (n_min + static_cast<double>(i)) - mean_frames;
        var_frames += d * d * masses[i];
    }
    return {mean_frames * frame_ms, var_frames * frame_ms * frame_ms};
}

StageDistribution convolve(const StageDistribution& a, const StageDistribution& b) {
    if (std::abs(a.frame_ms - b.frame_ms) > 1e-12 * std::max(a.frame_ms, b.frame_ms)) {
        throw std::invalid_argument("convolve: mismatched frame durations");
    }
    std::vector<double> out(a.masses.size() + b.masses.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.masses.size(); ++i) {
        if (a.masses[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.masses.size(); ++j) {
            out[i + j] += a.masses[i] * b.masses[j];
        }
    }
    return StageDistribution::from_masses(a.n_min + b.n_min, std::move(out), a.frame_ms);
}

double total_variation(const StageDistribution& a, const StageDistribution& b) {
    const int lo = std::min(a.n_min, b.n_min);
    const int hi = std::max(a.n_max(), b.n_max());
    double acc = 0.0;
    for (int n = lo; n <= hi; ++n) {
        acc += std::abs(a.mass_at(n) - b.mass_at(n));
    }
    return 0.5 * acc;
}

}  // namespace twi
