#include "twi/delay_components.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace twi::delay {

namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;

constexpr double kQuadTol = 1e-12;
constexpr unsigned kQuadDepth = 15;
constexpr std::size_t kMaxBins = 2'000'000;

double integrate(const auto& f, double a, double b) {
    if (!(b > a)) return 0.0;
    return Quad::integrate(f, a, b, kQuadDepth, kQuadTol);
}

// Raw truncated-geometric attempt masses P(a) for a = 1..M.
std::vector<double> attempt_masses(const RetrySpec& retry) {
    retry.validate();
    const double r = retry.fail_prob;
    const int m_cap = retry.max_attempts;
    std::vector<double> mass(static_cast<std::size_t>(m_cap), 0.0);
    if (r == 0.0) {
        mass[0] = 1.0;
        return mass;
    }
    const double norm = -std::expm1(m_cap * std::log(r));  // 1 - r^M
    double power = 1.0;                                    // r^(a-1)
    for (int a = 1; a <= m_cap; ++a) {
        mass[static_cast<std::size_t>(a - 1)] = power * (1.0 - r) / norm;
        power *= r;
    }
    return mass;
}

// Antiderivatives of the two-uniform-points disk distance law with x =
// distance / (2D). Differentiating the CDF form recovers the density
// (16x/pi)(acos x - x sqrt(1-x^2)), and the partial mean reaches
// (128/45pi) D at x = 1.
double disk_distance_cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double root = std::sqrt(1.0 - x * x);
    return (2.0 / M_PI) *
           (4.0 * x * x * std::acos(x) + std::asin(x) - x * (1.0 + 2.0 * x * x) * root);
}

// Integral of (distance/D) over [0, 2Dx], i.e. the partial first moment of the
// distance in units of D.
double disk_distance_partial_mean(double x) {
    if (x <= 0.0) return 0.0;
    x = std::min(x, 1.0);
    const double rsq = std::max(1.0 - x * x, 0.0);
    const double root = std::sqrt(rsq);
    return (32.0 / M_PI) *
           (x * x * x * std::acos(x) / 3.0 + 2.0 / 9.0 - (x * x + 2.0) * root / 9.0 +
            rsq * root / 3.0 - rsq * rsq * root / 5.0 - 2.0 / 15.0);
}

// Partial first moment of the propagation delay: integral of t f(t) over
// [0, t_ms].
double propagation_partial_mean(const PropagationSpec& prop, double t_ms) {
    const double scale = 2.0 * prop.cell_radius_m / prop.speed_m_per_ms;
    return disk_distance_partial_mean(t_ms / scale) * prop.cell_radius_m / prop.speed_m_per_ms;
}

// CDF of Z = T_prop + C at z for the event-to-sensor leg: the propagation
// density integrated against the uniform-computation CDF, evaluated through
// the exact antiderivatives above.
double first_stage_cdf(const PropagationSpec& prop, const ComputationSpec& comp, double z) {
    const double top = prop.max_delay_ms();
    if (z <= comp.c_min_ms) return 0.0;
    if (z >= top + comp.c_max_ms) return 1.0;

    if (comp.degenerate()) {
        return event_to_sensor_cdf(prop, z - comp.c_min_ms);
    }

    const double width = comp.width_ms();
    // Weight is 1 below z - c_max, then ramps down to 0 at z - c_min.
    const double flat_hi = std::clamp(z - comp.c_max_ms, 0.0, top);
    const double ramp_hi = std::clamp(z - comp.c_min_ms, 0.0, top);

    double acc = event_to_sensor_cdf(prop, flat_hi);
    if (ramp_hi > flat_hi) {
        const double prob =
            event_to_sensor_cdf(prop, ramp_hi) - event_to_sensor_cdf(prop, flat_hi);
        const double partial =
            propagation_partial_mean(prop, ramp_hi) - propagation_partial_mean(prop, flat_hi);
        acc += ((z - comp.c_min_ms) * prob - partial) / width;
    }
    return acc;
}

}  // namespace

int frame_ceil(double value_ms, double tf_ms) {
    if (!(tf_ms > 0.0)) {
        throw std::invalid_argument("frame_ceil: tf_ms must be > 0");
    }
    const double q = value_ms / tf_ms;
    const double nearest = std::round(q);
    if (std::abs(q - nearest) <= 1e-9 * std::max(1.0, std::abs(q))) {
        return static_cast<int>(nearest);
    }
    return static_cast<int>(std::ceil(q));
}

StageDistribution truncated_geometric_pmf(const RetrySpec& retry, const FrameTime& frame) {
    frame.validate();
    return StageDistribution::from_masses(1, attempt_masses(retry), frame.tf_ms);
}

Moments truncated_geometric_moments(const RetrySpec& retry, const FrameTime& frame) {
    retry.validate();
    frame.validate();
    const double r = retry.fail_prob;
    const double m_cap = retry.max_attempts;
    const double tf = frame.tf_ms;
    if (r == 0.0) {
        return {tf, 0.0};
    }
    // Finite geometric sums in cancellation-safe form:
    //   E[m]   = 1/(1-r) - M r^M / (1-r^M)
    //   E[m^2] = (1+r)/(1-r)^2 - M r^M (M(1-r)+2) / ((1-r)(1-r^M))
    const double log_r = std::log(r);
    const double r_pow_m = std::exp(m_cap * log_r);
    const double one_minus_r = 1.0 - r;
    const double one_minus_rm = -std::expm1(m_cap * log_r);
    const double mean_attempts = 1.0 / one_minus_r - m_cap * r_pow_m / one_minus_rm;
    const double second_moment =
        (1.0 + r) / (one_minus_r * one_minus_r) -
        m_cap * r_pow_m * (m_cap * one_minus_r + 2.0) / (one_minus_r * one_minus_rm);
    const double var_attempts = second_moment - mean_attempts * mean_attempts;
    return {tf * mean_attempts, tf * tf * std::max(var_attempts, 0.0)};
}

double event_to_sensor_pdf(const PropagationSpec& prop, double t_ms) {
    prop.validate();
    const double d = prop.cell_radius_m;
    const double v = prop.speed_m_per_ms;
    if (t_ms <= 0.0 || t_ms >= 2.0 * d / v) return 0.0;
    const double w = std::min(v * t_ms / (2.0 * d), 1.0);
    return 4.0 * v * v * t_ms / (M_PI * d * d) *
           (std::acos(w) - w * std::sqrt(std::max(0.0, 1.0 - w * w)));
}

double event_to_sensor_cdf(const PropagationSpec& prop, double t_ms) {
    prop.validate();
    const double top = 2.0 * prop.cell_radius_m / prop.speed_m_per_ms;
    if (t_ms <= 0.0) return 0.0;
    if (t_ms >= top) return 1.0;
    return disk_distance_cdf(t_ms / top);
}

Moments event_propagation_moments(const PropagationSpec& prop) {
    prop.validate();
    const double d = prop.cell_radius_m;
    const double v = prop.speed_m_per_ms;
    if (prop.kind == PropagationKind::EventToBs) {
        return {2.0 * d / (3.0 * v), d * d / (18.0 * v * v)};
    }
    const double top = 2.0 * d / v;
    const double mean =
        integrate([&](double t) { return t * event_to_sensor_pdf(prop, t); }, 0.0, top);
    const double second =
        integrate([&](double t) { return t * t * event_to_sensor_pdf(prop, t); }, 0.0, top);
    return {mean, std::max(second - mean * mean, 0.0)};
}

StageDistribution n1_pmf(const PropagationSpec& prop, const ComputationSpec& comp,
                         const FrameTime& frame) {
    prop.validate();
    comp.validate();
    frame.validate();
    if (prop.kind != PropagationKind::EventToSensor) {
        throw std::invalid_argument("n1_pmf: first-stage propagation must be event_to_sensor");
    }
    const double tf = frame.tf_ms;
    const int n_lo = frame_ceil(comp.c_min_ms, tf);
    const int n_hi = frame_ceil(prop.max_delay_ms() + comp.c_max_ms, tf);
    const std::size_t bins = static_cast<std::size_t>(n_hi - n_lo + 1);
    if (bins > kMaxBins) {
        throw std::invalid_argument("n1_pmf: support exceeds bin limit");
    }

    // Bin masses as CDF differences across frame edges; the telescoping keeps
    // the total mass pinned to the top-edge CDF value.
    std::vector<double> masses(bins, 0.0);
    double prev = first_stage_cdf(prop, comp, (static_cast<double>(n_lo) - 1.0) * tf);
    for (std::size_t i = 0; i < bins; ++i) {
        const double edge = (static_cast<double>(n_lo) + static_cast<double>(i)) * tf;
        const double cur = (i + 1 == bins) ? 1.0 : first_stage_cdf(prop, comp, edge);
        masses[i] = cur - prev;
        prev = cur;
    }
    return StageDistribution::from_masses(n_lo, std::move(masses), tf);
}

StageDistribution n2_pmf(const RetrySpec& hop, const ComputationSpec& comp,
                         const FrameTime& frame) {
    hop.validate();
    comp.validate();
    frame.validate();
    const double tf = frame.tf_ms;
    const int shift_lo = frame_ceil(comp.c_min_ms, tf);
    const int shift_hi = frame_ceil(comp.c_max_ms, tf);
    const int n_lo = 1 + shift_lo;
    const int n_hi = hop.max_attempts + shift_hi;
    const std::size_t bins = static_cast<std::size_t>(n_hi - n_lo + 1);
    if (bins > kMaxBins) {
        throw std::invalid_argument("n2_pmf: support exceeds bin limit");
    }

    std::vector<double> masses(bins, 0.0);
    const std::vector<double> p_attempt = attempt_masses(hop);
    for (int a = 1; a <= hop.max_attempts; ++a) {
        const double weight = p_attempt[static_cast<std::size_t>(a - 1)];
        if (comp.degenerate()) {
            // Point computation: the hop lands deterministically.
            const int n = a + shift_lo;
            masses[static_cast<std::size_t>(n - n_lo)] += weight;
            continue;
        }
        for (int n = a + shift_lo; n <= a + shift_hi; ++n) {
            const double upper = std::min(comp.c_max_ms, tf * static_cast<double>(n - a));
            const double lower = std::max(comp.c_min_ms, tf * static_cast<double>(n - 1 - a));
            const double overlap = std::max(upper - lower, 0.0);
            masses[static_cast<std::size_t>(n - n_lo)] += weight * overlap / comp.width_ms();
        }
    }
    return StageDistribution::from_masses(n_lo, std::move(masses), tf);
}

double sr_failure_from_snr(double gamma) {
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("sr_failure_from_snr: snr must be > 0");
    }
    return -std::expm1(-std::log1p(gamma) / gamma);
}

}  // namespace twi::delay
