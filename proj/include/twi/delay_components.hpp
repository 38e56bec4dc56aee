#pragma once

#include "twi/stage_distribution.hpp"
#include "twi/types.hpp"

namespace twi::delay {

struct Moments {
    double mean_ms = 0.0;
    double variance_ms2 = 0.0;
};

// Frame-quantisation bin of a nonnegative delay: the half-open convention
// places a value lying exactly on a boundary k*tf into bin k. Ratios within
// 1e-9 relative of an integer are snapped onto it before the ceiling.
int frame_ceil(double value_ms, double tf_ms);

// PMF of the attempt count of a retry-limited stage, scaled to frame delays:
// P(delay = m*tf) = r^(m-1)(1-r) / (1-r^M), m = 1..M.
StageDistribution truncated_geometric_pmf(const RetrySpec& retry, const FrameTime& frame);

// Closed-form mean/variance of the same stage (finite geometric sums), kept
// as an algebraic route independent of the PMF summation.
Moments truncated_geometric_moments(const RetrySpec& retry, const FrameTime& frame);

// Mean/variance of the continuous event-propagation delay. Event-to-BS has
// closed forms (2D/3v, D^2/18v^2); event-to-sensor is integrated numerically.
Moments event_propagation_moments(const PropagationSpec& prop);

// Density of the event-to-sensor propagation delay at t (0 outside support).
double event_to_sensor_pdf(const PropagationSpec& prop, double t_ms);

// P(event-to-sensor propagation delay <= t).
double event_to_sensor_cdf(const PropagationSpec& prop, double t_ms);

// First-stage distribution: frame count of propagation-to-first-sensor plus
// its computation, N1 = ceil((T_prop + C1)/tf). Support spans
// [ceil(c_min/tf), ceil((2D/v + c_max)/tf)].
StageDistribution n1_pmf(const PropagationSpec& prop, const ComputationSpec& comp,
                         const FrameTime& frame);

// Relay-hop distribution: N2 = ceil(a + C/tf) with a truncated-geometric
// attempts and uniform computation. Support spans
// [ceil(1 + c_min/tf), ceil(a_max + c_max/tf)].
StageDistribution n2_pmf(const RetrySpec& hop, const ComputationSpec& comp,
                         const FrameTime& frame);

// SR detection failure probability from uplink SNR: 1 - (1+g)^(-1/g).
double sr_failure_from_snr(double gamma);

}  // namespace twi::delay
