#pragma once

#include <stdexcept>

namespace twi {

// Unit conventions used throughout: times in milliseconds, distances in
// meters, speeds in meters per millisecond.

struct FrameTime {
    double tf_ms = 10.0;

    void validate() const {
        if (!(tf_ms > 0.0)) {
            throw std::invalid_argument("FrameTime: tf_ms must be > 0");
        }
    }
};

enum class PropagationKind {
    EventToBs,      // event anywhere in the cell, receiver at the centre
    EventToSensor,  // event and sensor both uniform in the cell
};

// Geometry of the initial physical-signal leg from the event to the first
// receiving node (base station or sensor).
struct PropagationSpec {
    double cell_radius_m = 100.0;
    double speed_m_per_ms = 3.0e5;
    PropagationKind kind = PropagationKind::EventToSensor;

    // Upper end of the delay support: D/v to the centre, 2D/v across the cell.
    double max_delay_ms() const {
        const double reach =
            (kind == PropagationKind::EventToBs) ? cell_radius_m : 2.0 * cell_radius_m;
        return reach / speed_m_per_ms;
    }

    void validate() const {
        if (!(cell_radius_m > 0.0)) {
            throw std::invalid_argument("PropagationSpec: cell_radius_m must be > 0");
        }
        if (!(speed_m_per_ms > 0.0)) {
            throw std::invalid_argument("PropagationSpec: speed_m_per_ms must be > 0");
        }
    }
};

// Bounded uniform processing time at a node.
struct ComputationSpec {
    double c_min_ms = 0.0;
    double c_max_ms = 0.0;

    bool degenerate() const { return c_max_ms == c_min_ms; }
    double width_ms() const { return c_max_ms - c_min_ms; }
    double mean_ms() const { return 0.5 * (c_min_ms + c_max_ms); }

    void validate() const {
        if (!(c_min_ms >= 0.0 && c_max_ms >= c_min_ms)) {
            throw std::invalid_argument("ComputationSpec: require 0 <= c_min_ms <= c_max_ms");
        }
    }
};

// One retry-limited transmission stage: per-frame failure probability plus a
// hard attempt cap. Instantiated as (rho, A_max) for grant-free hops and as
// (zeta, M_max) / (eps, N_max) for the SR / PT phases of grant-based access.
struct RetrySpec {
    double fail_prob = 0.0;
    int max_attempts = 1;

    void validate() const {
        if (!(fail_prob >= 0.0 && fail_prob < 1.0)) {
            throw std::invalid_argument("RetrySpec: fail_prob must lie in [0, 1)");
        }
        if (max_attempts < 1) {
            throw std::invalid_argument("RetrySpec: max_attempts must be >= 1");
        }
    }
};

}  // namespace twi
