#include "twi/path_model.hpp"

#include <cmath>
#include <stdexcept>

namespace twi {

void PathSpec::validate() const {
    if (hop_count < 0) {
        throw std::invalid_argument("PathSpec: hop_count must be >= 0");
    }
    frame.validate();
    propagation.validate();
    if (hop_count == 0) {
        if (propagation.kind != PropagationKind::EventToBs) {
            throw std::invalid_argument("PathSpec: direct path requires event_to_bs propagation");
        }
        if (!hops.empty()) {
            throw std::invalid_argument("PathSpec: direct path cannot carry relay hops");
        }
        return;
    }
    if (propagation.kind != PropagationKind::EventToSensor) {
        throw std::invalid_argument("PathSpec: relayed path requires event_to_sensor propagation");
    }
    if (static_cast<int>(hops.size()) != hop_count - 1) {
        throw std::invalid_argument("PathSpec: expected hop_count - 1 relay hops");
    }
    first_computation.validate();
    for (const HopSpec& hop : hops) {
        hop.relay.validate();
        hop.computation.validate();
    }
    sr.validate();
    pt.validate();
}

double PathSummary::sigma_ms() const { return std::sqrt(sigma2_ms2); }

PathSummary summarize_path(const PathSpec& path) {
    path.validate();

    PathSummary out;
    out.drop_prob = drop_probability(path);

    if (path.hop_count == 0) {
        const auto m = delay::event_propagation_moments(path.propagation);
        out.mu_ms = m.mean_ms;
        out.sigma2_ms2 = m.variance_ms2;
        return out;
    }

    StageDistribution total = delay::n1_pmf(path.propagation, path.first_computation, path.frame);
    double mu = total.mean_ms;
    double var = total.variance_ms2;
    for (const HopSpec& hop : path.hops) {
        const StageDistribution stage = delay::n2_pmf(hop.relay, hop.computation, path.frame);
        mu += stage.mean_ms;
        var += stage.variance_ms2;
        total = convolve(total, stage);
    }
    for (const RetrySpec* access : {&path.sr, &path.pt}) {
        const auto m = delay::truncated_geometric_moments(*access, path.frame);
        mu += m.mean_ms;
        var += m.variance_ms2;
        total = convolve(total, delay::truncated_geometric_pmf(*access, path.frame));
    }
    out.mu_ms = mu;
    out.sigma2_ms2 = var;
    out.pmf = std::move(total);
    return out;
}

namespace {

// P(stage succeeds within its retry budget) = 1 - r^M.
double stage_success(const RetrySpec& stage) {
    if (stage.fail_prob == 0.0) return 1.0;
    return -std::expm1(stage.max_attempts * std::log(stage.fail_prob));
}

}  // namespace

double drop_probability(const PathSpec& path) {
    path.validate();
    if (path.hop_count == 0) return 0.0;
    double success = 1.0;
    for (const HopSpec& hop : path.hops) {
        success *= stage_success(hop.relay);
    }
    success *= stage_success(path.sr);
    success *= stage_success(path.pt);
    return 1.0 - success;
}

}  // namespace twi
