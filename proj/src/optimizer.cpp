#include "twi/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twi::opt {

namespace {

constexpr double kTauTol = 1e-12;
constexpr int kMaxBracketGrowth = 200;
constexpr int kMaxBisectIters = 20'000;

double clipped_alpha(double cap) { return std::min(1.0, std::max(kAlphaFloor, cap)); }

void check_inputs(std::span<const PathSummary> summaries, const ReliabilityBudget& budget) {
    budget.validate();
    if (summaries.empty()) {
        throw std::invalid_argument("solver: need at least one path summary");
    }
    for (const PathSummary& s : summaries) {
        if (!(s.mu_ms >= 0.0) || !(s.sigma2_ms2 >= 0.0) ||
            !(s.drop_prob >= 0.0 && s.drop_prob < 1.0)) {
            throw std::invalid_argument("solver: invalid path summary");
        }
    }
}

double total_drop(std::span<const PathSummary> summaries) {
    double acc = 0.0;
    for (const PathSummary& s : summaries) acc += s.drop_prob;
    return acc;
}

std::vector<PathAllocation> allocations_at(double twi_ms,
                                           std::span<const PathSummary> summaries) {
    std::vector<PathAllocation> out;
    out.reserve(summaries.size());
    for (const PathSummary& s : summaries) {
        const double alpha = clipped_alpha(alpha_cap(twi_ms, s));
        out.push_back({alpha, 1.0 - (1.0 - s.drop_prob) * alpha});
    }
    return out;
}

}  // namespace

double cantelli_theta(double alpha) {
    if (!(alpha >= 0.0)) {
        throw std::domain_error("cantelli_theta: alpha must be >= 0");
    }
    if (alpha >= 1.0) {
        throw std::domain_error("cantelli_theta: alpha >= 1 gives an infinite margin");
    }
    return std::sqrt(alpha / (1.0 - alpha));
}

double alpha_cap(double twi_ms, const PathSummary& summary) {
    const double y = twi_ms - summary.mu_ms;
    if (!(y > 0.0)) return 0.0;
    if (summary.sigma2_ms2 == 0.0) return 1.0;
    return y * y / (y * y + summary.sigma2_ms2);
}

double feasibility_phi(double twi_ms, std::span<const PathSummary> summaries) {
    if (summaries.empty()) {
        throw std::invalid_argument("feasibility_phi: need at least one path summary");
    }
    double acc = 0.0;
    for (const PathSummary& s : summaries) {
        acc += (1.0 - s.drop_prob) * clipped_alpha(alpha_cap(twi_ms, s));
    }
    return acc;
}

TwiSolution solve_min_twi(std::span<const PathSummary> summaries, const ReliabilityBudget& budget,
                          double tol_ms) {
    check_inputs(summaries, budget);
    if (!(tol_ms > 0.0)) {
        throw std::invalid_argument("solve_min_twi: tol_ms must be > 0");
    }

    TwiSolution sol;
    sol.policy = Policy::Optimal;
    if (total_drop(summaries) > budget.epsilon) {
        return sol;  // infeasible: drops alone exhaust the budget
    }

    const double target = static_cast<double>(summaries.size()) - budget.epsilon;
    double lo = 0.0;
    for (const PathSummary& s : summaries) lo = std::max(lo, s.mu_ms);

    if (feasibility_phi(lo, summaries) >= target) {
        sol.twi_ms = lo;
        sol.per_path = allocations_at(lo, summaries);
        sol.feasible = true;
        return sol;
    }

    double hi = lo;
    for (const PathSummary& s : summaries) {
        hi = std::max(hi, s.mu_ms + 100.0 * s.sigma_ms());
    }
    if (hi <= lo) hi = lo + std::max(1.0, lo);
    int growth = 0;
    while (feasibility_phi(hi, summaries) < target) {
        if (++growth > kMaxBracketGrowth) {
            throw std::logic_error("solve_min_twi: feasibility map never reached the target");
        }
        hi *= 2.0;
    }

    int iters = 0;
    while (hi - lo > tol_ms) {
        if (++iters > kMaxBisectIters) {
            throw std::logic_error("solve_min_twi: bisection failed to converge");
        }
        const double mid = 0.5 * (lo + hi);
        if (feasibility_phi(mid, summaries) >= target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    sol.twi_ms = hi;
    sol.per_path = allocations_at(hi, summaries);
    sol.feasible = true;
    return sol;
}

TwiSolution solve_uniform_baseline(std::span<const PathSummary> summaries,
                                   const ReliabilityBudget& budget) {
    check_inputs(summaries, budget);

    TwiSolution sol;
    sol.policy = Policy::Uniform;
    if (total_drop(summaries) > budget.epsilon) {
        return sol;
    }

    // Water level tau with S(tau) = sum_k max(p_k, tau) = epsilon; S is
    // piecewise linear and strictly increasing on [min_k p_k, 1).
    const auto water_sum = [&](double tau) {
        double acc = 0.0;
        for (const PathSummary& s : summaries) acc += std::max(s.drop_prob, tau);
        return acc;
    };
    double lo = 1.0;
    for (const PathSummary& s : summaries) lo = std::min(lo, s.drop_prob);
    double hi = 1.0;
    while (hi - lo > kTauTol) {
        const double mid = 0.5 * (lo + hi);
        if (water_sum(mid) >= budget.epsilon) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const double tau = 0.5 * (lo + hi);

    double twi = 0.0;
    sol.per_path.reserve(summaries.size());
    for (const PathSummary& s : summaries) {
        const double eps_k = std::max(s.drop_prob, tau);
        const double alpha = std::min((1.0 - eps_k) / (1.0 - s.drop_prob), kAlphaClamp);
        twi = std::max(twi, s.mu_ms + s.sigma_ms() * cantelli_theta(alpha));
        sol.per_path.push_back({alpha, eps_k});
    }
    sol.twi_ms = twi;
    sol.feasible = true;
    return sol;
}

}  // namespace twi::opt
