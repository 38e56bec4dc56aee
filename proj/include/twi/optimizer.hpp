#pragma once

#include <limits>
#include <span>
#include <vector>

#include "twi/path_model.hpp"

namespace twi::opt {

// Reliability floor keeping the Cantelli margin convex in the allocation.
inline constexpr double kAlphaFloor = 0.25;

// Baseline allocations with epsilon_k == p_k would demand alpha_k == 1 and an
// infinite margin; they are clamped here instead.
inline constexpr double kAlphaClamp = 1.0 - 1e-9;

// Global violation budget: the network must deliver every path within the
// window with probability at least 1 - epsilon.
struct ReliabilityBudget {
    double epsilon = 0.1;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 1.0)) {
            throw std::invalid_argument("ReliabilityBudget: epsilon must lie in (0, 1)");
        }
    }
};

enum class Policy { Optimal, Uniform };

struct PathAllocation {
    double alpha = 0.0;    // conditional timeliness target
    double epsilon = 0.0;  // per-path violation budget
};

struct TwiSolution {
    double twi_ms = std::numeric_limits<double>::quiet_NaN();
    std::vector<PathAllocation> per_path;
    Policy policy = Policy::Optimal;
    bool feasible = false;
};

// Cantelli margin multiplier sqrt(alpha / (1 - alpha)); strictly increasing
// and convex. Throws std::domain_error for alpha >= 1.
double cantelli_theta(double alpha);

// Largest alpha the Cantelli constraint admits at a given window:
// y^2 / (y^2 + sigma^2) with y = max(twi - mu, 0).
double alpha_cap(double twi_ms, const PathSummary& summary);

// Feasibility map Phi(twi) = sum_k (1 - p_k) * clip(alpha_cap_k, floor, 1).
// Nondecreasing in twi with limit K - sum_k p_k; the optimum is the smallest
// window with Phi >= K - epsilon.
double feasibility_phi(double twi_ms, std::span<const PathSummary> summaries);

// Minimal-window synthesis by bisection on the feasibility map. Returns an
// infeasible solution when sum_k p_k exceeds the budget. The result window is
// within tol_ms of the true optimum.
TwiSolution solve_min_twi(std::span<const PathSummary> summaries, const ReliabilityBudget& budget,
                          double tol_ms = 1e-3);

// Uniform-after-threshold baseline: raises every per-path budget to the
// common water level tau with sum_k max(p_k, tau) = epsilon, then takes the
// worst per-path Cantelli window.
TwiSolution solve_uniform_baseline(std::span<const PathSummary> summaries,
                                   const ReliabilityBudget& budget);

}  // namespace twi::opt
