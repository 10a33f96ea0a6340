#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "robust_choice/extended.hpp"

namespace robust_choice {

/**
 * Euclidean projection of v onto the probability simplex
 * { x : x_i >= 0, sum x_i = 1 }, via the sort-and-threshold rule.
 */
inline std::vector<double> project_onto_simplex(std::vector<double> v) {
    const std::size_t n = v.size();
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0;
    double theta = 0.0;
    std::size_t active = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cumulative += u[i];
        const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (u[i] - candidate > 0.0) {
            theta = candidate;
            active = i + 1;
        }
    }
    (void)active;
    for (double& x : v) x = std::max(x - theta, 0.0);
    // kill the tiny drift the subtraction leaves behind
    double sum = std::accumulate(v.begin(), v.end(), 0.0);
    if (sum > 0.0)
        for (double& x : v) x /= sum;
    return v;
}

struct SimplexMinimizeOptions {
    double tolerance = 1e-9;
    int max_iterations = 10000;
};

struct SimplexMinimizeResult {
    std::vector<double> point;
    double value = kInfinity;
    int iterations = 0;
    bool converged = false;
};

/**
 * Projected-gradient descent of a convex objective over the probability
 * simplex. The gradient callback receives a feasible point; the objective
 * may return +inf outside its effective domain (the Armijo line search
 * rejects such steps).
 */
inline SimplexMinimizeResult minimize_on_simplex(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::function<std::vector<double>(const std::vector<double>&)>& gradient,
    std::size_t dimension, const SimplexMinimizeOptions& options = {}) {
    SimplexMinimizeResult result;
    std::vector<double> x(dimension, 1.0 / static_cast<double>(dimension));
    double fx = objective(x);

    double step = 1.0;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter + 1;
        if (!std::isfinite(fx)) break; // objective infinite at the centroid: nothing to do

        const std::vector<double> g = gradient(x);
        double gnorm2 = 0.0;
        for (double gi : g) gnorm2 += gi * gi;

        bool moved = false;
        double trial_step = std::min(step * 2.0, 1e6);
        for (int shrink = 0; shrink < 60; ++shrink) {
            std::vector<double> candidate(dimension);
            for (std::size_t i = 0; i < dimension; ++i)
                candidate[i] = x[i] - trial_step * g[i];
            candidate = project_onto_simplex(std::move(candidate));

            double decrease_model = 0.0; // <g, x - candidate>
            double move = 0.0;
            for (std::size_t i = 0; i < dimension; ++i) {
                decrease_model += g[i] * (x[i] - candidate[i]);
                move = std::max(move, std::abs(x[i] - candidate[i]));
            }
            if (move <= options.tolerance) {
                // projected step is a no-op: stationary
                result.converged = true;
                break;
            }
            const double fc = objective(candidate);
            if (std::isfinite(fc) && fc <= fx - 1e-4 * decrease_model) {
                x = std::move(candidate);
                fx = fc;
                step = trial_step;
                moved = true;
                break;
            }
            trial_step *= 0.5;
        }
        if (result.converged || !moved) {
            result.converged = result.converged || gnorm2 == 0.0 || !moved;
            break;
        }
    }
    result.point = std::move(x);
    result.value = fx;
    return result;
}

} // namespace robust_choice
