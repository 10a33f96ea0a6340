#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "robust_choice/divergences.hpp"
#include "robust_choice/errors.hpp"
#include "robust_choice/extended.hpp"
#include "robust_choice/model_space.hpp"
#include "robust_choice/parallel.hpp"
#include "robust_choice/simplex.hpp"

namespace robust_choice {

enum class EvalMethod { entropic_closed_form, gini_closed_form, generic_dual, primal_grid, maxmin };

inline const char* to_string(EvalMethod m) {
    switch (m) {
    case EvalMethod::entropic_closed_form: return "entropic_closed_form";
    case EvalMethod::gini_closed_form: return "gini_closed_form";
    case EvalMethod::generic_dual: return "generic_dual";
    case EvalMethod::primal_grid: return "primal_grid";
    case EvalMethod::maxmin: return "maxmin";
    }
    return "unknown";
}

/**
 * Outcome of a robust evaluation. binding_model_index is the listed
 * structured model achieving the outer minimum (lowest index on ties);
 * it is absent when convex-hull evaluation finds a strictly better
 * interior mixture, in which case binding_model carries the mixture.
 * worst_case_model is the inner minimizer p* when it can be recovered.
 */
struct EvaluationResult {
    double value = 0.0;
    std::optional<std::size_t> binding_model_index;
    std::optional<Model> binding_model;
    std::optional<Model> worst_case_model;
    EvalMethod method = EvalMethod::maxmin;
};

namespace detail {

inline double expected_value(const std::vector<double>& utils, const std::vector<double>& q) {
    return std::inner_product(utils.begin(), utils.end(), q.begin(), 0.0);
}

/// -lambda * log E_q[exp(-u/lambda)], evaluated with a max shift so small
/// lambdas do not overflow. Also returns the exponential tilt p*.
struct EntropicSolution {
    double value;
    std::vector<double> worst_case;
};

inline EntropicSolution entropic_closed_form(const std::vector<double>& utils,
                                             const std::vector<double>& q, double lambda) {
    double shift = -kInfinity;
    for (std::size_t s = 0; s < utils.size(); ++s)
        if (q[s] > 0.0) shift = std::max(shift, -utils[s] / lambda);
    double z = 0.0;
    std::vector<double> tilt(utils.size(), 0.0);
    for (std::size_t s = 0; s < utils.size(); ++s) {
        if (q[s] <= 0.0) continue;
        tilt[s] = q[s] * std::exp(-utils[s] / lambda - shift);
        z += tilt[s];
    }
    for (double& t : tilt) t /= z;
    return {-lambda * (shift + std::log(z)), std::move(tilt)};
}

/// Exact inner minimizer for the Gini penalty: p*_s = q_s (1 + eta - u_s/lambda)^+
/// with eta chosen by an active-set sweep so that p* sums to one.
struct GiniSolution {
    double value;
    double eta;
    std::vector<double> worst_case;
    bool clamped; // some support state was pushed to zero probability
};

inline GiniSolution gini_closed_form(const std::vector<double>& utils,
                                     const std::vector<double>& q, double lambda) {
    std::vector<std::size_t> support;
    for (std::size_t s = 0; s < q.size(); ++s)
        if (q[s] > 0.0) support.push_back(s);
    std::sort(support.begin(), support.end(),
              [&](std::size_t a, std::size_t b) { return utils[a] < utils[b]; });

    double eta = 0.0;
    double mass = 0.0, mean = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) {
        mass += q[support[k]];
        mean += q[support[k]] * utils[support[k]];
        eta = (1.0 + mean / lambda) / mass - 1.0;
        const bool last = k + 1 == support.size();
        if (last || eta <= utils[support[k + 1]] / lambda - 1.0 + 1e-12) break;
    }

    GiniSolution solution;
    solution.eta = eta;
    solution.clamped = false;
    solution.worst_case.assign(q.size(), 0.0);
    for (std::size_t s : support) {
        const double raw = 1.0 + eta - utils[s] / lambda;
        if (raw <= 0.0) solution.clamped = true;
        solution.worst_case[s] = q[s] * std::max(raw, 0.0);
    }
    double value = 0.0;
    for (std::size_t s : support) {
        const double p = solution.worst_case[s];
        value += p * utils[s] + lambda * q[s] * PhiFunction::gini().phi(p / q[s]);
    }
    solution.value = value;
    return solution;
}

/// Dual objective g(eta) = eta - E_q[ phi*(eta - u/lambda) ].
inline double dual_objective(double eta, const std::vector<double>& utils,
                             const std::vector<double>& q, double lambda,
                             const PhiFunction& phi) {
    double penalty = 0.0;
    for (std::size_t s = 0; s < utils.size(); ++s)
        if (q[s] > 0.0) penalty += q[s] * phi.conjugate(eta - utils[s] / lambda);
    return eta - penalty;
}

struct DualSolution {
    double eta;
    double g_value;
};

/**
 * Maximizes the concave dual objective in one dimension: a doubling
 * expansion of the initial bracket until the maximum is interior, then
 * golden-section. The best evaluated point is returned, so the reported
 * value never exceeds the true supremum.
 */
inline DualSolution maximize_dual(const std::function<double(double)>& g, double lo,
                                  double hi) {
    double best_eta = lo;
    double best_val = -kInfinity;
    auto eval = [&](double eta) {
        const double v = g(eta);
        if (v > best_val) {
            best_val = v;
            best_eta = eta;
        }
        return v;
    };

    double g_lo = eval(lo);
    double g_hi = eval(hi);
    const auto probe_step = [&] { return std::max(1e-9, 1e-6 * (hi - lo)); };

    int doublings = 0;
    while (eval(lo + probe_step()) <= g_lo) {
        if (++doublings > 60)
            throw ConvergenceError("dual bracket expansion failed on the left");
        lo -= (hi - lo);
        g_lo = eval(lo);
    }
    doublings = 0;
    while (eval(hi - probe_step()) <= g_hi) {
        if (++doublings > 60)
            throw ConvergenceError("dual bracket expansion failed on the right");
        hi += (hi - lo);
        g_hi = eval(hi);
    }

    constexpr double inv_golden = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_golden * (b - a);
    double x2 = a + inv_golden * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int iter = 0; iter < 500 && (b - a) > 1e-12; ++iter) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_golden * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_golden * (b - a);
            f1 = eval(x1);
        }
    }
    return {best_eta, best_val};
}

/// Generic Fenchel-dual evaluation of the multiplier value on raw weights.
struct DualEvaluation {
    double value;
    double eta;
    std::optional<std::vector<double>> worst_case;
};

inline DualEvaluation multiplier_dual_weights(const std::vector<double>& utils,
                                              const std::vector<double>& q, double lambda,
                                              const PhiFunction& phi) {
    double u_min = kInfinity, u_max = -kInfinity;
    for (std::size_t s = 0; s < utils.size(); ++s) {
        if (q[s] <= 0.0) continue;
        u_min = std::min(u_min, utils[s]);
        u_max = std::max(u_max, utils[s]);
    }
    auto g = [&](double eta) { return dual_objective(eta, utils, q, lambda, phi); };
    const auto dual = maximize_dual(g, u_min / lambda - 1.0, u_max / lambda + 1.0);

    DualEvaluation eval;
    eval.value = lambda * dual.g_value;
    eval.eta = dual.eta;
    if (phi.has_conjugate_derivative()) {
        std::vector<double> p(utils.size(), 0.0);
        double sum = 0.0;
        for (std::size_t s = 0; s < utils.size(); ++s) {
            if (q[s] <= 0.0) continue;
            p[s] = q[s] * phi.conjugate_derivative(dual.eta - utils[s] / lambda);
            sum += p[s];
        }
        // a kinked conjugate can leave the recovered vector off the simplex;
        // in that case the minimizer is reported absent, the value stands
        if (std::abs(sum - 1.0) <= 1e-6 && sum > 0.0) {
            for (double& x : p) x /= sum;
            eval.worst_case = std::move(p);
        }
    }
    return eval;
}

/// Multiplier value together with its gradient in the reference weights,
/// for the outer hull optimization. The gradient uses the envelope
/// theorem: dV/dq_s = -lambda phi*(eta* - u_s/lambda).
inline std::pair<double, std::vector<double>> multiplier_value_and_q_gradient(
    const std::vector<double>& utils, const std::vector<double>& q,
    const DivergenceSpec& spec) {
    const double lambda = spec.lambda();
    if (spec.kind() == DivergenceKind::relative_entropy) {
        double shift = -kInfinity;
        for (std::size_t s = 0; s < utils.size(); ++s)
            shift = std::max(shift, -utils[s] / lambda);
        std::vector<double> w(utils.size());
        double z = 0.0;
        for (std::size_t s = 0; s < utils.size(); ++s) {
            w[s] = std::exp(-utils[s] / lambda - shift);
            z += q[s] * w[s];
        }
        std::vector<double> grad(utils.size());
        for (std::size_t s = 0; s < utils.size(); ++s) grad[s] = -lambda * w[s] / z;
        return {-lambda * (shift + std::log(z)), std::move(grad)};
    }
    double value, eta;
    if (spec.kind() == DivergenceKind::gini) {
        const auto sol = gini_closed_form(utils, q, lambda);
        value = sol.value;
        eta = sol.eta;
    } else {
        const auto sol = multiplier_dual_weights(utils, q, lambda, spec.phi());
        value = sol.value;
        eta = sol.eta;
    }
    std::vector<double> grad(utils.size());
    for (std::size_t s = 0; s < utils.size(); ++s)
        grad[s] = -lambda * spec.phi().conjugate(eta - utils[s] / lambda);
    return {value, std::move(grad)};
}

inline std::optional<Model> make_model_if_valid(const StateSpacePtr& space,
                                                std::vector<double> weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) return std::nullopt;
        sum += w;
    }
    if (std::abs(sum - 1.0) > kNormalizationTol) return std::nullopt;
    return Model(space, std::move(weights));
}

} // namespace detail

/**
 * The multiplier value against one reference model:
 * V_{lambda,q}(f) = min_p { E_p[u(f)] + lambda D_phi(p || q) }.
 *
 * Relative entropy and Gini penalties are evaluated by their exact closed
 * forms, other generators through the Fenchel dual; a neutral spec
 * (lambda = inf or indicator) collapses to expected utility under q.
 */
inline EvaluationResult multiplier_value(const Act& act, const Model& q,
                                         const DivergenceSpec& spec) {
    detail::require_same_space(act.space(), q.space(), "multiplier_value");
    EvaluationResult result;

    if (spec.is_neutral()) {
        result.value = detail::expected_value(act.utils(), q.weights());
        result.worst_case_model = q;
        result.method = EvalMethod::maxmin;
        return result;
    }

    const double lambda = spec.lambda();
    switch (spec.kind()) {
    case DivergenceKind::relative_entropy: {
        auto sol = detail::entropic_closed_form(act.utils(), q.weights(), lambda);
        result.value = sol.value;
        result.worst_case_model = detail::make_model_if_valid(act.space(), sol.worst_case);
        result.method = EvalMethod::entropic_closed_form;
        return result;
    }
    case DivergenceKind::gini: {
        auto sol = detail::gini_closed_form(act.utils(), q.weights(), lambda);
        result.value = sol.value;
        result.worst_case_model = detail::make_model_if_valid(act.space(), sol.worst_case);
        result.method = EvalMethod::gini_closed_form;
        return result;
    }
    default: {
        auto sol = detail::multiplier_dual_weights(act.utils(), q.weights(), lambda, spec.phi());
        result.value = sol.value;
        if (sol.worst_case)
            result.worst_case_model =
                detail::make_model_if_valid(act.space(), std::move(*sol.worst_case));
        result.method = EvalMethod::generic_dual;
        return result;
    }
    }
}

/**
 * Same value through the Fenchel dual
 * lambda sup_eta { eta - E_q[ phi*(eta - u/lambda) ] } regardless of the
 * generator, as an independent route for cross-checking the closed forms.
 */
inline EvaluationResult multiplier_value_dual(const Act& act, const Model& q,
                                              const DivergenceSpec& spec) {
    detail::require_same_space(act.space(), q.space(), "multiplier_value_dual");
    if (spec.is_neutral()) return multiplier_value(act, q, spec);

    auto sol = detail::multiplier_dual_weights(act.utils(), q.weights(), spec.lambda(),
                                               spec.phi());
    EvaluationResult result;
    result.value = sol.value;
    if (sol.worst_case)
        result.worst_case_model = detail::make_model_if_valid(act.space(), std::move(*sol.worst_case));
    result.method = EvalMethod::generic_dual;
    return result;
}

namespace detail {

/// Shared neutral path: criterion under the indicator penalty and the
/// max-min criterion must agree to machine equality, so they are the
/// same code.
inline EvaluationResult neutral_criterion(const Act& act, const ModelSet& set) {
    EvaluationResult result;
    result.method = EvalMethod::maxmin;
    double best = kInfinity;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double v = expected_value(act.utils(), set[i].weights());
        if (v < best) {
            best = v;
            best_index = i;
        }
    }
    result.value = best;
    result.binding_model_index = best_index;
    result.binding_model = set[best_index];
    result.worst_case_model = set[best_index];
    return result;
}

} // namespace detail

/**
 * The robust criterion V(f) = min_{q in Q} V_{lambda,q}(f). Under
 * extreme_points_only the minimum runs over the listed models (lowest
 * index on ties). Under convex_hull a projected-gradient search over
 * mixture weights runs as well, and the better of the two answers wins;
 * when the interior mixture wins strictly, binding_model_index is absent
 * and binding_model holds the mixture.
 */
inline EvaluationResult criterion_value(const Act& act, const ModelSet& set,
                                        const DivergenceSpec& spec) {
    detail::require_same_space(act.space(), set.space(), "criterion_value");
    if (spec.is_neutral()) return detail::neutral_criterion(act, set);

    std::vector<EvaluationResult> per_model(set.size());
    detail::parallel_for(
        set.size(), [&](std::size_t i) { per_model[i] = multiplier_value(act, set[i], spec); },
        set.size() >= 8);

    std::size_t best_index = 0;
    for (std::size_t i = 1; i < set.size(); ++i)
        if (per_model[i].value < per_model[best_index].value) best_index = i;

    EvaluationResult result = per_model[best_index];
    result.binding_model_index = best_index;
    result.binding_model = set[best_index];

    if (set.hull_mode() == HullMode::convex_hull && set.size() > 1) {
        const auto& models = set.models();
        auto objective = [&](const std::vector<double>& alpha) {
            const auto q = detail::mixture_weights(models, alpha);
            return detail::multiplier_value_and_q_gradient(act.utils(), q, spec).first;
        };
        auto gradient = [&](const std::vector<double>& alpha) {
            const auto q = detail::mixture_weights(models, alpha);
            const auto dq = detail::multiplier_value_and_q_gradient(act.utils(), q, spec).second;
            std::vector<double> grad(models.size(), 0.0);
            for (std::size_t i = 0; i < models.size(); ++i)
                for (std::size_t s = 0; s < q.size(); ++s) grad[i] += dq[s] * models[i][s];
            return grad;
        };
        const auto hull = minimize_on_simplex(objective, gradient, models.size());
        if (hull.value < result.value - 1e-12) {
            const Model mixture(set.space(), detail::mixture_weights(models, hull.point));
            EvaluationResult interior = multiplier_value(act, mixture, spec);
            if (interior.value < result.value) {
                result = std::move(interior);
                result.binding_model_index = std::nullopt;
                result.binding_model = mixture;
            }
        }
    }
    return result;
}

/// The max-min criterion: min over structured models of expected
/// utility. Identical (to machine equality) to criterion_value with a
/// neutral spec; hull mode is irrelevant since the objective is linear.
inline EvaluationResult maxmin_value(const Act& act, const ModelSet& set) {
    detail::require_same_space(act.space(), set.space(), "maxmin_value");
    return detail::neutral_criterion(act, set);
}

namespace detail {

struct GridPoint {
    std::vector<int> coords;
    double value;
};

/// Objective of the inner minimization on the support simplex.
inline double primal_objective(const std::vector<double>& p_support,
                               const std::vector<double>& u_support,
                               const std::vector<double>& q_support, double lambda,
                               const PhiFunction& phi) {
    double value = 0.0;
    for (std::size_t i = 0; i < p_support.size(); ++i) {
        value += p_support[i] * u_support[i];
        value += lambda * q_support[i] * phi.phi(p_support[i] / q_support[i]);
    }
    return value;
}

} // namespace detail

/**
 * Brute-force verifier for the inner minimization: the minimum of
 * E_p[u] + lambda D_phi(p || q) over a grid of step `resolution` on the
 * simplex restricted to support(q). The returned value is a minimum over
 * feasible points, hence never below the true minimum, and convexity of
 * the objective lets coarse-to-fine zooming stand in for the full fine
 * grid when the support has three or more states.
 *
 * Independent of the closed forms and the dual by construction: it only
 * ever evaluates the primal objective.
 */
inline double primal_oracle(const Act& act, const Model& q, const DivergenceSpec& spec,
                            double resolution) {
    detail::require_same_space(act.space(), q.space(), "primal_oracle");
    if (act.size() > 4)
        throw DomainError("primal_oracle supports at most 4 states");
    if (!(resolution >= 1e-6 && resolution <= 1e-2))
        throw DomainError("primal_oracle resolution must lie in [1e-6, 1e-2]");

    if (spec.is_neutral())
        return detail::expected_value(act.utils(), q.weights());

    std::vector<double> u_support, q_support;
    for (std::size_t s = 0; s < q.size(); ++s) {
        if (q[s] > 0.0) {
            u_support.push_back(act[s]);
            q_support.push_back(q[s]);
        }
    }
    const std::size_t d = q_support.size();
    const double lambda = spec.lambda();
    const PhiFunction& phi = spec.phi();
    if (d == 1) return u_support[0]; // only p = q is feasible

    const std::size_t free_dims = d - 1;
    double best = kInfinity;

    auto evaluate = [&](const std::vector<int>& coords, double h) {
        std::vector<double> p(d, 0.0);
        double used = 0.0;
        for (std::size_t i = 0; i < free_dims; ++i) {
            p[i] = coords[i] * h;
            used += p[i];
        }
        p[free_dims] = std::max(1.0 - used, 0.0);
        const double v = detail::primal_objective(p, u_support, q_support, lambda, phi);
        best = std::min(best, v);
        return v;
    };

    // enumerate a full grid at step h over {k >= 0, sum k <= N}
    auto full_grid = [&](double h) {
        const int n_cells = static_cast<int>(std::floor(1.0 / h + 1e-9));
        std::vector<detail::GridPoint> points;
        std::vector<int> coords(free_dims, 0);
        std::function<void(std::size_t, int)> recurse = [&](std::size_t dim, int budget) {
            if (dim == free_dims) {
                points.push_back({coords, evaluate(coords, h)});
                return;
            }
            for (int k = 0; k <= budget; ++k) {
                coords[dim] = k;
                recurse(dim + 1, budget - k);
            }
        };
        recurse(0, n_cells);
        return points;
    };

    if (free_dims == 1) {
        full_grid(resolution);
        return best;
    }

    // coarse-to-fine: levels are resolution * 5^k, refined around the
    // best few points of the previous level
    std::vector<double> levels{resolution};
    const double coarse_target = free_dims == 2 ? 1.0 / 128.0 : 1.0 / 32.0;
    while (levels.back() * 5.0 <= coarse_target) levels.push_back(levels.back() * 5.0);
    std::reverse(levels.begin(), levels.end());

    std::vector<detail::GridPoint> current = full_grid(levels.front());

    constexpr int kWindow = 6;   // previous-level cells kept around each center
    constexpr int kCenters = 5;  // zoom around this many best points
    for (std::size_t level = 1; level < levels.size(); ++level) {
        const double h_prev = levels[level - 1];
        const double h = levels[level];
        const int ratio = static_cast<int>(std::lround(h_prev / h));
        const int n_cells = static_cast<int>(std::floor(1.0 / h + 1e-9));

        std::partial_sort(current.begin(),
                          current.begin() + std::min<std::size_t>(kCenters, current.size()),
                          current.end(), [](const detail::GridPoint& a, const detail::GridPoint& b) {
                              return a.value < b.value;
                          });
        const std::size_t centers = std::min<std::size_t>(kCenters, current.size());

        std::unordered_set<std::int64_t> seen;
        std::vector<detail::GridPoint> next;
        std::vector<int> coords(free_dims, 0);
        std::function<void(std::size_t, const std::vector<int>&, int)> expand =
            [&](std::size_t dim, const std::vector<int>& center, int sum) {
                if (sum > n_cells) return;
                if (dim == free_dims) {
                    std::int64_t key = 0;
                    for (std::size_t i = 0; i < free_dims; ++i)
                        key = key * (n_cells + 1) + coords[i];
                    if (!seen.insert(key).second) return;
                    next.push_back({coords, evaluate(coords, h)});
                    return;
                }
                const int lo = std::max(0, (center[dim] - kWindow) * ratio);
                const int hi = std::min(n_cells, (center[dim] + kWindow) * ratio);
                for (int k = lo; k <= hi; ++k) {
                    coords[dim] = k;
                    expand(dim + 1, center, sum + k);
                }
            };
        for (std::size_t c = 0; c < centers; ++c) expand(0, current[c].coords, 0);
        current = std::move(next);
    }
    return best;
}

/**
 * Evaluates the criterion along an ascending ladder of lambdas (the
 * infinity sentinel, when present, must come last and yields the max-min
 * value). Values are nondecreasing in lambda.
 */
inline std::vector<std::pair<double, double>> lambda_sweep(const Act& act,
                                                           const ModelSet& set,
                                                           const PhiFunction& phi,
                                                           const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw DomainError("lambda_sweep needs at least one lambda");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (std::isnan(lambdas[i]) || lambdas[i] <= 0.0)
            throw DomainError("lambda_sweep: lambdas must be positive");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
            throw DomainError("lambda_sweep: lambdas must be strictly ascending");
    }

    auto spec_for = [&](double lambda) {
        switch (phi.kind()) {
        case PhiKind::relative_entropy: return DivergenceSpec::entropic(lambda);
        case PhiKind::gini: return DivergenceSpec::gini(lambda);
        case PhiKind::custom: return DivergenceSpec::custom(phi, lambda);
        }
        return DivergenceSpec::entropic(lambda);
    };

    std::vector<std::pair<double, double>> sweep(lambdas.size());
    detail::parallel_for(
        lambdas.size(),
        [&](std::size_t i) {
            sweep[i] = {lambdas[i], criterion_value(act, set, spec_for(lambdas[i])).value};
        },
        lambdas.size() >= 8);
    return sweep;
}

} // namespace robust_choice
