#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "robust_choice/errors.hpp"
#include "robust_choice/extended.hpp"
#include "robust_choice/model_space.hpp"
#include "robust_choice/simplex.hpp"

namespace robust_choice {

enum class PhiKind { relative_entropy, gini, custom };

/**
 * A convex generator phi for a phi-divergence, together with its Fenchel
 * conjugate phi*(y) = sup_{t>=0} { t y - phi(t) } and, when available,
 * the conjugate's derivative (used to recover worst-case models).
 *
 * Contract: phi(1) = 0, phi convex on [0, inf), superlinear growth.
 * Built-in generators ship with exact conjugates; custom ones are checked
 * against a grid supremum on construction rather than trusted.
 */
class PhiFunction {
public:
    using Scalar = std::function<double(double)>;

    static const PhiFunction& relative_entropy() {
        // phi(t) = t ln t - t + 1, with phi(0) = 1 under 0 ln 0 = 0
        static const PhiFunction instance(
            PhiKind::relative_entropy, "relative_entropy",
            [](double t) { return t == 0.0 ? 1.0 : t * std::log(t) - t + 1.0; },
            [](double y) { return std::expm1(y); },
            [](double y) { return std::exp(y); });
        return instance;
    }

    static const PhiFunction& gini() {
        // phi(t) = (t - 1)^2 / 2; conjugate is quadratic above y = -1 and
        // flat at -1/2 below it (the t = 0 boundary binds there)
        static const PhiFunction instance(
            PhiKind::gini, "gini",
            [](double t) { return 0.5 * (t - 1.0) * (t - 1.0); },
            [](double y) { return y >= -1.0 ? y + 0.5 * y * y : -0.5; },
            [](double y) { return std::max(1.0 + y, 0.0); });
        return instance;
    }

    /**
     * User-supplied generator. The conjugate is validated against a grid
     * supremum and phi(1) = 0 and convexity are spot-checked; a generator
     * failing any check is rejected with DomainError.
     */
    static PhiFunction custom(std::string name, Scalar phi, Scalar conjugate,
                              Scalar conjugate_derivative = nullptr);

    double phi(double t) const { return phi_(t); }
    double conjugate(double y) const { return conjugate_(y); }
    bool has_conjugate_derivative() const { return static_cast<bool>(conjugate_derivative_); }
    double conjugate_derivative(double y) const { return conjugate_derivative_(y); }

    PhiKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

private:
    PhiFunction(PhiKind kind, std::string name, Scalar phi, Scalar conjugate,
                Scalar conjugate_derivative)
        : kind_(kind), name_(std::move(name)), phi_(std::move(phi)),
          conjugate_(std::move(conjugate)),
          conjugate_derivative_(std::move(conjugate_derivative)) {}

    PhiKind kind_;
    std::string name_;
    Scalar phi_;
    Scalar conjugate_;
    Scalar conjugate_derivative_;
};

struct ConjugateSelfTestReport {
    double max_abs_deviation = 0.0;
    double worst_y = 0.0;
    double tolerance = 1e-4;
    bool passed = false;
};

/**
 * Checks the stored conjugate against the grid supremum of t*y - phi(t)
 * over t in [0, 50] at step 1e-3. Passes when the largest deviation over
 * the y grid stays within 1e-4. The grid supremum undershoots the true
 * conjugate once the maximizing t leaves [0, 50], so callers should keep
 * the y grid inside the range where the maximizer is interior.
 */
inline ConjugateSelfTestReport conjugate_self_test(const PhiFunction& phi,
                                                   const std::vector<double>& y_grid) {
    constexpr double t_max = 50.0;
    constexpr double t_step = 1e-3;
    const std::size_t t_count = static_cast<std::size_t>(t_max / t_step) + 1;

    std::vector<double> phi_values(t_count);
    for (std::size_t i = 0; i < t_count; ++i) {
        const double t = static_cast<double>(i) * t_step;
        phi_values[i] = phi.phi(t);
        if (!std::isfinite(phi_values[i]))
            throw DomainError("phi is non-finite at t = " + std::to_string(t));
    }

    ConjugateSelfTestReport report;
    for (double y : y_grid) {
        if (!std::isfinite(y)) throw DomainError("conjugate_self_test: non-finite grid point");
        double sup = -kInfinity;
        for (std::size_t i = 0; i < t_count; ++i)
            sup = std::max(sup, static_cast<double>(i) * t_step * y - phi_values[i]);
        const double deviation = std::abs(phi.conjugate(y) - sup);
        if (deviation > report.max_abs_deviation) {
            report.max_abs_deviation = deviation;
            report.worst_y = y;
        }
    }
    report.passed = report.max_abs_deviation <= report.tolerance;
    return report;
}

inline PhiFunction PhiFunction::custom(std::string name, Scalar phi, Scalar conjugate,
                                       Scalar conjugate_derivative) {
    if (!phi || !conjugate) throw DomainError("custom phi needs phi and its conjugate");
    PhiFunction candidate(PhiKind::custom, std::move(name), std::move(phi),
                          std::move(conjugate), std::move(conjugate_derivative));
    if (std::abs(candidate.phi(1.0)) > 1e-12)
        throw DomainError("custom phi violates phi(1) = 0");
    // convexity spot check on a deterministic fan of chords
    for (double a : {0.0, 0.25, 0.8, 1.0, 1.7, 3.0, 10.0}) {
        for (double b : {0.1, 0.5, 1.3, 2.5, 6.0, 20.0}) {
            for (double w : {0.25, 0.5, 0.75}) {
                const double chord = w * candidate.phi(a) + (1.0 - w) * candidate.phi(b);
                if (candidate.phi(w * a + (1.0 - w) * b) > chord + 1e-12)
                    throw DomainError("custom phi fails the convexity spot check");
            }
        }
    }
    std::vector<double> y_grid;
    for (double y = -3.0; y <= 3.0 + 1e-12; y += 0.25) y_grid.push_back(y);
    const auto report = conjugate_self_test(candidate, y_grid);
    if (!report.passed)
        throw DomainError("custom phi conjugate deviates from the grid supremum by " +
                          std::to_string(report.max_abs_deviation) + " at y = " +
                          std::to_string(report.worst_y));
    return candidate;
}

enum class DivergenceKind { relative_entropy, gini, custom, indicator };

/**
 * A penalty family c(p, q) = lambda * D_phi(p || q), with lambda = inf
 * (or the indicator kind) denoting the misspecification-neutral penalty
 * that forces p onto the structured set.
 */
class DivergenceSpec {
public:
    static DivergenceSpec entropic(double lambda) {
        return DivergenceSpec(DivergenceKind::relative_entropy,
                              &PhiFunction::relative_entropy(), lambda);
    }
    static DivergenceSpec gini(double lambda) {
        return DivergenceSpec(DivergenceKind::gini, &PhiFunction::gini(), lambda);
    }
    static DivergenceSpec custom(PhiFunction phi, double lambda) {
        DivergenceSpec spec(DivergenceKind::custom, nullptr, lambda);
        spec.owned_phi_ = std::make_shared<PhiFunction>(std::move(phi));
        spec.phi_ = spec.owned_phi_.get();
        return spec;
    }
    static DivergenceSpec indicator() {
        return DivergenceSpec(DivergenceKind::indicator, nullptr, kInfinity);
    }

    DivergenceKind kind() const { return kind_; }
    double lambda() const { return lambda_; }

    /// Indicator kind or lambda = inf: both encode the neutral index.
    bool is_neutral() const { return kind_ == DivergenceKind::indicator || is_infinite(lambda_); }

    bool has_phi() const { return phi_ != nullptr; }
    const PhiFunction& phi() const {
        if (!phi_) throw DomainError("indicator divergence carries no phi");
        return *phi_;
    }

    DivergenceSpec with_lambda(double lambda) const {
        DivergenceSpec copy = *this;
        if (copy.kind_ == DivergenceKind::indicator)
            throw DomainError("indicator divergence has no lambda to override");
        copy.lambda_ = validated(lambda);
        return copy;
    }

private:
    DivergenceSpec(DivergenceKind kind, const PhiFunction* phi, double lambda)
        : kind_(kind), phi_(phi), lambda_(validated(lambda)) {}

    static double validated(double lambda) {
        if (std::isnan(lambda) || lambda <= 0.0)
            throw DomainError("lambda must be positive (inf denotes the neutral case)");
        return lambda;
    }

    DivergenceKind kind_;
    const PhiFunction* phi_;
    double lambda_;
    std::shared_ptr<PhiFunction> owned_phi_; // keeps custom generators alive
};

namespace detail {

/// D_phi on raw weight vectors; support inclusion stands in for absolute
/// continuity, with the 0/0 = 0 convention.
inline double phi_divergence_weights(const std::vector<double>& p,
                                     const std::vector<double>& q,
                                     const PhiFunction& phi) {
    double total = 0.0;
    for (std::size_t s = 0; s < p.size(); ++s) {
        if (q[s] <= 0.0) {
            if (p[s] > 0.0) return kInfinity;
            continue; // 0/0 contributes nothing
        }
        total += q[s] * phi.phi(p[s] / q[s]);
    }
    return total;
}

/// Numeric derivative of phi, for optimizer search directions only.
inline double phi_slope(const PhiFunction& phi, double t) {
    const double h = 1e-6 * (1.0 + std::abs(t));
    if (t < h) return (phi.phi(t + h) - phi.phi(t)) / h;
    return (phi.phi(t + h) - phi.phi(t - h)) / (2.0 * h);
}

/// d D_phi(p || q) / d q_s = phi(r) - r phi'(r) at r = p_s / q_s.
inline std::vector<double> phi_divergence_q_gradient(const std::vector<double>& p,
                                                     const std::vector<double>& q,
                                                     const PhiFunction& phi) {
    std::vector<double> grad(p.size(), 0.0);
    for (std::size_t s = 0; s < p.size(); ++s) {
        const double r = q[s] > 0.0 ? p[s] / q[s] : 0.0;
        grad[s] = phi.phi(r) - r * phi_slope(phi, r);
    }
    return grad;
}

inline std::vector<double> mixture_weights(const std::vector<Model>& models,
                                           const std::vector<double>& alpha) {
    std::vector<double> q(models[0].size(), 0.0);
    for (std::size_t i = 0; i < models.size(); ++i) {
        const double a = std::max(alpha[i], 0.0);
        for (std::size_t s = 0; s < q.size(); ++s) q[s] += a * models[i][s];
    }
    return q;
}

/// Smallest max-norm distance from p to the convex hull of the listed
/// models, found by minimizing the squared Euclidean residual in the
/// mixture weights.
inline double hull_membership_residual(const Model& p, const ModelSet& set) {
    const auto& models = set.models();
    auto objective = [&](const std::vector<double>& alpha) {
        const auto q = mixture_weights(models, alpha);
        double r2 = 0.0;
        for (std::size_t s = 0; s < q.size(); ++s) {
            const double d = q[s] - p[s];
            r2 += d * d;
        }
        return r2;
    };
    auto gradient = [&](const std::vector<double>& alpha) {
        const auto q = mixture_weights(models, alpha);
        std::vector<double> grad(models.size(), 0.0);
        for (std::size_t i = 0; i < models.size(); ++i)
            for (std::size_t s = 0; s < q.size(); ++s)
                grad[i] += 2.0 * (q[s] - p[s]) * models[i][s];
        return grad;
    };
    const auto best = minimize_on_simplex(objective, gradient, models.size());
    const auto q = mixture_weights(models, best.point);
    double residual = 0.0;
    for (std::size_t s = 0; s < q.size(); ++s)
        residual = std::max(residual, std::abs(q[s] - p[s]));
    return residual;
}

/// Max-norm tolerance for "p lies in the convex hull" in neutral mode.
inline constexpr double kHullMembershipTol = 1e-7;

} // namespace detail

/**
 * The phi-divergence D_phi(p || q) on a finite state space: +inf unless
 * support(p) is contained in support(q), else the q-expectation of
 * phi(dp/dq).
 */
inline double phi_divergence(const Model& p, const Model& q, const PhiFunction& phi) {
    detail::require_same_space(p.space(), q.space(), "phi_divergence");
    return detail::phi_divergence_weights(p.weights(), q.weights(), phi);
}

/**
 * Extension point for statistical set distances that are not induced by
 * a pairwise divergence: any callable of this shape can stand in for the
 * Hausdorff-style index when composing bespoke criteria out of the
 * library primitives. The built-in machinery uses misspecification_index.
 */
using SetDistance = std::function<double(const Model&, const ModelSet&)>;

/**
 * The misspecification index c_Q(p) = min_{q in Q} lambda * D_phi(p || q):
 * the (Hausdorff) statistical distance between p and the structured set.
 * Neutral specs collapse it to the indicator of Q (or of its hull).
 * Under convex_hull mode the minimum runs over mixtures of the listed
 * models via projected gradient, never above the extreme-point minimum.
 */
inline double misspecification_index(const Model& p, const ModelSet& set,
                                     const DivergenceSpec& spec) {
    detail::require_same_space(p.space(), set.space(), "misspecification_index");

    if (spec.is_neutral()) {
        if (set.contains(p)) return 0.0;
        if (set.hull_mode() == HullMode::convex_hull && set.size() > 1 &&
            detail::hull_membership_residual(p, set) <= detail::kHullMembershipTol)
            return 0.0;
        return kInfinity;
    }

    const PhiFunction& phi = spec.phi();
    double best = kInfinity;
    for (const Model& q : set.models())
        best = std::min(best, detail::phi_divergence_weights(p.weights(), q.weights(), phi));

    if (set.hull_mode() == HullMode::convex_hull && set.size() > 1) {
        const auto& models = set.models();
        auto objective = [&](const std::vector<double>& alpha) {
            return detail::phi_divergence_weights(
                p.weights(), detail::mixture_weights(models, alpha), phi);
        };
        auto gradient = [&](const std::vector<double>& alpha) {
            const auto q = detail::mixture_weights(models, alpha);
            const auto dq = detail::phi_divergence_q_gradient(p.weights(), q, phi);
            std::vector<double> grad(models.size(), 0.0);
            for (std::size_t i = 0; i < models.size(); ++i)
                for (std::size_t s = 0; s < q.size(); ++s)
                    grad[i] += dq[s] * models[i][s];
            return grad;
        };
        const auto hull = minimize_on_simplex(objective, gradient, models.size());
        best = std::min(best, hull.value);
    }
    return extended_mul(spec.lambda(), best);
}

} // namespace robust_choice
