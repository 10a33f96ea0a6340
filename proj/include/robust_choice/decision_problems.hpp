#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robust_choice/errors.hpp"
#include "robust_choice/model_space.hpp"
#include "robust_choice/parallel.hpp"
#include "robust_choice/preferences.hpp"
#include "robust_choice/solver.hpp"

namespace robust_choice {

/// Ties in the optimal value within this tolerance are all reported.
inline constexpr double kOptimalityTol = 1e-9;

/// Fixed epsilon for the strong-dominance filter inside solve(): small,
/// so the weakly admissible set errs on the large side and keeps the
/// optimal-acts guarantee safe.
inline constexpr double kSolveStrongEps = 1e-6;

/**
 * A finite choice set of named acts, the structured model set, and the
 * penalty family they are judged against.
 */
class DecisionProblem {
public:
    DecisionProblem(std::vector<Act> acts, ModelSet set, DivergenceSpec spec)
        : acts_(std::move(acts)), set_(std::move(set)), spec_(std::move(spec)) {
        if (acts_.empty()) throw DomainError("decision problem needs at least one act");
        for (const Act& act : acts_) {
            detail::require_same_space(act.space(), set_.space(), "DecisionProblem");
            if (act.name().empty()) throw DomainError("acts in a decision problem need names");
        }
        for (std::size_t i = 0; i < acts_.size(); ++i)
            for (std::size_t j = i + 1; j < acts_.size(); ++j)
                if (acts_[i].name() == acts_[j].name())
                    throw DomainError("duplicate act name: " + acts_[i].name());
    }

    const std::vector<Act>& acts() const { return acts_; }
    const ModelSet& model_set() const { return set_; }
    const DivergenceSpec& divergence() const { return spec_; }

    const Act* find_act(const std::string& name) const {
        for (const Act& act : acts_)
            if (act.name() == name) return &act;
        return nullptr;
    }

private:
    std::vector<Act> acts_;
    ModelSet set_;
    DivergenceSpec spec_;
};

/**
 * Solution of a decision problem: the optimal acts (all ties reported),
 * the weakly admissible set F*_Q (no strong strict dominator in F), the
 * admissible set (no strict dominator), and the value v(Q). Act order
 * follows the problem's listing.
 */
struct AdmissibilityReport {
    std::vector<std::string> optimal;
    std::vector<std::string> weakly_admissible;
    std::vector<std::string> admissible;
    double value = 0.0;
    std::vector<std::pair<std::string, double>> act_values;
};

inline AdmissibilityReport solve(const DecisionProblem& problem) {
    const auto& acts = problem.acts();
    const std::size_t n = acts.size();

    std::vector<double> values(n);
    detail::parallel_for(
        n,
        [&](std::size_t i) {
            values[i] = criterion_value(acts[i], problem.model_set(), problem.divergence()).value;
        },
        n >= 8);

    // ordered-pair verdicts: verdicts[i][j] compares acts[i] against acts[j]
    std::vector<std::vector<DominanceVerdict>> verdicts(n, std::vector<DominanceVerdict>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                verdicts[i][j] =
                    dominance(acts[i], acts[j], problem.model_set(), problem.divergence());

    AdmissibilityReport report;
    const double best = *std::max_element(values.begin(), values.end());
    report.value = best;
    for (std::size_t i = 0; i < n; ++i) {
        report.act_values.emplace_back(acts[i].name(), values[i]);
        if (values[i] >= best - kOptimalityTol) report.optimal.push_back(acts[i].name());

        bool strongly_dominated = false;
        bool strictly_dominated = false;
        for (std::size_t j = 0; j < n && !(strongly_dominated && strictly_dominated); ++j) {
            if (j == i) continue;
            if (verdicts[j][i].uniform_gap >= kSolveStrongEps) strongly_dominated = true;
            if (verdicts[j][i].relation == DominanceRelation::dominates)
                strictly_dominated = true;
        }
        if (!strongly_dominated) report.weakly_admissible.push_back(acts[i].name());
        if (!strictly_dominated) report.admissible.push_back(acts[i].name());
    }
    return report;
}

struct ComparativeStatics {
    double value_q = 0.0;
    double value_q_prime = 0.0;
    bool monotone = false;
};

namespace detail {

inline double choice_value(const std::vector<Act>& acts, const ModelSet& set,
                           const DivergenceSpec& spec) {
    double best = -kInfinity;
    for (const Act& act : acts) best = std::max(best, criterion_value(act, set, spec).value);
    return best;
}

} // namespace detail

/**
 * Value comparison across nested structured sets: Q must embed in
 * q_prime (every listed model matched within kModelEqualityTol), both
 * sides are evaluated with the problem's divergence, and the value of
 * the smaller set can only be higher. lambda_prime, when given,
 * re-scales the penalty for the larger set (an enlarged set may warrant
 * less misspecification fear); with an override in place the monotone
 * flag simply records what happened, the inequality is no longer
 * guaranteed.
 */
inline ComparativeStatics value_comparative_statics(
    const DecisionProblem& problem, const ModelSet& q_prime,
    std::optional<double> lambda_prime = std::nullopt) {
    detail::require_same_space(problem.model_set().space(), q_prime.space(),
                               "value_comparative_statics");
    for (std::size_t i = 0; i < problem.model_set().size(); ++i)
        if (!q_prime.find_member(problem.model_set()[i], kModelEqualityTol))
            throw DomainError("value_comparative_statics: model " + std::to_string(i) +
                              " of Q has no match in Q'");

    const DivergenceSpec& spec = problem.divergence();
    const DivergenceSpec spec_prime = lambda_prime ? spec.with_lambda(*lambda_prime) : spec;

    ComparativeStatics result;
    result.value_q = detail::choice_value(problem.acts(), problem.model_set(), spec);
    result.value_q_prime = detail::choice_value(problem.acts(), q_prime, spec_prime);
    result.monotone = result.value_q >= result.value_q_prime - kComparisonTol;
    return result;
}

/**
 * Confirms the value is already attained on the weakly admissible set:
 * recomputes the best criterion value over F*_Q alone and compares with
 * v(Q).
 */
inline bool restricted_value_check(const DecisionProblem& problem) {
    const AdmissibilityReport report = solve(problem);
    double restricted = -kInfinity;
    for (const std::string& name : report.weakly_admissible) {
        const Act* act = problem.find_act(name);
        restricted = std::max(
            restricted,
            criterion_value(*act, problem.model_set(), problem.divergence()).value);
    }
    return std::abs(restricted - report.value) <= kComparisonTol;
}

} // namespace robust_choice
