#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "robust_choice/errors.hpp"
#include "robust_choice/model_space.hpp"
#include "robust_choice/solver.hpp"

namespace robust_choice {

/// Single tolerance from which every weak/strict classification derives.
inline constexpr double kComparisonTol = 1e-9;

enum class DominanceRelation { dominates, dominated, equivalent, incomparable };

inline const char* to_string(DominanceRelation r) {
    switch (r) {
    case DominanceRelation::dominates: return "dominates";
    case DominanceRelation::dominated: return "dominated";
    case DominanceRelation::equivalent: return "equivalent";
    case DominanceRelation::incomparable: return "incomparable";
    }
    return "unknown";
}

/**
 * Model-by-model comparison of two acts. per_model_gaps lists, for each
 * listed structured model, the multiplier-value gap V_{lambda,q}(f) -
 * V_{lambda,q}(g); uniform_gap is the smallest gap seen (including hull
 * refinement points, when those run).
 */
struct DominanceVerdict {
    DominanceRelation relation = DominanceRelation::equivalent;
    std::vector<std::pair<std::size_t, double>> per_model_gaps;
    double uniform_gap = 0.0;
};

/**
 * The incomplete dominance relation: f dominates g when its multiplier
 * value is at least g's against every structured model. Under convex_hull
 * mode, unanimity over the hull is probed on a 21-point segment grid per
 * model pair; those gaps enter the classification and uniform_gap, so a
 * grid violation downgrades an extreme-point "dominates" to incomparable.
 */
inline DominanceVerdict dominance(const Act& f, const Act& g, const ModelSet& set,
                                  const DivergenceSpec& spec) {
    detail::require_same_space(f.space(), set.space(), "dominance");
    detail::require_same_space(g.space(), set.space(), "dominance");

    DominanceVerdict verdict;
    std::vector<double> all_gaps;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double gap =
            multiplier_value(f, set[i], spec).value - multiplier_value(g, set[i], spec).value;
        verdict.per_model_gaps.emplace_back(i, gap);
        all_gaps.push_back(gap);
    }

    if (set.hull_mode() == HullMode::convex_hull && set.size() > 1) {
        for (std::size_t i = 0; i < set.size(); ++i) {
            for (std::size_t j = i + 1; j < set.size(); ++j) {
                for (int t = 1; t < 20; ++t) { // endpoints are the listed models
                    const Model mix = mix_models(set[i], set[j], t / 20.0);
                    all_gaps.push_back(multiplier_value(f, mix, spec).value -
                                       multiplier_value(g, mix, spec).value);
                }
            }
        }
    }

    bool any_positive = false, any_negative = false;
    double uniform = kInfinity;
    for (double gap : all_gaps) {
        any_positive = any_positive || gap > kComparisonTol;
        any_negative = any_negative || gap < -kComparisonTol;
        uniform = std::min(uniform, gap);
    }
    verdict.uniform_gap = uniform;
    if (any_positive && any_negative)
        verdict.relation = DominanceRelation::incomparable;
    else if (any_positive)
        verdict.relation = DominanceRelation::dominates;
    else if (any_negative)
        verdict.relation = DominanceRelation::dominated;
    else
        verdict.relation = DominanceRelation::equivalent;
    return verdict;
}

/**
 * Strong dominance: the multiplier-value gap clears epsilon against
 * every structured model, making the ranking robust to small mixtures
 * with arbitrary acts.
 */
inline bool strong_dominance(const Act& f, const Act& g, const ModelSet& set,
                             const DivergenceSpec& spec, double epsilon) {
    if (!(epsilon > 0.0)) throw DomainError("strong dominance needs epsilon > 0");
    return dominance(f, g, set, spec).uniform_gap >= epsilon;
}

struct BetConsistencyReport {
    int pairs_tested = 0;
    int violations = 0;
    double worst_gap = kInfinity; // smallest V(xAy) - V(xBy) over tested pairs
    std::vector<std::string> counterexamples;

    bool consistent() const { return violations == 0; }
};

namespace detail {

inline std::string describe_event(const std::vector<std::size_t>& event,
                                  const StateSpace& space) {
    std::string out = "{";
    for (std::size_t i = 0; i < event.size(); ++i) {
        if (i) out += ",";
        out += space.labels()[event[i]];
    }
    return out + "}";
}

} // namespace detail

/**
 * Samples event pairs (A, B) that every structured model ranks q(A) >=
 * q(B) and verifies the criterion prefers betting on A. Divergence
 * penalties with finite lambda cannot produce violations; the check
 * exists to exercise that guarantee on concrete instances.
 */
inline BetConsistencyReport bet_consistency_check(const ModelSet& set,
                                                  const DivergenceSpec& spec, int trials,
                                                  std::uint64_t seed) {
    if (spec.is_neutral() || !spec.has_phi())
        throw DomainError("bet_consistency_check needs a phi-divergence with finite lambda");
    if (trials < 0) throw DomainError("bet_consistency_check: trials must be nonnegative");

    std::mt19937_64 rng(seed);
    const std::size_t n = set.space()->size();
    std::uniform_real_distribution<double> low_dist(-3.0, 3.0);
    std::uniform_real_distribution<double> gap_dist(0.1, 3.0);

    BetConsistencyReport report;
    const int max_attempts = trials * 50 + 100;
    for (int attempt = 0; attempt < max_attempts && report.pairs_tested < trials; ++attempt) {
        std::vector<std::size_t> event_a, event_b;
        for (std::size_t s = 0; s < n; ++s) {
            if (rng() & 1u) event_a.push_back(s);
            if (rng() & 1u) event_b.push_back(s);
        }
        bool qualifying = true;
        for (const Model& q : set.models()) {
            double qa = 0.0, qb = 0.0;
            for (std::size_t s : event_a) qa += q[s];
            for (std::size_t s : event_b) qb += q[s];
            if (qa < qb) {
                qualifying = false;
                break;
            }
        }
        if (!qualifying) continue;

        const double low = low_dist(rng);
        const double high = low + gap_dist(rng);
        const Act bet_a = bet_act(set.space(), event_a, high, low, "bet_a");
        const Act bet_b = bet_act(set.space(), event_b, high, low, "bet_b");
        const double gap = criterion_value(bet_a, set, spec).value -
                           criterion_value(bet_b, set, spec).value;
        ++report.pairs_tested;
        report.worst_gap = std::min(report.worst_gap, gap);
        if (gap < -kComparisonTol) {
            ++report.violations;
            if (report.counterexamples.size() < 10)
                report.counterexamples.push_back(
                    "A=" + detail::describe_event(event_a, *set.space()) +
                    " B=" + detail::describe_event(event_b, *set.space()));
        }
    }
    return report;
}

/**
 * True when the criterion coincides with the max-min criterion on a
 * sample of random acts: the decision maker trusts the structured models
 * outright. Holds exactly for neutral specs and fails for finite-lambda
 * divergences whenever some act separates them.
 */
inline bool neutrality_check(const ModelSet& set, const DivergenceSpec& spec, int trials,
                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> util_dist(-5.0, 5.0);
    const std::size_t n = set.space()->size();
    for (int t = 0; t < trials; ++t) {
        std::vector<double> utils(n);
        for (double& u : utils) u = util_dist(rng);
        const Act act(set.space(), std::move(utils), "probe");
        const double gap =
            std::abs(criterion_value(act, set, spec).value - maxmin_value(act, set).value);
        if (gap > kComparisonTol) return false;
    }
    return true;
}

} // namespace robust_choice
