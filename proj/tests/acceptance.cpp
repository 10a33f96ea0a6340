// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Every tolerance is pinned here; the random corpora are fully seeded.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "robust_choice/robust_choice.hpp"
#include "support/instances.hpp"

namespace {

using namespace robust_choice;
using testsupport::random_act;
using testsupport::random_model;
using testsupport::random_model_set;
using testsupport::space_n;

struct Outcome {
    bool passed = true;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(3);
    out << v;
    return out.str();
}

struct Instance {
    StateSpacePtr space;
    Act act;
    Model q;
    double lambda;
};

std::vector<Instance> duality_corpus(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    const std::vector<double> lambdas{0.3, 1.0, 3.0};
    std::vector<Instance> corpus;
    for (int i = 0; i < count; ++i) {
        const auto space = space_n(2 + i % 2);
        corpus.push_back({space, random_act(rng, space, -5.0, 5.0), random_model(rng, space),
                          lambdas[i % 3]});
    }
    return corpus;
}

// 1. |generic dual - primal grid| <= 1e-4 at resolution 1e-5 for both
//    built-in divergences
Outcome duality_gap() {
    double worst = 0.0;
    for (const Instance& inst : duality_corpus(1001, 100)) {
        for (const auto& spec :
             {DivergenceSpec::entropic(inst.lambda), DivergenceSpec::gini(inst.lambda)}) {
            const double dual = multiplier_value_dual(inst.act, inst.q, spec).value;
            const double grid = primal_oracle(inst.act, inst.q, spec, 1e-5);
            worst = std::max(worst, std::abs(dual - grid));
        }
    }
    return {worst <= 1e-4, "max |dual - grid| = " + fmt(worst) + " over 100 instances"};
}

// 2. entropic closed form vs generic dual with the entropy conjugate
Outcome closed_form_agreement() {
    double worst = 0.0;
    for (const Instance& inst : duality_corpus(1001, 100)) {
        const auto spec = DivergenceSpec::entropic(inst.lambda);
        worst = std::max(worst, std::abs(multiplier_value(inst.act, inst.q, spec).value -
                                         multiplier_value_dual(inst.act, inst.q, spec).value));
    }
    return {worst <= 1e-9, "max |closed - dual| = " + fmt(worst)};
}

// 3. gini value equals mean minus variance/(2 lambda) whenever the
//    recovered minimizer is strictly positive
Outcome gini_mean_variance() {
    double worst = 0.0;
    int interior = 0;
    for (const Instance& inst : duality_corpus(1003, 100)) {
        const auto result = multiplier_value(inst.act, inst.q, DivergenceSpec::gini(inst.lambda));
        if (!result.worst_case_model) continue;
        bool strictly_positive = true;
        for (std::size_t s = 0; s < inst.q.size(); ++s)
            if (inst.q[s] > 0.0 && (*result.worst_case_model)[s] <= 0.0)
                strictly_positive = false;
        if (!strictly_positive) continue;
        ++interior;
        const double mean = certainty_equivalent_utility(inst.act, inst.q);
        double second = 0.0;
        for (std::size_t s = 0; s < inst.q.size(); ++s)
            second += inst.q[s] * inst.act[s] * inst.act[s];
        const double variance = second - mean * mean;
        worst = std::max(worst,
                         std::abs(result.value - (mean - variance / (2.0 * inst.lambda))));
    }
    return {worst <= 1e-9 && interior > 0,
            "max identity gap = " + fmt(worst) + " on " + std::to_string(interior) +
                " interior instances"};
}

// 4. lambda = 1e6 sits within 1e-4 of max-min; sweeps are monotone
Outcome large_lambda_limit() {
    std::mt19937_64 rng(1004);
    double worst_gap = 0.0, worst_monotone = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto space = space_n(2 + i % 2);
        const ModelSet set = random_model_set(rng, space, 2 + i % 2);
        const Act act = random_act(rng, space, -5.0, 5.0); // utility range <= 10
        const PhiFunction& phi =
            i % 2 ? PhiFunction::gini() : PhiFunction::relative_entropy();
        const auto sweep = lambda_sweep(act, set, phi,
                                        {0.1, 0.3, 1.0, 3.0, 10.0, 100.0, 1e4, 1e6, kInfinity});
        worst_gap = std::max(worst_gap, std::abs(sweep[sweep.size() - 2].second -
                                                 sweep.back().second));
        for (std::size_t k = 1; k < sweep.size(); ++k)
            worst_monotone =
                std::max(worst_monotone, sweep[k - 1].second - sweep[k].second);
    }
    return {worst_gap <= 1e-4 && worst_monotone <= 1e-12,
            "max |V_1e6 - maxmin| = " + fmt(worst_gap) +
                ", worst monotonicity slack = " + fmt(worst_monotone)};
}

// 5. indicator and lambda = inf agree with max-min to machine equality
Outcome neutrality_equivalence() {
    std::mt19937_64 rng(1005);
    for (int i = 0; i < 50; ++i) {
        const auto space = space_n(2 + i % 3);
        const ModelSet set = random_model_set(rng, space, 1 + i % 3);
        for (int a = 0; a < 4; ++a) {
            const Act act = random_act(rng, space, -5.0, 5.0);
            const double reference = maxmin_value(act, set).value;
            if (criterion_value(act, set, DivergenceSpec::indicator()).value != reference ||
                criterion_value(act, set, DivergenceSpec::entropic(kInfinity)).value !=
                    reference ||
                criterion_value(act, set, DivergenceSpec::gini(kInfinity)).value != reference)
                return {false, "mismatch on instance " + std::to_string(i)};
        }
    }
    return {true, "200 acts, machine equality"};
}

// 6. c_Q(p) = 0 iff p matches a member (within 1e-9); monotone in Q
Outcome misspecification_index_law() {
    std::mt19937_64 rng(1006);
    std::uniform_real_distribution<double> tiny(-1e-10, 1e-10);
    int sampled = 0;
    for (int i = 0; sampled < 500; ++i) {
        const auto space = space_n(2 + i % 2);
        const ModelSet set = random_model_set(rng, space, 2);
        std::vector<Model> extended = set.models();
        extended.push_back(random_model(rng, space));
        const ModelSet superset(extended);

        const std::vector<DivergenceSpec> specs{
            DivergenceSpec::entropic(1.0), DivergenceSpec::gini(0.5),
            DivergenceSpec::indicator()};

        for (int kind = 0; kind < 3 && sampled < 500; ++kind, ++sampled) {
            Model p = [&] {
                if (kind == 0) return set[i % 2]; // exact member
                if (kind == 1) {                  // member nudged inside 1e-9
                    std::vector<double> w = set[i % 2].weights();
                    double drift = 0.0;
                    for (std::size_t s = 0; s + 1 < w.size(); ++s) {
                        const double d = tiny(rng);
                        w[s] += d;
                        drift += d;
                    }
                    w.back() -= drift;
                    return Model(space, w);
                }
                while (true) { // far from every member
                    Model candidate = random_model(rng, space);
                    bool far = true;
                    for (const Model& q : set.models())
                        far = far && candidate.max_deviation(q) > 1e-3;
                    if (far) return candidate;
                }
            }();

            const bool member = set.contains(p, 1e-9);
            for (const auto& spec : specs) {
                const double index = misspecification_index(p, set, spec);
                const double index_superset = misspecification_index(p, superset, spec);
                if (member && !(index <= 1e-12))
                    return {false, "member with nonzero index " + fmt(index)};
                if (!member && !(index > 1e-9))
                    return {false, "far model with index " + fmt(index)};
                if (!(index >= index_superset - 1e-12))
                    return {false, "index grew on the superset"};
            }
        }
    }
    return {true, "500 sampled models, zero-set and monotonicity both hold"};
}

// 7. entropic criterion is invariant to taking the convex hull
Outcome entropic_hull_invariance() {
    std::mt19937_64 rng(1007);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto space = space_n(2 + i % 2);
        const ModelSet extremes = random_model_set(rng, space, 2 + i % 2);
        const Act act = random_act(rng, space, -5.0, 5.0);
        const auto spec =
            DivergenceSpec::entropic(std::vector<double>{0.3, 1.0, 3.0}[i % 3]);
        const double flat = criterion_value(act, extremes, spec).value;
        const double hull =
            criterion_value(act, extremes.with_hull_mode(HullMode::convex_hull), spec).value;
        worst = std::max(worst, std::abs(flat - hull));
    }
    return {worst <= 1e-8, "max |extreme - hull| = " + fmt(worst) + " over 50 instances"};
}

// 8. 500 qualifying event pairs, no bet-consistency violations
Outcome bet_consistency() {
    std::mt19937_64 rng(1008);
    int tested = 0, violations = 0;
    for (int i = 0; i < 10; ++i) {
        const auto space = space_n(2 + i % 3);
        const ModelSet set = random_model_set(rng, space, 2);
        for (const auto& spec : {DivergenceSpec::entropic(1.0), DivergenceSpec::gini(1.0)}) {
            const auto report = bet_consistency_check(set, spec, 25, 1008 + i);
            tested += report.pairs_tested;
            violations += report.violations;
        }
    }
    return {tested >= 500 && violations == 0,
            std::to_string(tested) + " qualifying pairs, " + std::to_string(violations) +
                " violations"};
}

// 9. strong => strict => weak; singleton completeness; one witness with
//    V(f) > V(g) yet incomparable
Outcome dominance_logic() {
    std::mt19937_64 rng(1009);
    for (int i = 0; i < 80; ++i) {
        const auto space = space_n(2 + i % 2);
        const ModelSet set = random_model_set(rng, space, 1 + i % 3);
        const auto spec = i % 2 ? DivergenceSpec::gini(1.0) : DivergenceSpec::entropic(1.0);
        const Act f = random_act(rng, space, -3.0, 3.0, "f");
        const Act g = random_act(rng, space, -3.0, 3.0, "g");
        const auto verdict = dominance(f, g, set, spec);

        if (verdict.uniform_gap >= 1e-6 && verdict.relation != DominanceRelation::dominates)
            return {false, "strong gap without dominance"};
        if (verdict.relation == DominanceRelation::dominates &&
            criterion_value(f, set, spec).value < criterion_value(g, set, spec).value - 1e-9)
            return {false, "dominance without criterion ranking"};
        if (set.size() == 1 && verdict.relation == DominanceRelation::incomparable)
            return {false, "singleton set produced incomparability"};
    }

    // corpus witness: ranked by the criterion, unranked by dominance
    const auto space = space_n(2);
    const ModelSet witness_set({Model(space, {0.9, 0.1}), Model(space, {0.2, 0.8})});
    const auto spec = DivergenceSpec::entropic(1.0);
    const Act f(space, {1.0, 0.0}, "f");
    const Act g(space, {0.0, 1.0}, "g");
    const bool ranked =
        criterion_value(f, witness_set, spec).value >
        criterion_value(g, witness_set, spec).value + 1e-3;
    const bool incomparable =
        dominance(f, g, witness_set, spec).relation == DominanceRelation::incomparable;
    return {ranked && incomparable, "chain holds on 80 pairs; witness confirmed"};
}

// 10. optimal acts weakly admissible; clear unique optima admissible;
//     nested sets rank values; restricted value check everywhere
Outcome admissibility() {
    std::mt19937_64 rng(1010);
    for (int i = 0; i < 200; ++i) {
        const auto space = space_n(2 + i % 2);
        const ModelSet set = random_model_set(rng, space, 1 + i % 3);
        const auto spec = i % 3 == 0   ? DivergenceSpec::indicator()
                          : i % 3 == 1 ? DivergenceSpec::entropic(1.0)
                                       : DivergenceSpec::gini(0.7);
        std::vector<Act> acts;
        for (int a = 0; a < 2 + i % 3; ++a)
            acts.push_back(random_act(rng, space, -3.0, 3.0, "act" + std::to_string(a)));
        const DecisionProblem problem(acts, set, spec);
        const auto report = solve(problem);

        for (const auto& name : report.optimal) {
            if (std::find(report.weakly_admissible.begin(), report.weakly_admissible.end(),
                          name) == report.weakly_admissible.end())
                return {false, "optimal act outside F*_Q on instance " + std::to_string(i)};
        }
        if (report.optimal.size() == 1) {
            double runner_up = -kInfinity;
            for (const auto& [name, value] : report.act_values)
                if (name != report.optimal.front()) runner_up = std::max(runner_up, value);
            if (report.value - runner_up > 1e-6 &&
                std::find(report.admissible.begin(), report.admissible.end(),
                          report.optimal.front()) == report.admissible.end())
                return {false, "clear unique optimum not admissible"};
        }
        if (!restricted_value_check(problem))
            return {false, "restricted value mismatch on instance " + std::to_string(i)};
    }

    std::mt19937_64 rng2(2010);
    for (int i = 0; i < 100; ++i) {
        const auto space = space_n(2 + i % 2);
        const ModelSet small = random_model_set(rng2, space, 1 + i % 2);
        std::vector<Model> larger = small.models();
        larger.push_back(random_model(rng2, space));
        std::vector<Act> acts;
        for (int a = 0; a < 3; ++a)
            acts.push_back(random_act(rng2, space, -3.0, 3.0, "act" + std::to_string(a)));
        const auto spec = i % 2 ? DivergenceSpec::gini(1.0) : DivergenceSpec::entropic(0.8);
        if (!value_comparative_statics(DecisionProblem(acts, small, spec), ModelSet(larger))
                 .monotone)
            return {false, "value rose on a larger structured set"};
    }
    return {true, "200 problems + 100 nested pairs"};
}

// 11. the worked two-state fixture, grid-verified
Outcome worked_fixture() {
    const auto space = space_n(2);
    const Act act(space, {0.0, 1.0}, "f");
    const Model q(space, {0.5, 0.5});

    const double entropic = multiplier_value(act, q, DivergenceSpec::entropic(1.0)).value;
    const double gini = multiplier_value(act, q, DivergenceSpec::gini(1.0)).value;
    const double entropic_grid = primal_oracle(act, q, DivergenceSpec::entropic(1.0), 1e-5);
    const double gini_grid = primal_oracle(act, q, DivergenceSpec::gini(1.0), 1e-5);

    const bool ok = std::abs(entropic - 0.379885) <= 1e-5 && std::abs(gini - 0.375) <= 1e-9 &&
                    std::abs(entropic_grid - 0.379885) <= 1e-4 &&
                    std::abs(gini_grid - 0.375) <= 1e-4;
    return {ok, "entropy " + fmt(entropic) + " (grid " + fmt(entropic_grid) + "), gini " +
                    fmt(gini) + " (grid " + fmt(gini_grid) + ")"};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* label;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {1, "duality gap (dual vs primal grid, 1e-4)", duality_gap},
        {2, "closed-form agreement (entropy, 1e-9)", closed_form_agreement},
        {3, "gini mean-variance identity (1e-9)", gini_mean_variance},
        {4, "large-lambda limit and sweep monotonicity", large_lambda_limit},
        {5, "neutrality equivalence (machine equality)", neutrality_equivalence},
        {6, "misspecification index law", misspecification_index_law},
        {7, "entropic hull invariance (1e-8)", entropic_hull_invariance},
        {8, "bet consistency (500 pairs)", bet_consistency},
        {9, "dominance logic and witness", dominance_logic},
        {10, "admissibility and value monotonicity", admissibility},
        {11, "worked fixture", worked_fixture},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const Outcome outcome = criterion.run();
        std::printf("%s  criterion %2d: %s  [%s]\n", outcome.passed ? "PASS" : "FAIL",
                    criterion.id, criterion.label, outcome.detail.c_str());
        if (!outcome.passed) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
