// Command-line front end: evaluates problem files against the robust
// criterion and prints machine-readable JSON on stdout. Exit codes:
// 0 success, 1 internal/selftest failure, 2 parse or validation error,
// 3 convergence failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "robust_choice/io.hpp"
#include "robust_choice/robust_choice.hpp"

namespace {

using nlohmann::json;
using namespace robust_choice;

json number(double v) { return io::round_sig(v, 12); }

json lambda_json(double lambda) {
    if (is_infinite(lambda)) return "inf";
    return number(lambda);
}

json weights_json(const Model& model) {
    json arr = json::array();
    for (double w : model.weights()) arr.push_back(number(w));
    return arr;
}

json evaluation_json(const io::ProblemDocument& doc, const std::string& act_name,
                     const EvaluationResult& result) {
    json entry;
    entry["act"] = act_name;
    entry["value"] = number(result.value);
    entry["method"] = to_string(result.method);
    if (result.binding_model_index) {
        entry["binding_model_index"] = *result.binding_model_index;
        entry["binding_model"] = doc.structured_set[*result.binding_model_index];
    } else {
        entry["binding_model_index"] = nullptr;
        entry["binding_model"] = nullptr;
        if (result.binding_model)
            entry["binding_model_weights"] = weights_json(*result.binding_model);
    }
    if (result.worst_case_model)
        entry["worst_case_model"] = weights_json(*result.worst_case_model);
    else
        entry["worst_case_model"] = nullptr;
    return entry;
}

int run_evaluate(const std::string& path, const std::optional<std::string>& act_filter) {
    const io::ProblemDocument doc = io::parse_problem_file(path);
    const DecisionProblem problem = doc.to_problem();

    json results = json::array();
    for (const Act& act : problem.acts()) {
        if (act_filter && act.name() != *act_filter) continue;
        results.push_back(evaluation_json(
            doc, act.name(),
            criterion_value(act, problem.model_set(), problem.divergence())));
    }
    if (act_filter && results.empty())
        throw ValidationError("unknown act '" + *act_filter + "'");

    json out;
    out["command"] = "evaluate";
    out["results"] = std::move(results);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_dominance(const std::string& path, const std::string& f_name,
                  const std::string& g_name) {
    const io::ProblemDocument doc = io::parse_problem_file(path);
    const DecisionProblem problem = doc.to_problem();
    const Act* f = problem.find_act(f_name);
    const Act* g = problem.find_act(g_name);
    if (!f) throw ValidationError("unknown act '" + f_name + "'");
    if (!g) throw ValidationError("unknown act '" + g_name + "'");

    const DominanceVerdict verdict =
        dominance(*f, *g, problem.model_set(), problem.divergence());
    json gaps = json::array();
    for (const auto& [index, gap] : verdict.per_model_gaps) {
        gaps.push_back({{"index", index},
                        {"model", doc.structured_set[index]},
                        {"gap", number(gap)}});
    }
    json out;
    out["command"] = "dominance";
    out["f"] = f_name;
    out["g"] = g_name;
    out["relation"] = to_string(verdict.relation);
    out["uniform_gap"] = number(verdict.uniform_gap);
    out["per_model_gaps"] = std::move(gaps);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_solve(const std::string& path) {
    const io::ProblemDocument doc = io::parse_problem_file(path);
    const DecisionProblem problem = doc.to_problem();
    const AdmissibilityReport report = solve(problem);

    json values = json::object();
    for (const auto& [name, value] : report.act_values) values[name] = number(value);
    json out;
    out["command"] = "solve";
    out["value"] = number(report.value);
    out["optimal"] = report.optimal;
    out["weakly_admissible"] = report.weakly_admissible;
    out["admissible"] = report.admissible;
    out["act_values"] = std::move(values);
    std::cout << out.dump(2) << "\n";
    return 0;
}

std::vector<double> parse_lambda_list(const std::string& text) {
    std::vector<double> lambdas;
    std::string token;
    std::istringstream stream(text);
    while (std::getline(stream, token, ',')) {
        if (token == "inf") {
            lambdas.push_back(kInfinity);
            continue;
        }
        char* end = nullptr;
        const double value = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0')
            throw ValidationError("cannot parse lambda '" + token + "'");
        lambdas.push_back(value);
    }
    if (lambdas.empty()) throw ValidationError("--lambdas needs at least one value");
    return lambdas;
}

int run_sweep(const std::string& path, const std::string& act_name,
              const std::string& lambda_list, const std::optional<std::string>& csv_path) {
    const io::ProblemDocument doc = io::parse_problem_file(path);
    const DecisionProblem problem = doc.to_problem();
    const Act* act = problem.find_act(act_name);
    if (!act) throw ValidationError("unknown act '" + act_name + "'");
    if (!problem.divergence().has_phi())
        throw ValidationError("sweep needs a phi-divergence problem, not an indicator");

    const std::vector<double> lambdas = parse_lambda_list(lambda_list);
    const auto sweep =
        lambda_sweep(*act, problem.model_set(), problem.divergence().phi(), lambdas);

    json rows = json::array();
    for (const auto& [lambda, value] : sweep)
        rows.push_back({{"lambda", lambda_json(lambda)}, {"value", number(value)}});
    json out;
    out["command"] = "sweep";
    out["act"] = act_name;
    out["sweep"] = std::move(rows);
    std::cout << out.dump(2) << "\n";

    if (csv_path) {
        std::ofstream csv(*csv_path);
        if (!csv) throw ValidationError("cannot open CSV output '" + *csv_path + "'");
        csv << "lambda,value\n";
        for (const auto& [lambda, value] : sweep) {
            csv << (is_infinite(lambda) ? std::string("inf") : io::format_sig(lambda, 12))
                << "," << io::format_sig(value, 12) << "\n";
        }
    }
    return 0;
}

int run_compare(const std::string& path, const std::string& superset_path) {
    const io::ProblemDocument doc = io::parse_problem_file(path);
    const io::ProblemDocument superset_doc = io::parse_problem_file(superset_path);
    const DecisionProblem problem = doc.to_problem();
    const DecisionProblem superset = superset_doc.to_problem();

    const ComparativeStatics stats =
        value_comparative_statics(problem, superset.model_set());
    json out;
    out["command"] = "compare";
    out["value_q"] = number(stats.value_q);
    out["value_q_prime"] = number(stats.value_q_prime);
    out["monotone"] = stats.monotone;
    std::cout << out.dump(2) << "\n";
    return 0;
}

json conjugate_report_json(const ConjugateSelfTestReport& report) {
    return {{"max_abs_deviation", number(report.max_abs_deviation)},
            {"worst_y", number(report.worst_y)},
            {"tolerance", number(report.tolerance)},
            {"passed", report.passed}};
}

int run_selftest() {
    bool passed = true;
    json out;
    out["command"] = "selftest";

    // conjugate grids stay inside the range where the supremum over
    // t in [0, 50] is attained interior
    std::vector<double> entropy_grid, gini_grid;
    for (double y = -5.0; y <= 3.5 + 1e-12; y += 0.25) entropy_grid.push_back(y);
    for (double y = -5.0; y <= 5.0 + 1e-12; y += 0.25) gini_grid.push_back(y);
    const auto entropy_report =
        conjugate_self_test(PhiFunction::relative_entropy(), entropy_grid);
    const auto gini_report = conjugate_self_test(PhiFunction::gini(), gini_grid);
    out["conjugates"] = {{"relative_entropy", conjugate_report_json(entropy_report)},
                         {"gini", conjugate_report_json(gini_report)}};
    passed = passed && entropy_report.passed && gini_report.passed;

    // duality-gap suite: dual route vs the brute-force grid, and the
    // closed forms vs the dual route
    std::mt19937_64 rng(20260808u);
    std::uniform_real_distribution<double> util_dist(-5.0, 5.0);
    std::uniform_real_distribution<double> weight_dist(0.05, 1.0);
    const std::vector<double> lambdas{0.3, 1.0, 3.0};

    double max_primal_gap = 0.0;
    double max_closed_form_gap = 0.0;
    const int instances = 30;
    for (int i = 0; i < instances; ++i) {
        const std::size_t n = 2 + (i % 2);
        std::vector<std::string> labels;
        for (std::size_t s = 0; s < n; ++s) labels.push_back("s" + std::to_string(s));
        const auto space = make_state_space(labels);

        std::vector<double> weights(n);
        double sum = 0.0;
        for (double& w : weights) sum += (w = weight_dist(rng));
        for (double& w : weights) w /= sum;
        const Model q(space, weights);

        std::vector<double> utils(n);
        for (double& u : utils) u = util_dist(rng);
        const Act act(space, utils, "probe");

        const double lambda = lambdas[i % lambdas.size()];
        const double resolution = n == 2 ? 1e-5 : 1e-4;
        const double tolerance = n == 2 ? 1e-4 : 1e-3;
        for (const DivergenceSpec& spec :
             {DivergenceSpec::entropic(lambda), DivergenceSpec::gini(lambda)}) {
            const double dual = multiplier_value_dual(act, q, spec).value;
            const double grid = primal_oracle(act, q, spec, resolution);
            const double closed = multiplier_value(act, q, spec).value;
            max_primal_gap = std::max(max_primal_gap, std::abs(dual - grid));
            max_closed_form_gap = std::max(max_closed_form_gap, std::abs(closed - dual));
            passed = passed && std::abs(dual - grid) <= tolerance &&
                     std::abs(closed - dual) <= 1e-9;
        }
    }
    out["duality"] = {{"instances", instances},
                      {"max_primal_gap", number(max_primal_gap)},
                      {"max_closed_form_gap", number(max_closed_form_gap)}};
    out["passed"] = passed;
    std::cout << out.dump(2) << "\n";
    return passed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust decision criterion evaluator over finite state spaces"};
    app.require_subcommand(1);

    std::string problem_path, superset_path, f_name, g_name, act_name, lambda_list;
    std::optional<std::string> act_filter, csv_path;
    std::string csv_value, act_value;

    auto* evaluate = app.add_subcommand("evaluate", "Criterion value per act");
    evaluate->add_option("problem", problem_path, "Problem JSON file")->required();
    auto* act_opt = evaluate->add_option("--act", act_value, "Evaluate only this act");

    auto* dominance_cmd = app.add_subcommand("dominance", "Compare two acts model by model");
    dominance_cmd->add_option("problem", problem_path, "Problem JSON file")->required();
    dominance_cmd->add_option("--f", f_name, "First act")->required();
    dominance_cmd->add_option("--g", g_name, "Second act")->required();

    auto* solve_cmd = app.add_subcommand("solve", "Optimal and admissible acts");
    solve_cmd->add_option("problem", problem_path, "Problem JSON file")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "Criterion value along a lambda ladder");
    sweep_cmd->add_option("problem", problem_path, "Problem JSON file")->required();
    sweep_cmd->add_option("--act", act_name, "Act to sweep")->required();
    sweep_cmd->add_option("--lambdas", lambda_list, "Comma-separated ascending lambdas, e.g. 0.1,1,10,inf")
        ->required();
    auto* csv_opt = sweep_cmd->add_option("--csv", csv_value, "Also write CSV to this path");

    auto* compare_cmd =
        app.add_subcommand("compare", "Value comparative statics across nested model sets");
    compare_cmd->add_option("problem", problem_path, "Problem JSON file")->required();
    compare_cmd->add_option("superset", superset_path, "Problem file whose model set contains the first")
        ->required();

    app.add_subcommand("selftest", "Conjugate and duality-gap checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*act_opt) act_filter = act_value;
    if (*csv_opt) csv_path = csv_value;

    try {
        if (evaluate->parsed()) return run_evaluate(problem_path, act_filter);
        if (dominance_cmd->parsed()) return run_dominance(problem_path, f_name, g_name);
        if (solve_cmd->parsed()) return run_solve(problem_path);
        if (sweep_cmd->parsed()) return run_sweep(problem_path, act_name, lambda_list, csv_path);
        if (compare_cmd->parsed()) return run_compare(problem_path, superset_path);
        return run_selftest();
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
