#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "robust_choice/decision_problems.hpp"
#include "robust_choice/divergences.hpp"
#include "robust_choice/errors.hpp"
#include "robust_choice/model_space.hpp"

namespace robust_choice::io {

using nlohmann::json;

/// Round-trips a value through "%.12g" so emitted numbers diff cleanly.
inline std::string format_sig(double v, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline double round_sig(double v, int digits = 12) {
    return std::strtod(format_sig(v, digits).c_str(), nullptr);
}

namespace detail {

inline const json& require_key(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ParseError("expected an object", path);
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError("missing key", path + "/" + key);
    return *it;
}

inline std::string require_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ParseError("expected a string", path);
    return j.get<std::string>();
}

inline std::vector<double> require_number_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError("expected an array of numbers", path);
    std::vector<double> values;
    values.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw ParseError("expected a number", path + "/" + std::to_string(i));
        values.push_back(j[i].get<double>());
    }
    return values;
}

inline void validate_weights(const std::vector<double>& w, std::size_t n_states,
                             const std::string& path) {
    if (w.size() != n_states)
        throw ValidationError("vector at " + path + " has " + std::to_string(w.size()) +
                              " entries for " + std::to_string(n_states) + " states");
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] < 0.0)
            throw ValidationError("negative weight at " + path + "/" + std::to_string(i));
        sum += w[i];
    }
    if (std::abs(sum - 1.0) > kNormalizationTol)
        throw ValidationError("weights at " + path + " sum to " + format_sig(sum, 17) +
                              ", outside the tolerance around 1");
}

} // namespace detail

/**
 * In-memory form of a problem file (schema_version "1"). Weight vectors
 * are kept exactly as given; normalization happens when the document is
 * turned into a DecisionProblem. Model and act entries are listed in the
 * document's (alphabetical) key order, while the structured set keeps
 * the order of its name list, which fixes model indices in all outputs.
 */
struct ProblemDocument {
    std::string schema_version = "1";
    std::vector<std::string> states;
    std::vector<std::pair<std::string, std::vector<double>>> models;
    std::vector<std::string> structured_set;
    HullMode hull_mode = HullMode::extreme_points_only;
    DivergenceKind divergence_kind = DivergenceKind::relative_entropy;
    double lambda = 1.0;
    std::vector<std::pair<std::string, std::vector<double>>> acts;

    static ProblemDocument parse(const std::string& text);
    json emit() const;
    DecisionProblem to_problem() const;

    const std::vector<double>* find_model(const std::string& name) const {
        for (const auto& [model_name, weights] : models)
            if (model_name == name) return &weights;
        return nullptr;
    }
};

inline ProblemDocument ProblemDocument::parse(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), "");
    }

    ProblemDocument doc;
    doc.schema_version = detail::require_string(detail::require_key(j, "schema_version", ""),
                                                "/schema_version");
    if (doc.schema_version != "1")
        throw ValidationError("unsupported schema_version '" + doc.schema_version + "'");

    const json& states = detail::require_key(j, "states", "");
    if (!states.is_array() || states.empty())
        throw ParseError("expected a nonempty array", "/states");
    for (std::size_t i = 0; i < states.size(); ++i)
        doc.states.push_back(
            detail::require_string(states[i], "/states/" + std::to_string(i)));

    const json& models = detail::require_key(j, "models", "");
    if (!models.is_object() || models.empty())
        throw ParseError("expected a nonempty object", "/models");
    for (const auto& [name, weights] : models.items()) {
        auto w = detail::require_number_array(weights, "/models/" + name);
        detail::validate_weights(w, doc.states.size(), "/models/" + name);
        doc.models.emplace_back(name, std::move(w));
    }

    const json& structured = detail::require_key(j, "structured_set", "");
    const json& names = detail::require_key(structured, "models", "/structured_set");
    if (!names.is_array() || names.empty())
        throw ParseError("expected a nonempty array", "/structured_set/models");
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string name =
            detail::require_string(names[i], "/structured_set/models/" + std::to_string(i));
        if (!doc.find_model(name))
            throw ValidationError("structured_set references unknown model '" + name + "'");
        for (const std::string& previous : doc.structured_set)
            if (previous == name)
                throw ValidationError("structured_set lists model '" + name + "' twice");
        doc.structured_set.push_back(name);
    }
    if (structured.contains("hull_mode")) {
        const std::string mode =
            detail::require_string(structured["hull_mode"], "/structured_set/hull_mode");
        if (mode == "extreme_points_only")
            doc.hull_mode = HullMode::extreme_points_only;
        else if (mode == "convex_hull")
            doc.hull_mode = HullMode::convex_hull;
        else
            throw ParseError("unknown hull_mode '" + mode + "'", "/structured_set/hull_mode");
    }

    const json& divergence = detail::require_key(j, "divergence", "");
    const std::string kind =
        detail::require_string(detail::require_key(divergence, "kind", "/divergence"),
                               "/divergence/kind");
    if (kind == "relative_entropy")
        doc.divergence_kind = DivergenceKind::relative_entropy;
    else if (kind == "gini")
        doc.divergence_kind = DivergenceKind::gini;
    else if (kind == "indicator")
        doc.divergence_kind = DivergenceKind::indicator;
    else
        throw ParseError("unknown divergence kind '" + kind + "'", "/divergence/kind");

    if (doc.divergence_kind == DivergenceKind::indicator) {
        doc.lambda = kInfinity;
        if (divergence.contains("lambda")) {
            const json& lambda = divergence["lambda"];
            if (!(lambda.is_string() && lambda.get<std::string>() == "inf"))
                throw ValidationError("indicator divergence admits only lambda \"inf\"");
        }
    } else {
        const json& lambda = detail::require_key(divergence, "lambda", "/divergence");
        if (lambda.is_string()) {
            if (lambda.get<std::string>() != "inf")
                throw ValidationError("lambda must be a positive number or \"inf\"");
            doc.lambda = kInfinity;
        } else if (lambda.is_number()) {
            doc.lambda = lambda.get<double>();
            if (!(doc.lambda > 0.0))
                throw ValidationError("lambda must be positive, got " +
                                      format_sig(doc.lambda, 17));
        } else {
            throw ParseError("expected a number or \"inf\"", "/divergence/lambda");
        }
    }

    const json& acts = detail::require_key(j, "acts", "");
    if (!acts.is_object() || acts.empty())
        throw ParseError("expected a nonempty object", "/acts");
    for (const auto& [name, utils] : acts.items()) {
        auto u = detail::require_number_array(utils, "/acts/" + name);
        if (u.size() != doc.states.size())
            throw ValidationError("act '" + name + "' has " + std::to_string(u.size()) +
                                  " utilities for " + std::to_string(doc.states.size()) +
                                  " states");
        doc.acts.emplace_back(name, std::move(u));
    }
    return doc;
}

inline json ProblemDocument::emit() const {
    json j;
    j["schema_version"] = schema_version;
    j["states"] = states;
    json model_obj = json::object();
    for (const auto& [name, weights] : models) model_obj[name] = weights;
    j["models"] = std::move(model_obj);
    j["structured_set"] = {
        {"models", structured_set},
        {"hull_mode",
         hull_mode == HullMode::convex_hull ? "convex_hull" : "extreme_points_only"}};
    json divergence;
    switch (divergence_kind) {
    case DivergenceKind::relative_entropy: divergence["kind"] = "relative_entropy"; break;
    case DivergenceKind::gini: divergence["kind"] = "gini"; break;
    case DivergenceKind::indicator: divergence["kind"] = "indicator"; break;
    case DivergenceKind::custom: throw DomainError("custom divergences are not serializable");
    }
    if (is_infinite(lambda))
        divergence["lambda"] = "inf";
    else
        divergence["lambda"] = lambda;
    j["divergence"] = std::move(divergence);
    json act_obj = json::object();
    for (const auto& [name, utils] : acts) act_obj[name] = utils;
    j["acts"] = std::move(act_obj);
    return j;
}

inline DecisionProblem ProblemDocument::to_problem() const {
    const StateSpacePtr space = make_state_space(states);

    std::vector<Model> structured;
    for (const std::string& name : structured_set)
        structured.emplace_back(space, *find_model(name));
    ModelSet set = [&] {
        try {
            return ModelSet(std::move(structured), hull_mode);
        } catch (const DomainError& e) {
            throw ValidationError(std::string("invalid structured set: ") + e.what());
        }
    }();

    DivergenceSpec spec = [&] {
        switch (divergence_kind) {
        case DivergenceKind::relative_entropy: return DivergenceSpec::entropic(lambda);
        case DivergenceKind::gini: return DivergenceSpec::gini(lambda);
        case DivergenceKind::indicator: return DivergenceSpec::indicator();
        default: throw ValidationError("unsupported divergence kind in document");
        }
    }();

    std::vector<Act> act_list;
    for (const auto& [name, utils] : acts) act_list.emplace_back(space, utils, name);
    return DecisionProblem(std::move(act_list), std::move(set), std::move(spec));
}

inline ProblemDocument parse_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file '" + path + "'", "");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return ProblemDocument::parse(buffer.str());
}

} // namespace robust_choice::io
