#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "robust_choice/errors.hpp"

namespace robust_choice {

/// Models whose weights sum to 1 within this tolerance are accepted and
/// renormalized on construction; anything further off is rejected.
inline constexpr double kNormalizationTol = 1e-9;

/// Two models are considered the same (for deduplication inside a
/// ModelSet) when every coordinate agrees within this tolerance.
inline constexpr double kModelEqualityTol = 1e-12;

/// Membership tolerance for "p matches a listed model" checks.
inline constexpr double kMembershipTol = 1e-9;

/**
 * An ordered finite collection of state labels. Everything else in the
 * library (models, acts) is a vector indexed by these states.
 */
class StateSpace {
public:
    explicit StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.empty()) throw DomainError("state space needs at least one state");
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i].empty()) throw DomainError("state labels must be nonempty");
            for (std::size_t j = i + 1; j < labels_.size(); ++j) {
                if (labels_[i] == labels_[j])
                    throw DomainError("duplicate state label: " + labels_[i]);
            }
        }
    }

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

    std::optional<std::size_t> index_of(std::string_view label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return i;
        return std::nullopt;
    }

    bool operator==(const StateSpace& other) const { return labels_ == other.labels_; }
    bool operator!=(const StateSpace& other) const { return !(*this == other); }

private:
    std::vector<std::string> labels_;
};

using StateSpacePtr = std::shared_ptr<const StateSpace>;

inline StateSpacePtr make_state_space(std::vector<std::string> labels) {
    return std::make_shared<const StateSpace>(std::move(labels));
}

namespace detail {

/// Spaces are compared by content, not pointer identity, so documents
/// parsed separately can interoperate.
inline void require_same_space(const StateSpacePtr& a, const StateSpacePtr& b,
                               const char* context) {
    if (a.get() == b.get()) return;
    if (!a || !b || *a != *b)
        throw DimensionError(std::string(context) + ": operands live on different state spaces");
}

} // namespace detail

/**
 * A probability vector over a finite state space. Weights are validated
 * (nonnegative, sum within kNormalizationTol of 1) and renormalized to
 * sum exactly to 1 on construction. Immutable afterwards.
 */
class Model {
public:
    Model(StateSpacePtr space, std::vector<double> weights)
        : space_(std::move(space)), weights_(std::move(weights)) {
        if (!space_) throw DomainError("model needs a state space");
        if (weights_.size() != space_->size())
            throw DimensionError("model has " + std::to_string(weights_.size()) +
                                 " weights for " + std::to_string(space_->size()) + " states");
        double sum = 0.0;
        for (double w : weights_) {
            if (!std::isfinite(w) || w < 0.0)
                throw DomainError("model weights must be finite and nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kNormalizationTol)
            throw DomainError("model weights sum to " + std::to_string(sum) +
                              ", outside the normalization tolerance");
        for (double& w : weights_) w /= sum;
    }

    const StateSpacePtr& space() const { return space_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t s) const { return weights_[s]; }

    /// Largest coordinate-wise deviation from another model.
    double max_deviation(const Model& other) const {
        detail::require_same_space(space_, other.space_, "max_deviation");
        double d = 0.0;
        for (std::size_t s = 0; s < weights_.size(); ++s)
            d = std::max(d, std::abs(weights_[s] - other.weights_[s]));
        return d;
    }

private:
    StateSpacePtr space_;
    std::vector<double> weights_;
};

enum class HullMode { extreme_points_only, convex_hull };

/**
 * The posited set of structured models: a finite list of Models, read
 * either as-is or as the generators of their convex hull.
 */
class ModelSet {
public:
    explicit ModelSet(std::vector<Model> models,
                      HullMode hull_mode = HullMode::extreme_points_only)
        : models_(std::move(models)), hull_mode_(hull_mode) {
        if (models_.empty()) throw DomainError("model set must be nonempty");
        for (std::size_t i = 1; i < models_.size(); ++i)
            detail::require_same_space(models_[0].space(), models_[i].space(), "ModelSet");
        for (std::size_t i = 0; i < models_.size(); ++i)
            for (std::size_t j = i + 1; j < models_.size(); ++j)
                if (models_[i].max_deviation(models_[j]) <= kModelEqualityTol)
                    throw DomainError("model set contains duplicate models (indices " +
                                      std::to_string(i) + ", " + std::to_string(j) + ")");
    }

    const std::vector<Model>& models() const { return models_; }
    const Model& operator[](std::size_t i) const { return models_[i]; }
    std::size_t size() const { return models_.size(); }
    HullMode hull_mode() const { return hull_mode_; }
    const StateSpacePtr& space() const { return models_[0].space(); }

    /// Index of the first listed model within tol of p, if any.
    std::optional<std::size_t> find_member(const Model& p, double tol = kMembershipTol) const {
        for (std::size_t i = 0; i < models_.size(); ++i)
            if (models_[i].max_deviation(p) <= tol) return i;
        return std::nullopt;
    }

    bool contains(const Model& p, double tol = kMembershipTol) const {
        return find_member(p, tol).has_value();
    }

    /// Same generators under the other hull interpretation.
    ModelSet with_hull_mode(HullMode mode) const {
        ModelSet copy = *this;
        copy.hull_mode_ = mode;
        return copy;
    }

private:
    std::vector<Model> models_;
    HullMode hull_mode_;
};

/**
 * An act expressed directly as its utility profile: utils[s] is the
 * utility received in state s.
 */
class Act {
public:
    Act(StateSpacePtr space, std::vector<double> utils, std::string name = {})
        : space_(std::move(space)), utils_(std::move(utils)), name_(std::move(name)) {
        if (!space_) throw DomainError("act needs a state space");
        if (utils_.size() != space_->size())
            throw DimensionError("act has " + std::to_string(utils_.size()) +
                                 " utilities for " + std::to_string(space_->size()) + " states");
        for (double u : utils_)
            if (!std::isfinite(u)) throw DomainError("act utilities must be finite");
    }

    const StateSpacePtr& space() const { return space_; }
    const std::vector<double>& utils() const { return utils_; }
    const std::string& name() const { return name_; }
    std::size_t size() const { return utils_.size(); }
    double operator[](std::size_t s) const { return utils_[s]; }

    double min_util() const { return *std::min_element(utils_.begin(), utils_.end()); }
    double max_util() const { return *std::max_element(utils_.begin(), utils_.end()); }

private:
    StateSpacePtr space_;
    std::vector<double> utils_;
    std::string name_;
};

/**
 * Utility of the consequence indifferent to the act under the given
 * model: the expectation of the act's utility profile.
 */
inline double certainty_equivalent_utility(const Act& act, const Model& model) {
    detail::require_same_space(act.space(), model.space(), "certainty_equivalent_utility");
    return std::inner_product(act.utils().begin(), act.utils().end(),
                              model.weights().begin(), 0.0);
}

/// Hybrid model alpha * q1 + (1 - alpha) * q2.
inline Model mix_models(const Model& q1, const Model& q2, double alpha) {
    detail::require_same_space(q1.space(), q2.space(), "mix_models");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError("mixture weight must lie in [0,1]");
    std::vector<double> w(q1.size());
    for (std::size_t s = 0; s < w.size(); ++s)
        w[s] = alpha * q1[s] + (1.0 - alpha) * q2[s];
    return Model(q1.space(), std::move(w));
}

/**
 * The bet on an event: high_util on the listed states, low_util off them.
 * Requires high_util > low_util so the act really is a bet.
 */
inline Act bet_act(const StateSpacePtr& space, const std::vector<std::string>& event,
                   double high_util, double low_util, std::string name = "bet") {
    if (!space) throw DomainError("bet_act needs a state space");
    if (!(high_util > low_util))
        throw DomainError("a bet needs high_util > low_util");
    std::vector<double> utils(space->size(), low_util);
    for (const auto& label : event) {
        auto idx = space->index_of(label);
        if (!idx) throw DomainError("bet_act: unknown state label " + label);
        utils[*idx] = high_util;
    }
    return Act(space, std::move(utils), std::move(name));
}

/// Index-based overload, convenient for generated events.
inline Act bet_act(const StateSpacePtr& space, const std::vector<std::size_t>& event,
                   double high_util, double low_util, std::string name = "bet") {
    if (!space) throw DomainError("bet_act needs a state space");
    if (!(high_util > low_util))
        throw DomainError("a bet needs high_util > low_util");
    std::vector<double> utils(space->size(), low_util);
    for (std::size_t s : event) {
        if (s >= space->size()) throw DomainError("bet_act: state index out of range");
        utils[s] = high_util;
    }
    return Act(space, std::move(utils), std::move(name));
}

} // namespace robust_choice
