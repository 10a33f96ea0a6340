#include <doctest.h>

#include <cmath>

#include "robust_choice/io.hpp"
#include "support/instances.hpp"

using namespace robust_choice;

namespace {

const char* kMinimalDoc = R"({
  "schema_version": "1",
  "states": ["rain", "shine"],
  "models": {"base": [0.5, 0.5]},
  "structured_set": {"models": ["base"], "hull_mode": "extreme_points_only"},
  "divergence": {"kind": "relative_entropy", "lambda": 1.0},
  "acts": {"umbrella": [1.0, 0.0]}
})";

std::string with_replacement(std::string text, const std::string& from, const std::string& to) {
    return text.replace(text.find(from), from.size(), to);
}

} // namespace

TEST_CASE("minimal document parses into a working problem") {
    const auto doc = io::ProblemDocument::parse(kMinimalDoc);
    CHECK(doc.states == std::vector<std::string>{"rain", "shine"});
    CHECK(doc.structured_set == std::vector<std::string>{"base"});
    CHECK(doc.lambda == 1.0);

    const DecisionProblem problem = doc.to_problem();
    CHECK(problem.acts().size() == 1);
    CHECK(problem.model_set().size() == 1);
    CHECK(problem.find_act("umbrella") != nullptr);
}

TEST_CASE("weights inside tolerance are renormalized") {
    const auto doc = io::ProblemDocument::parse(
        with_replacement(kMinimalDoc, "[0.5, 0.5]", "[0.5, 0.5000000001]"));
    const DecisionProblem problem = doc.to_problem();
    const Model& q = problem.model_set()[0];
    CHECK(q[0] + q[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("validation errors") {
    SUBCASE("negative lambda") {
        CHECK_THROWS_AS(
            io::ProblemDocument::parse(with_replacement(kMinimalDoc, "\"lambda\": 1.0",
                                                        "\"lambda\": -1")),
            ValidationError);
    }
    SUBCASE("zero lambda") {
        CHECK_THROWS_AS(io::ProblemDocument::parse(with_replacement(
                            kMinimalDoc, "\"lambda\": 1.0", "\"lambda\": 0")),
                        ValidationError);
    }
    SUBCASE("negative weight") {
        CHECK_THROWS_AS(io::ProblemDocument::parse(with_replacement(
                            kMinimalDoc, "[0.5, 0.5]", "[1.5, -0.5]")),
                        ValidationError);
    }
    SUBCASE("weights too far from one") {
        CHECK_THROWS_AS(io::ProblemDocument::parse(with_replacement(
                            kMinimalDoc, "[0.5, 0.5]", "[0.5, 0.6]")),
                        ValidationError);
    }
    SUBCASE("unknown model reference") {
        CHECK_THROWS_AS(io::ProblemDocument::parse(with_replacement(
                            kMinimalDoc, "\"models\": [\"base\"]", "\"models\": [\"ghost\"]")),
                        ValidationError);
    }
    SUBCASE("act with the wrong arity") {
        CHECK_THROWS_AS(io::ProblemDocument::parse(with_replacement(
                            kMinimalDoc, "[1.0, 0.0]", "[1.0, 0.0, 2.0]")),
                        ValidationError);
    }
    SUBCASE("unsupported schema version") {
        CHECK_THROWS_AS(io::ProblemDocument::parse(with_replacement(
                            kMinimalDoc, "\"schema_version\": \"1\"",
                            "\"schema_version\": \"2\"")),
                        ValidationError);
    }
    SUBCASE("indicator with a numeric lambda") {
        const auto text = with_replacement(
            kMinimalDoc, "{\"kind\": \"relative_entropy\", \"lambda\": 1.0}",
            "{\"kind\": \"indicator\", \"lambda\": 3}");
        CHECK_THROWS_AS(io::ProblemDocument::parse(text), ValidationError);
    }
}

TEST_CASE("parse errors carry JSON-pointer paths") {
    SUBCASE("malformed JSON") {
        CHECK_THROWS_AS(io::ProblemDocument::parse("{ not json"), ParseError);
    }
    SUBCASE("missing divergence") {
        const std::string text = with_replacement(kMinimalDoc, "\"divergence\"", "\"nope\"");
        try {
            io::ProblemDocument::parse(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.path() == "/divergence");
        }
    }
    SUBCASE("wrong type for states") {
        const std::string text =
            with_replacement(kMinimalDoc, "[\"rain\", \"shine\"]", "\"rain\"");
        try {
            io::ProblemDocument::parse(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.path() == "/states");
        }
    }
    SUBCASE("non-numeric weight has an indexed path") {
        const std::string text = with_replacement(kMinimalDoc, "[0.5, 0.5]", "[0.5, \"x\"]");
        try {
            io::ProblemDocument::parse(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.path() == "/models/base/1");
        }
    }
    SUBCASE("unknown hull mode") {
        const std::string text =
            with_replacement(kMinimalDoc, "\"extreme_points_only\"", "\"sphere\"");
        try {
            io::ProblemDocument::parse(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.path() == "/structured_set/hull_mode");
        }
    }
}

TEST_CASE("lambda sentinel round trip") {
    const auto doc = io::ProblemDocument::parse(
        with_replacement(kMinimalDoc, "\"lambda\": 1.0", "\"lambda\": \"inf\""));
    CHECK(is_infinite(doc.lambda));
    CHECK(doc.to_problem().divergence().is_neutral());
    CHECK(doc.emit()["divergence"]["lambda"] == "inf");
}

TEST_CASE("emit then parse preserves every semantic field") {
    const char* richer = R"({
      "schema_version": "1",
      "states": ["a", "b", "c"],
      "models": {
        "p": [0.123456789012345, 0.276543210987655, 0.6],
        "q": [0.2, 0.3, 0.5]
      },
      "structured_set": {"models": ["q", "p"], "hull_mode": "convex_hull"},
      "divergence": {"kind": "gini", "lambda": 0.25},
      "acts": {"f": [1.25, -2.5, 0.125], "g": [0, 0, 0]}
    })";
    const auto doc = io::ProblemDocument::parse(richer);
    const auto round_tripped = io::ProblemDocument::parse(doc.emit().dump());

    CHECK(round_tripped.states == doc.states);
    CHECK(round_tripped.structured_set == doc.structured_set);
    CHECK(round_tripped.hull_mode == doc.hull_mode);
    CHECK(round_tripped.divergence_kind == doc.divergence_kind);
    CHECK(round_tripped.lambda == doc.lambda);
    REQUIRE(round_tripped.models.size() == doc.models.size());
    for (std::size_t i = 0; i < doc.models.size(); ++i) {
        CHECK(round_tripped.models[i].first == doc.models[i].first);
        // weights survive to (beyond) 15 significant digits
        for (std::size_t s = 0; s < doc.models[i].second.size(); ++s)
            CHECK(round_tripped.models[i].second[s] == doc.models[i].second[s]);
    }
    REQUIRE(round_tripped.acts.size() == doc.acts.size());
    for (std::size_t i = 0; i < doc.acts.size(); ++i)
        CHECK(round_tripped.acts[i].second == doc.acts[i].second);

    // the structured-set order fixes model indices: "q" is index 0 here
    const DecisionProblem problem = doc.to_problem();
    CHECK(problem.model_set()[0][0] == doctest::Approx(0.2));
}

TEST_CASE("significant-digit formatting") {
    CHECK(io::format_sig(0.37988549304172247, 12) == "0.379885493042");
    CHECK(io::round_sig(0.37988549304172247, 12) == doctest::Approx(0.379885493042).epsilon(1e-15));
    CHECK(io::format_sig(1.0, 12) == "1");
    CHECK(io::format_sig(-2.5e-7, 12) == "-2.5e-07");
}
