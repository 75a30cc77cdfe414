#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "fixtures.hpp"
#include "generators.hpp"
#include "hierdx/error.hpp"
#include "hierdx/functional_engine.hpp"
#include "hierdx/influence_diagram.hpp"

using namespace hierdx;

namespace {

bool has_kind(const std::vector<Diagnostic>& ds, const std::string& kind) {
  for (const auto& d : ds) {
    if (d.kind == kind) return true;
  }
  return false;
}

// Test {t}; CS uniform {a, b}; R reveals CS; replace_a costs 3, replace_b 4,
// probe 1, and 100 if the wrong element is replaced.
InfluenceDiagram two_test() {
  InfluenceDiagram d;
  d.add_decision("Test", {"t"}, {});
  d.add_chance("CS", {"a", "b"}, {}, {{0.5, 0.5}});
  d.add_chance("R", {"ra", "rb"}, {"CS"}, {{1, 0}, {0, 1}});
  d.add_decision("Treatment", {"replace_a", "replace_b"}, {"Test", "R"});
  d.add_value("V", {"Test", "Treatment", "CS"}, {4, 104, 105, 5});
  d.set_decision_order({"Test", "Treatment"});
  return d;
}

InfluenceDiagram no_chance() {
  InfluenceDiagram d;
  d.add_decision("X", {"x", "y"}, {});
  d.add_value("V", {"X"}, {2, 5});
  d.set_decision_order({"X"});
  return d;
}

InfluenceDiagram one_alternative() {
  InfluenceDiagram d;
  d.add_decision("X", {"only"}, {});
  d.add_value("V", {"X"}, {7.5});
  d.set_decision_order({"X"});
  return d;
}

}  // namespace

TEST_SUITE("influence_diagram") {
  TEST_CASE("minimal diagram validates clean") {
    InfluenceDiagram d;
    d.add_chance("C", {"c0", "c1"}, {}, {{0.3, 0.7}});
    d.add_value("V", {"C"}, {1, 2});
    CHECK(validate(d).empty());
  }

  TEST_CASE("unnormalized cpt row is reported") {
    InfluenceDiagram d;
    d.add_chance("C", {"c0", "c1"}, {}, {{0.3, 0.6}});
    d.add_value("V", {"C"}, {1, 2});
    const auto ds = validate(d);
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].kind == "CptRowNotNormalized");
    CHECK(ds[0].node == "C");
  }

  TEST_CASE("second decision forgetting the first is reported") {
    InfluenceDiagram d;
    d.add_chance("C", {"c0", "c1"}, {}, {{0.5, 0.5}});
    d.add_decision("D1", {"a", "b"}, {"C"});
    d.add_decision("D2", {"a", "b"}, {});
    d.add_value("V", {"D1", "D2", "C"}, {0, 1, 2, 3, 4, 5, 6, 7});
    d.set_decision_order({"D1", "D2"});
    CHECK(has_kind(validate(d), "NoForgettingViolation"));
  }

  TEST_CASE("other structural defects") {
    InfluenceDiagram cyc;
    cyc.add_chance("A", {"0", "1"}, {"B"}, {{1, 0}, {0, 1}});
    cyc.add_chance("B", {"0", "1"}, {"A"}, {{1, 0}, {0, 1}});
    cyc.add_value("V", {"A"}, {0, 1});
    CHECK(has_kind(validate(cyc), "Cycle"));

    InfluenceDiagram two_values = no_chance();
    two_values.add_value("W", {"X"}, {0, 0});
    CHECK(has_kind(validate(two_values), "ValueNodeCount"));

    InfluenceDiagram unknown;
    unknown.add_chance("A", {"0", "1"}, {"Ghost"}, {{1, 0}});
    unknown.add_value("V", {"A"}, {0, 1});
    CHECK(has_kind(validate(unknown), "UnknownParent"));

    InfluenceDiagram rows;
    rows.add_chance("A", {"0", "1"}, {}, {{1, 0}, {0, 1}});
    rows.add_value("V", {"A"}, {0, 1});
    CHECK(has_kind(validate(rows), "CptRowCount"));

    InfluenceDiagram vt;
    vt.add_chance("A", {"0", "1"}, {}, {{1, 0}});
    vt.add_value("V", {"A"}, {0});
    CHECK(has_kind(validate(vt), "ValueTableSize"));

    CHECK_THROWS_AS(evaluate(cyc), Error);
  }

  TEST_CASE("replace what the probe reveals") {
    const auto d = two_test();
    REQUIRE(validate(d).empty());
    const auto sol = evaluate(d);
    CHECK(sol.expected_cost == doctest::Approx(4.5).epsilon(1e-12));
    const std::string ra[] = {"t", "ra"};
    const std::string rb[] = {"t", "rb"};
    CHECK(sol.policy.choose(d, "Treatment", ra) == "replace_a");
    CHECK(sol.policy.choose(d, "Treatment", rb) == "replace_b");
    const auto oracle = enumerate_policies_evaluate(d);
    CHECK(std::abs(oracle.expected_cost - sol.expected_cost) < 1e-9);
    CHECK(policy_count(d) == 4);
  }

  TEST_CASE("deterministic choice without chance nodes") {
    const auto d = no_chance();
    const auto sol = evaluate(d);
    CHECK(sol.expected_cost == 2.0);
    CHECK(sol.policy.choose(d, "X", {}) == "x");
    CHECK(enumerate_policies_evaluate(d).expected_cost == 2.0);
  }

  TEST_CASE("single alternative") {
    const auto d = one_alternative();
    const auto sol = enumerate_policies_evaluate(d);
    CHECK(sol.expected_cost == 7.5);
    CHECK(sol.policy.choose(d, "X", {}) == "only");
    CHECK(evaluate(d).expected_cost == 7.5);
  }

  TEST_CASE("ties go to the first alternative") {
    InfluenceDiagram d;
    d.add_decision("X", {"p", "q"}, {});
    d.add_value("V", {"X"}, {3, 3});
    d.set_decision_order({"X"});
    CHECK(evaluate(d).policy.choose(d, "X", {}) == "p");
  }

  TEST_CASE("enumeration refuses oversized policy spaces") {
    CHECK_THROWS_AS(enumerate_policies_evaluate(two_test(), 3), Error);
    try {
      enumerate_policies_evaluate(two_test(), 3);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooLarge);
    }
  }

  TEST_CASE("evaluation agrees with the enumeration oracle on random diagrams") {
    testing::Rng rng(11);
    for (int i = 0; i < 60; ++i) {
      const auto d = testing::random_diagram(rng);
      REQUIRE(validate(d).empty());
      const auto fast = evaluate(d);
      const auto slow = enumerate_policies_evaluate(d);
      CHECK(std::abs(fast.expected_cost - slow.expected_cost) < 1e-9);
      CHECK(std::abs(policy_expected_cost(d, fast.policy) - fast.expected_cost) < 1e-9);
      CHECK(std::abs(policy_expected_cost(d, slow.policy) - slow.expected_cost) < 1e-9);
    }
  }

  TEST_CASE("op estimate by hand counts") {
    FactorGraph g;
    const auto a = g.add_variable("A", 2);
    g.factors = {{a}};
    CHECK(estimate_eval_ops(g) == 2);

    FactorGraph chain;
    const auto x = chain.add_variable("X", 2);
    const auto y = chain.add_variable("Y", 2);
    chain.factors = {{x}, {y, x}};
    CHECK(estimate_eval_ops(chain) == 6);

    FactorGraph extra = chain;
    const auto z = extra.add_variable("Z", 2);
    extra.factors.push_back({z});
    CHECK(estimate_eval_ops(extra) == estimate_eval_ops(chain) + 2);
  }

  TEST_CASE("disconnected binary node adds exactly two ops to a diagram") {
    auto d = two_test();
    const auto base = estimate_eval_ops(d);
    InfluenceDiagram e;
    for (const auto& n : d.nodes()) {
      if (n.kind == NodeKind::Chance) e.add_chance(n.id, n.labels, n.parents, n.cpt);
      if (n.kind == NodeKind::Decision) e.add_decision(n.id, n.labels, n.parents);
      if (n.kind == NodeKind::Value) e.add_value(n.id, n.parents, n.costs);
    }
    e.add_chance("Lonely", {"0", "1"}, {}, {{0.5, 0.5}});
    e.set_decision_order(d.decision_order());
    CHECK(estimate_eval_ops(e) == base + 2);
  }

  TEST_CASE("json round trip and errors") {
    const auto d = two_test();
    const auto text = diagram_to_json(d).dump();
    CHECK(parse_diagram(text) == d);
    const auto from_file = parse_diagram(diagram_to_json(d).dump(2));
    CHECK(evaluate(from_file).expected_cost == doctest::Approx(4.5));
    try {
      parse_diagram("");
      FAIL("expected a syntax error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SyntaxError);
    }
    try {
      parse_diagram(R"({"nodes": 3})");
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SchemaViolation);
    }
  }

  TEST_CASE("fixture diagram file") {
    const auto d = parse_diagram([] {
      std::ifstream in(testing::fixture_path("two_test_diagram.json"));
      return std::string(std::istreambuf_iterator<char>(in), {});
    }());
    CHECK(evaluate(d).expected_cost == doctest::Approx(4.5));
  }

  TEST_CASE("first functional model on the fixture probes P1 or P2") {
    const auto& kb = testing::paper_kb();
    NetValues observed{{"Y1", 1}, {"Y2", 1}};
    const auto inputs = testing::paper_inputs();
    const auto ctx = initialize_context(kb, inputs, observed);
    const auto ev = initial_evidence(kb, inputs, observed);
    ModelOptions opts;
    opts.evidence = &ev;
    const auto model = build_functional_id(ctx, kb, context_beliefs(ctx, kb, ev), opts);
    const auto sol = evaluate(model.diagram);
    const auto test = sol.policy.choose(model.diagram, "Test", {});
    CHECK((test == "P1" || test == "P2"));
    const auto& alts = model.diagram.at("Test").labels;
    CHECK(std::find(alts.begin(), alts.end(), "nothing") == alts.end());
    const auto oracle = enumerate_policies_evaluate(model.diagram);
    CHECK(std::abs(oracle.expected_cost - sol.expected_cost) < 1e-9);
  }
}
