#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "generators.hpp"
#include "hierdx/error.hpp"
#include "hierdx/knowledge_base.hpp"

using namespace hierdx;
using nlohmann::json;

namespace {

bool has_kind(const std::vector<Diagnostic>& ds, const std::string& kind) {
  for (const auto& d : ds) {
    if (d.kind == kind) return true;
  }
  return false;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::NotFound;
}

json fixture_json() {
  std::ifstream in(testing::fixture_path("paper_y1.json"));
  return json::parse(in);
}

HierarchyNode leaf(std::string id, double repl) {
  HierarchyNode n;
  n.id = std::move(id);
  n.replacement_cost = repl;
  return n;
}

HierarchyNode sub(std::string id, double insp, double repl, std::vector<std::string> kids) {
  HierarchyNode n;
  n.id = std::move(id);
  n.kind = ElementKind::Subsystem;
  n.inspection_cost = insp;
  n.replacement_cost = repl;
  n.children = std::move(kids);
  return n;
}

// root (insp 2) -> s1 (insp 3, repl 12; leaves 10 and 4), leaf 20.
KnowledgeBase cost_tree() {
  KbData d;
  d.root = "R";
  d.elements = {sub("R", 2, 50, {"s1", "L3"}), sub("s1", 3, 12, {"L1", "L2"}), leaf("L1", 10),
                leaf("L2", 4), leaf("L3", 20)};
  return KnowledgeBase(d);
}

}  // namespace

TEST_SUITE("knowledge_base") {
  TEST_CASE("fixture hierarchy") {
    const auto& kb = testing::paper_kb();
    CHECK(kb.root() == "D");
    CHECK(kb.element("D").children == std::vector<std::string>{"Y1-sub", "Y2-sub"});
    CHECK(kb.element("Y1-sub").kind == ElementKind::Subsystem);
    CHECK(kb.element("Y1-sub").children == std::vector<std::string>{"P1-sub", "P2-sub", "OR1"});
    CHECK(kb.tree_height() == 3);
    CHECK(kb.height("Y1-sub") == 2);
    CHECK(*kb.parent("G1") == "P1-sub");
    CHECK_FALSE(kb.parent("D").has_value());
    CHECK(kb.depth("G3") == 3);
    CHECK(kb.in_subtree("G4", "Y1-sub"));
    CHECK_FALSE(kb.in_subtree("G5", "Y1-sub"));
    CHECK(kb.components_in("P2-sub") == std::vector<std::string>{"G3", "G4"});
    CHECK(kb.subtree_prior_mass("Y1-sub") == doctest::Approx(0.05));
    CHECK(kb.fault_penalty() == doctest::Approx(18.0));
  }

  TEST_CASE("fixture validates clean") { CHECK(validate_kb(testing::paper_kb()).empty()); }

  TEST_CASE("parse errors") {
    CHECK(code_of([] { parse_kb(""); }) == ErrorCode::SyntaxError);
    CHECK(code_of([] { parse_kb("{\"hierarchy\": 3}"); }) == ErrorCode::SchemaViolation);
    auto doc = fixture_json();
    doc["behaviors"][0]["inputs"][0] = "NOWHERE";
    CHECK(code_of([&] { kb_from_json(doc); }) == ErrorCode::UnknownReference);
    auto doc2 = fixture_json();
    doc2["testpoints"][0]["net"] = "NOWHERE";
    CHECK(code_of([&] { kb_from_json(doc2); }) == ErrorCode::UnknownReference);
    CHECK(code_of([] { load_kb_file("/nonexistent/kb.json"); }) == ErrorCode::FileNotFound);
  }

  TEST_CASE("component with children is reported") {
    auto d = testing::paper_kb().data();
    for (auto& e : d.elements) {
      if (e.id == "Y2-sub") e.kind = ElementKind::Component;
    }
    CHECK(has_kind(validate_kb(KnowledgeBase(d)), "ComponentNotLeaf"));
  }

  TEST_CASE("two drivers on one net are reported") {
    auto d = testing::paper_kb().data();
    for (auto& b : d.behaviors) {
      if (b.component == "G5") b.output = "Y1";
    }
    CHECK(has_kind(validate_kb(KnowledgeBase(d)), "MultipleDrivers"));
  }

  TEST_CASE("other consistency checks") {
    auto d = testing::paper_kb().data();
    d.elements[1].replacement_cost = -1;
    CHECK(has_kind(validate_kb(KnowledgeBase(d)), "NegativeCost"));

    auto p = testing::paper_kb().data();
    for (auto& e : p.elements) {
      if (e.id == "G1") e.failure_prior = 1.5;
    }
    CHECK(has_kind(validate_kb(KnowledgeBase(p)), "PriorOutOfRange"));

    auto a = testing::paper_kb().data();
    a.behaviors[0].inputs.push_back("X1");
    CHECK(has_kind(validate_kb(KnowledgeBase(a)), "GateArity"));

    auto c = testing::paper_kb().data();
    c.behaviors[0].inputs = {"P1"};  // G1 reads G2's output, G2 reads G1's
    CHECK(has_kind(validate_kb(KnowledgeBase(c)), "CombinationalCycle"));

    auto b = testing::paper_kb().data();
    b.chips[0].bridge_priors.pop_back();
    CHECK(has_kind(validate_kb(KnowledgeBase(b)), "BridgePriorCount"));

    auto t = testing::paper_kb().data();
    for (auto& e : t.elements) {
      if (e.id == "P2-sub") e.output_testpoint.reset();
    }
    CHECK(has_kind(validate_kb(KnowledgeBase(t)), "MissingOutputTestpoint"));
  }

  TEST_CASE("golden simulation on the fixture") {
    const auto& kb = testing::paper_kb();
    const auto v = golden_simulate(kb, testing::paper_inputs());
    CHECK(v.at("Y1") == 0);
    CHECK(v.at("Y2") == 1);
    CHECK(v.at("P1") == 0);
    CHECK(v.at("P2") == 0);
    CHECK(v.at("N1") == 0);
    CHECK(v.at("N3") == 0);
  }

  TEST_CASE("lone AND gate") {
    KbData d;
    d.root = "G";
    d.elements = {leaf("G", 1)};
    d.behaviors = {{"G", GateType::And, {"A", "B"}, "Z"}};
    d.nets = {{"A", "B"}, {"Z"}};
    const KnowledgeBase kb(d);
    CHECK(golden_simulate(kb, {{"A", 0}, {"B", 0}}).at("Z") == 0);
    CHECK(golden_simulate(kb, {{"A", 1}, {"B", 1}}).at("Z") == 1);
    CHECK(code_of([&] { golden_simulate(kb, {{"A", 1}}); }) == ErrorCode::MissingInput);
  }

  TEST_CASE("input vectors") {
    const auto& kb = testing::paper_kb();
    const auto v = parse_input_vector(kb, "0,1,1,1,1");
    CHECK(v.at("X1") == 0);
    CHECK(v.at("X5") == 1);
    CHECK(code_of([&] { parse_input_vector(kb, "0,1"); }) == ErrorCode::MissingInput);
    CHECK(code_of([&] { parse_input_vector(kb, "0,1,2,1,1"); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("fan-in queries") {
    const auto& kb = testing::paper_kb();
    CHECK(kb.fanin_components("P1") == std::set<std::string>{"G1", "G2"});
    CHECK(kb.fanin_components("Y1") == std::set<std::string>{"G1", "G2", "G3", "G4", "OR1"});
    CHECK(kb.fanin_nets("N1") == std::set<std::string>{"N1", "X2"});
  }

  TEST_CASE("complete repair cost") {
    KbData d;
    d.root = "s";
    d.elements = {sub("s", 2, 30, {"a", "b"}), leaf("a", 5), leaf("b", 9)};
    CHECK(repair_cost_complete(KnowledgeBase(d), "s") == 7);
    const auto kb = cost_tree();
    CHECK(repair_cost_complete(kb, "R") == 9);
    CHECK(repair_cost_complete(kb, "L1") == 10);
    CHECK(repair_cost_complete(testing::paper_kb(), "P1-sub") == 7);
  }

  TEST_CASE("heuristic repair cost") {
    const auto kb = cost_tree();
    CHECK(repair_cost_heuristic(kb, "R", 1) == 14);
    CHECK(repair_cost_heuristic(kb, "R", 2) == 9);
    CHECK(repair_cost_heuristic(kb, "L3", 1) == 20);
    CHECK(code_of([&] { repair_cost_heuristic(kb, "R", 0); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("repair costs agree with path enumeration on random trees") {
    testing::Rng rng(5);
    for (int i = 0; i < 30; ++i) {
      const auto kb = testing::random_hierarchy(rng, 50);
      const auto& root = kb.root();
      CHECK(repair_cost_complete(kb, root) == testing::brute_force_repair_cost(kb, root));
      if (kb.tree_height() > 0) {
        CHECK(repair_cost_heuristic(kb, root, kb.tree_height()) == repair_cost_complete(kb, root));
      }
    }
  }

  TEST_CASE("serialization round trip") {
    const auto& kb = testing::paper_kb();
    const auto again = parse_kb(serialize_kb(kb));
    CHECK(again == kb);
    CHECK(kb_to_json(again) == kb_to_json(kb));
  }
}
