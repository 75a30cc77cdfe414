#pragma once

// Random instances for property tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hierdx/device_simulator.hpp"
#include "hierdx/influence_diagram.hpp"
#include "hierdx/knowledge_base.hpp"

namespace hierdx::testing {

using Rng = std::mt19937_64;

// Valid diagram with up to `max_decisions` decisions, `max_chance` chance
// nodes and domains of size 2..max_domain. No-forgetting holds by
// construction.
InfluenceDiagram random_diagram(Rng& rng, std::size_t max_decisions = 2, std::size_t max_chance = 4,
                                std::size_t max_domain = 3);

// Hierarchy-only knowledge base with at most `max_nodes` elements and random
// inspection/replacement costs. Not a valid device; for cost recursions.
KnowledgeBase random_hierarchy(Rng& rng, std::size_t max_nodes);

// Valid device: a fanout-free gate tree whose hierarchy mirrors the netlist,
// every non-root element carrying an output testpoint, at most `max_elements`
// elements and at most kExhaustiveInputLimit primary inputs. Chips join
// nets that are not in each other's fan-in.
KnowledgeBase random_device(Rng& rng, std::size_t max_elements = 30);

// A single fault on `kb` that changes some output on the default vectors.
FaultSpec random_detectable_fault(Rng& rng, const KnowledgeBase& kb);

// Minimum over every path from `node` down to a leaf of the inspection costs
// of the subsystems on the path plus the leaf's replacement cost, by explicit
// path enumeration.
double brute_force_repair_cost(const KnowledgeBase& kb, const std::string& node);

}  // namespace hierdx::testing
