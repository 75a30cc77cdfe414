#pragma once

// Append-only event log of a diagnosis run. The cost ledger is derived from
// the events as they are appended, so the two never disagree.

#include <string>
#include <vector>

#include <json.hpp>

#include "hierdx/device_simulator.hpp"

namespace hierdx {

enum class Pathway { Functional, Bridge };

const char* to_string(Pathway p) noexcept;  // "FL" / "BFL"

class Transcript {
 public:
  void pathway_chosen(Pathway p, double ev_fl, double ev_bfl, double p_fl);
  void model_built(nlohmann::ordered_json summary);
  void probe(const std::string& testpoint, bool ok, double cost);
  void treatment(const Treatment& t);
  void expanded(const std::string& subsystem, double cost);
  void chip_inspected(const std::string& chip, bool found, double cost);
  void component_failed(Pathway p, const std::string& node);
  void device_ok();
  void assumption_violation(const std::string& reason);

  const std::vector<nlohmann::ordered_json>& events() const noexcept { return events_; }
  const CostLedger& ledger() const noexcept { return ledger_; }
  bool terminated() const noexcept { return terminated_; }
  std::size_t count(const std::string& event) const;

  // One JSON object per line.
  std::string to_jsonl() const;

 private:
  void append(nlohmann::ordered_json event);

  std::vector<nlohmann::ordered_json> events_;
  CostLedger ledger_;
  bool terminated_ = false;
};

nlohmann::ordered_json ledger_to_json(const CostLedger& ledger);

}  // namespace hierdx
