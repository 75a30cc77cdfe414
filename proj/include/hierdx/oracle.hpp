#pragma once

// The engines' only channel to the device: a simulator or a technician.

#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "hierdx/device_simulator.hpp"
#include "hierdx/knowledge_base.hpp"

namespace hierdx {

class Oracle {
 public:
  virtual ~Oracle() = default;

  // True iff the testpoint's subsystem is ok.
  virtual bool probe_ok(const Testpoint& testpoint) = 0;
  // The technician opens a subsystem; its inspection cost is spent.
  virtual void expand(const HierarchyNode& subsystem) = 0;
  virtual void apply(const Treatment& treatment) = 0;
  virtual bool device_ok() = 0;
  virtual ChipInspection inspect_chip(const Chip& chip, double effort) = 0;
};

class SimulatorOracle final : public Oracle {
 public:
  explicit SimulatorOracle(DeviceSim& sim) : sim_(&sim) {}

  bool probe_ok(const Testpoint& testpoint) override;
  void expand(const HierarchyNode& subsystem) override;
  void apply(const Treatment& treatment) override;
  bool device_ok() override;
  ChipInspection inspect_chip(const Chip& chip, double effort) override;

  // Answers in the order they were given, for replay.
  struct Record {
    std::string question;  // "probe", "chip" or "device_ok"
    std::string subject;
    bool answer = false;
  };
  const std::vector<Record>& answers() const noexcept { return answers_; }

 private:
  DeviceSim* sim_;
  std::vector<Record> answers_;
};

enum class QuestionKind { Probe, Chip, DeviceOk };

const char* to_string(QuestionKind kind) noexcept;

struct Question {
  QuestionKind kind = QuestionKind::Probe;
  std::string subject;  // testpoint or chip id; empty for DeviceOk

  bool operator==(const Question&) const = default;
};

struct Answer {
  Question question;
  bool value = false;
  // Located pair for a positive chip inspection, if the technician gave it.
  std::optional<std::pair<int, int>> pins;
};

// Raised when a scripted oracle runs out of answers; carries the question.
class NeedAnswer : public std::exception {
 public:
  explicit NeedAnswer(Question q) : question_(std::move(q)) {}
  const Question& question() const noexcept { return question_; }
  const char* what() const noexcept override { return "oracle needs an answer"; }

 private:
  Question question_;
};

// Replays a fixed list of answers. Used for interactive sessions: the run is
// repeated from the start each time a new answer arrives.
class ScriptedOracle final : public Oracle {
 public:
  explicit ScriptedOracle(std::vector<Answer> answers) : answers_(std::move(answers)) {}

  bool probe_ok(const Testpoint& testpoint) override;
  void expand(const HierarchyNode&) override {}
  void apply(const Treatment& treatment) override { applied_.push_back(treatment); }
  bool device_ok() override;
  ChipInspection inspect_chip(const Chip& chip, double effort) override;

  std::size_t consumed() const noexcept { return next_; }
  const std::vector<Treatment>& applied() const noexcept { return applied_; }

 private:
  const Answer& next(const Question& q);

  std::vector<Answer> answers_;
  std::size_t next_ = 0;
  std::vector<Treatment> applied_;
};

}  // namespace hierdx
