#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cellulat/blackboard.hpp"
#include "cellulat/model.hpp"
#include "cellulat/rng.hpp"

namespace cellulat {

// Ligand amounts present in the external medium during the current tick.
class StimulusView {
 public:
  StimulusView() = default;
  explicit StimulusView(std::map<std::string, double, std::less<>> amounts) : amounts_(std::move(amounts)) {}

  double amount(std::string_view ligand) const {
    auto it = amounts_.find(ligand);
    return it == amounts_.end() ? 0.0 : it->second;
  }
  bool active(std::string_view ligand) const { return amount(ligand) > 0.0; }
  const std::map<std::string, double, std::less<>>& amounts() const { return amounts_; }

 private:
  std::map<std::string, double, std::less<>> amounts_;
};

inline bool holds(const Atom& atom, const Blackboard& board, const StimulusView& stimuli) {
  const double value = atom.source == Atom::Source::Ligand ? stimuli.amount(atom.name)
                                                           : board.read(atom.name, atom.locus);
  return compare(value, atom.cmp, atom.threshold);
}

inline bool evaluate(const Condition& c, const Blackboard& board, const StimulusView& stimuli) {
  switch (c.op) {
    case Condition::Op::Atom:
      return holds(c.atom, board, stimuli);
    case Condition::Op::And:
      for (const auto& child : c.children)
        if (!evaluate(child, board, stimuli)) return false;
      return true;
    case Condition::Op::Or:
      for (const auto& child : c.children)
        if (evaluate(child, board, stimuli)) return true;
      return false;
    case Condition::Op::Not:
      return !evaluate(c.children.front(), board, stimuli);
  }
  return false;
}

// Synchronous update: inputs are clamped to their binarized atoms, internal
// nodes start at 0, and all internal nodes update together sync_steps times.
inline bool evaluate(const BooleanNet& net, const Blackboard& board, const StimulusView& stimuli) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) index.emplace(net.nodes[i].name, i);

  std::vector<bool> state(net.nodes.size(), false);
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (net.nodes[i].input) state[i] = holds(*net.nodes[i].input, board, stimuli);

  for (int step = 0; step < net.sync_steps; ++step) {
    std::vector<bool> next = state;
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
      const BoolNode& node = net.nodes[i];
      if (node.input) continue;
      std::size_t row = 0;
      for (const auto& in : node.inputs) row = (row << 1) | (state[index.at(in)] ? 1u : 0u);
      next[i] = node.table.at(row) == '1';
    }
    state = std::move(next);
  }
  return state[index.at(net.output)];
}

inline bool evaluate_condition(const AgentDef& agent, const Blackboard& board, const StimulusView& stimuli) {
  if (const auto* cond = std::get_if<Condition>(&agent.trigger)) return evaluate(*cond, board, stimuli);
  return evaluate(std::get<BooleanNet>(agent.trigger), board, stimuli);
}

enum class SkipReason { ConditionFalse, ConsumeUnsatisfiable, ProbabilityDraw };

inline std::string_view to_string(SkipReason r) {
  switch (r) {
    case SkipReason::ConditionFalse: return "condition_false";
    case SkipReason::ConsumeUnsatisfiable: return "consume_unsatisfiable";
    case SkipReason::ProbabilityDraw: return "probability_draw";
  }
  return "condition_false";
}

struct FiringOutcome {
  bool fired = false;
  std::optional<SkipReason> skip_reason;
  std::vector<WriteEvent> events;

  bool operator==(const FiringOutcome&) const = default;
};

// One activation of the agent's action part. The caller has already seen the
// condition hold. Consumes are checked together before anything is written,
// so either every effect lands or none does. `attenuation` scales produce and
// consume amounts.
inline FiringOutcome fire(const AgentDef& agent, Blackboard& board, SeededRng& rng, double attenuation = 1.0) {
  if (!rng.bernoulli(agent.firing_probability)) return {false, SkipReason::ProbabilityDraw, {}};

  std::map<SignalKey, double> demand;
  for (const auto& e : agent.effects)
    if (e.kind == EffectKind::Consume) demand[SignalKey{e.species, e.locus}] += e.amount * attenuation;
  for (const auto& [key, amount] : demand)
    if (board.read(key.species, key.locus) < amount) return {false, SkipReason::ConsumeUnsatisfiable, {}};

  FiringOutcome out{true, std::nullopt, {}};
  for (const auto& e : agent.effects)
    if (e.kind == EffectKind::Consume)
      out.events.push_back(board.apply(agent.id, e.species, e.locus, WriteKind::Remove, e.amount * attenuation));
  for (const auto& e : agent.effects) {
    if (e.kind == EffectKind::Produce)
      out.events.push_back(board.apply(agent.id, e.species, e.locus, WriteKind::Add, e.amount * attenuation));
    else if (e.kind == EffectKind::SetFlag)
      out.events.push_back(board.apply(agent.id, e.species, e.locus, WriteKind::Set, e.amount));
  }
  return out;
}

// Encapsulated copies of the same component: up to `multiplicity` firings in
// sequence, re-checking the condition before each. Stops at the first failed
// condition or unsatisfiable consume (a repeat attempt would see the same
// board); a failed probability draw only skips that copy.
inline std::vector<FiringOutcome> fire_multiple(const AgentDef& agent, Blackboard& board, const StimulusView& stimuli,
                                                SeededRng& rng, double attenuation = 1.0) {
  std::vector<FiringOutcome> outcomes;
  for (int i = 0; i < agent.multiplicity; ++i) {
    if (!evaluate_condition(agent, board, stimuli)) {
      outcomes.push_back({false, SkipReason::ConditionFalse, {}});
      break;
    }
    outcomes.push_back(fire(agent, board, rng, attenuation));
    if (outcomes.back().skip_reason == SkipReason::ConsumeUnsatisfiable) break;
  }
  return outcomes;
}

struct ExternalEmission {
  std::string agent;
  std::string ligand;
  double amount = 0.0;

  bool operator==(const ExternalEmission&) const = default;
};

// Secretions into the external medium. Emissions never touch the blackboard.
inline std::vector<ExternalEmission> emit_external(const AgentDef& agent, const Blackboard& board,
                                                   const StimulusView& stimuli) {
  std::vector<ExternalEmission> out;
  if (agent.cls != AgentClass::Interface || agent.emissions.empty()) return out;
  if (!evaluate_condition(agent, board, stimuli)) return out;
  for (const auto& e : agent.emissions) out.push_back({agent.id, e.ligand, e.amount});
  return out;
}

struct SensedInputs {
  std::set<SignalKey> signals;
  std::set<std::string> ligands;

  bool operator==(const SensedInputs&) const = default;
};

inline SensedInputs sensed_inputs(const AgentDef& agent) {
  SensedInputs in;
  for_each_atom(agent, [&](const Atom& a) {
    if (a.source == Atom::Source::Ligand)
      in.ligands.insert(a.name);
    else
      in.signals.insert(SignalKey{a.name, a.locus});
  });
  return in;
}

}  // namespace cellulat
