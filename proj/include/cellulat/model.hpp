#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace cellulat {

using Tick = std::int64_t;

inline constexpr std::string_view kGlobalRegion = "global";

// Position of a declaration in DSL source. Never participates in structural
// equality: two models that differ only in layout compare equal.
struct SourceLoc {
  int line = 0;
  int column = 0;

  friend constexpr bool operator==(const SourceLoc&, const SourceLoc&) noexcept { return true; }
};

enum class LevelKind { Membrane, Cytosol, Nucleus, Organelle, Custom };

struct Level {
  std::string name;
  int rank = 0;
  LevelKind kind = LevelKind::Custom;
  SourceLoc loc;

  bool operator==(const Level&) const = default;
};

// A (level, region) cell of the blackboard. Every level implicitly carries the
// "global" region; other regions are free-form tags shared across levels.
struct Locus {
  std::string level;
  std::string region{kGlobalRegion};

  bool operator==(const Locus&) const = default;
  auto operator<=>(const Locus&) const = default;
};

enum class SpeciesKind { Messenger, Flag };

struct SignalSpecies {
  std::string name;
  SpeciesKind kind = SpeciesKind::Messenger;
  double decay = 0.0;
  SourceLoc loc;

  bool operator==(const SignalSpecies&) const = default;
};

struct Ligand {
  std::string name;
  SourceLoc loc;

  bool operator==(const Ligand&) const = default;
};

struct Initializer {
  std::string species;
  Locus locus;
  double quantity = 0.0;
  SourceLoc loc;

  bool operator==(const Initializer&) const = default;
};

enum class Comparator { Ge, Le, Gt, Lt, Eq };

inline bool compare(double lhs, Comparator cmp, double rhs) {
  switch (cmp) {
    case Comparator::Ge: return lhs >= rhs;
    case Comparator::Le: return lhs <= rhs;
    case Comparator::Gt: return lhs > rhs;
    case Comparator::Lt: return lhs < rhs;
    case Comparator::Eq: return lhs == rhs;
  }
  return false;
}

// Threshold test over a blackboard quantity or an external ligand amount.
struct Atom {
  enum class Source { Signal, Ligand };

  Source source = Source::Signal;
  std::string name;
  Locus locus;  // unused for ligand atoms
  Comparator cmp = Comparator::Ge;
  double threshold = 0.0;
  SourceLoc loc;

  bool operator==(const Atom&) const = default;

  static Atom signal(std::string species, Locus locus, Comparator cmp, double threshold) {
    return Atom{Source::Signal, std::move(species), std::move(locus), cmp, threshold, {}};
  }
  static Atom ligand(std::string name, Comparator cmp, double threshold) {
    return Atom{Source::Ligand, std::move(name), {}, cmp, threshold, {}};
  }
};

struct Condition {
  enum class Op { Atom, And, Or, Not };

  Op op = Op::Atom;
  cellulat::Atom atom;              // Op::Atom only
  std::vector<Condition> children;  // And/Or: >= 1, Not: exactly 1

  bool operator==(const Condition&) const = default;

  static Condition leaf(cellulat::Atom a) { return Condition{Op::Atom, std::move(a), {}}; }
  static Condition all_of(std::vector<Condition> c) { return Condition{Op::And, {}, std::move(c)}; }
  static Condition any_of(std::vector<Condition> c) { return Condition{Op::Or, {}, std::move(c)}; }
  static Condition negate(Condition c) { return Condition{Op::Not, {}, {std::move(c)}}; }
};

// A node is either an input (binarized atom) or an internal node driven by a
// truth table over other nodes. Table bit i corresponds to the input
// assignment whose binary encoding is i, first listed input most significant.
struct BoolNode {
  std::string name;
  std::optional<cellulat::Atom> input;
  std::vector<std::string> inputs;
  std::string table;
  SourceLoc loc;

  bool operator==(const BoolNode&) const = default;
};

struct BooleanNet {
  std::vector<BoolNode> nodes;
  std::string output;
  int sync_steps = 1;
  SourceLoc loc;

  bool operator==(const BooleanNet&) const = default;
};

using Trigger = std::variant<Condition, BooleanNet>;

enum class EffectKind { Produce, Consume, SetFlag };

struct Effect {
  EffectKind kind = EffectKind::Produce;
  std::string species;
  Locus locus;
  double amount = 0.0;  // flag value for SetFlag
  SourceLoc loc;

  bool operator==(const Effect&) const = default;
};

struct Emission {
  std::string ligand;
  double amount = 0.0;
  SourceLoc loc;

  bool operator==(const Emission&) const = default;
};

enum class AgentClass { Internal, Interface };

struct AgentDef {
  std::string id;
  AgentClass cls = AgentClass::Internal;
  Trigger trigger;
  std::vector<Effect> effects;
  std::vector<Emission> emissions;  // interface agents only
  int multiplicity = 1;
  int priority = 0;
  double firing_probability = 1.0;
  std::optional<std::string> region_tag;
  SourceLoc loc;

  bool operator==(const AgentDef&) const = default;
};

struct Stimulus {
  std::string ligand;
  double amount = 0.0;
  Tick from_tick = 0;
  Tick to_tick = 0;  // inclusive
  SourceLoc loc;

  bool operator==(const Stimulus&) const = default;
};

using StimulusSchedule = std::vector<Stimulus>;

struct ModelDef {
  std::string name;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<Level> levels;
  std::vector<SignalSpecies> species;
  std::vector<Ligand> ligands;
  std::vector<Initializer> initializers;
  StimulusSchedule stimuli;
  std::vector<AgentDef> agents;

  bool operator==(const ModelDef&) const = default;

  const Level* find_level(std::string_view n) const {
    auto it = std::find_if(levels.begin(), levels.end(), [&](const Level& l) { return l.name == n; });
    return it == levels.end() ? nullptr : &*it;
  }
  const SignalSpecies* find_species(std::string_view n) const {
    auto it = std::find_if(species.begin(), species.end(), [&](const SignalSpecies& s) { return s.name == n; });
    return it == species.end() ? nullptr : &*it;
  }
  const AgentDef* find_agent(std::string_view n) const {
    auto it = std::find_if(agents.begin(), agents.end(), [&](const AgentDef& a) { return a.id == n; });
    return it == agents.end() ? nullptr : &*it;
  }
  bool has_ligand(std::string_view n) const {
    return std::any_of(ligands.begin(), ligands.end(), [&](const Ligand& l) { return l.name == n; });
  }
  int rank_of(std::string_view level) const {
    const Level* l = find_level(level);
    return l ? l->rank : -1;
  }
};

template <typename F>
void for_each_atom(const Condition& c, F&& f) {
  if (c.op == Condition::Op::Atom) {
    f(c.atom);
    return;
  }
  for (const auto& child : c.children) for_each_atom(child, f);
}

// Visits every atom the agent senses, including boolean-net input nodes.
template <typename F>
void for_each_atom(const AgentDef& agent, F&& f) {
  if (const auto* cond = std::get_if<Condition>(&agent.trigger)) {
    for_each_atom(*cond, f);
    return;
  }
  for (const auto& node : std::get<BooleanNet>(agent.trigger).nodes)
    if (node.input) f(*node.input);
}

inline std::string_view to_string(LevelKind k) {
  switch (k) {
    case LevelKind::Membrane: return "membrane";
    case LevelKind::Cytosol: return "cytosol";
    case LevelKind::Nucleus: return "nucleus";
    case LevelKind::Organelle: return "organelle";
    case LevelKind::Custom: return "custom";
  }
  return "custom";
}

inline std::optional<LevelKind> level_kind_from(std::string_view s) {
  for (auto k : {LevelKind::Membrane, LevelKind::Cytosol, LevelKind::Nucleus, LevelKind::Organelle, LevelKind::Custom})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline std::string_view to_string(SpeciesKind k) { return k == SpeciesKind::Flag ? "flag" : "messenger"; }

inline std::string_view to_string(Comparator c) {
  switch (c) {
    case Comparator::Ge: return ">=";
    case Comparator::Le: return "<=";
    case Comparator::Gt: return ">";
    case Comparator::Lt: return "<";
    case Comparator::Eq: return "=";
  }
  return "=";
}

inline std::string_view to_string(EffectKind k) {
  switch (k) {
    case EffectKind::Produce: return "produce";
    case EffectKind::Consume: return "consume";
    case EffectKind::SetFlag: return "set";
  }
  return "produce";
}

inline std::string_view to_string(AgentClass c) { return c == AgentClass::Interface ? "interface" : "internal"; }

inline std::string to_string(const Locus& l) { return l.level + "/" + l.region; }

}  // namespace cellulat
