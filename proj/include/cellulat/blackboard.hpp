#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cellulat/error.hpp"
#include "cellulat/model.hpp"

namespace cellulat {

enum class WriteKind { Add, Remove, Set };

inline std::string_view to_string(WriteKind k) {
  switch (k) {
    case WriteKind::Add: return "add";
    case WriteKind::Remove: return "remove";
    case WriteKind::Set: return "set";
  }
  return "set";
}

struct WriteEvent {
  Tick tick = 0;
  std::string actor;  // agent id, or "stimulus", "lesion", "decay"
  std::string species;
  Locus locus;
  WriteKind kind = WriteKind::Add;
  double delta_or_value = 0.0;
  double resulting_quantity = 0.0;
  std::uint64_t seq = 0;  // restarts at 0 every tick

  bool operator==(const WriteEvent&) const = default;
};

struct SignalEntry {
  std::string species;
  Locus locus;
  double quantity = 0.0;

  bool operator==(const SignalEntry&) const = default;
};

struct BlackboardSnapshot {
  Tick tick = 0;
  std::vector<SignalEntry> entries;  // nonzero only, ordered by (species, level, region)
  std::uint64_t event_count = 0;

  bool operator==(const BlackboardSnapshot&) const = default;
};

struct SignalKey {
  std::string species;
  Locus locus;

  auto operator<=>(const SignalKey&) const = default;
  bool operator==(const SignalKey&) const = default;
};

// The cell's internal medium: signal quantities per (species, locus) plus the
// log of every write. Undeclared pairs read as zero.
class Blackboard {
 public:
  explicit Blackboard(const ModelDef& model) {
    for (const auto& s : model.species) species_.emplace(s.name, SpeciesInfo{s.kind, s.decay});
    for (const auto& l : model.levels) levels_.insert(l.name);
    for (const auto& init : model.initializers) {
      check_declared(init.species, init.locus);
      SignalKey key{init.species, init.locus};
      if (values_.count(key))
        throw Error(ErrorCode::DuplicateInitializer, init.species + " at " + to_string(init.locus));
      if (init.quantity < 0) throw Error(ErrorCode::NegativeQuantity, init.species);
      if (is_flag(init.species) && init.quantity != 0.0 && init.quantity != 1.0)
        throw Error(ErrorCode::FlagDomain, init.species);
      values_.emplace(std::move(key), init.quantity);
    }
    initial_ = values_;
  }

  double read(std::string_view species, const Locus& locus) const {
    check_declared(species, locus);
    return raw(species, locus);
  }

  // Applies one write and appends it to the log. Failed writes leave the
  // board and the log untouched.
  WriteEvent apply(std::string_view actor, std::string_view species, const Locus& locus, WriteKind kind,
                   double amount) {
    check_declared(species, locus);
    if (!std::isfinite(amount)) throw Error(ErrorCode::InvalidArgument, "non-finite amount");
    const bool flag = is_flag(species);
    const double current = raw(species, locus);
    double next = current;
    switch (kind) {
      case WriteKind::Add:
      case WriteKind::Remove:
        if (flag) throw Error(ErrorCode::FlagDomain, std::string(species) + " only accepts set");
        if (amount < 0) throw Error(ErrorCode::NegativeQuantity, std::string(species));
        if (kind == WriteKind::Add) {
          next = current + amount;
        } else {
          if (amount > current)
            throw Error(ErrorCode::InsufficientQuantity, std::string(species) + " at " + to_string(locus));
          next = current - amount;
        }
        break;
      case WriteKind::Set:
        if (amount < 0) throw Error(ErrorCode::NegativeQuantity, std::string(species));
        if (flag && amount != 0.0 && amount != 1.0) throw Error(ErrorCode::FlagDomain, std::string(species));
        next = amount;
        break;
    }
    values_[SignalKey{std::string(species), locus}] = next;
    WriteEvent ev{tick_, std::string(actor), std::string(species), locus, kind, amount, next, next_seq_++};
    log_.push_back(ev);
    return ev;
  }

  // Exponential decay of every messenger with a nonzero rate. Flags never decay.
  std::vector<WriteEvent> apply_decay() {
    std::vector<WriteEvent> out;
    for (const auto& [key, q] : values_) {
      if (q <= 0.0) continue;
      const auto& info = species_.find(key.species)->second;
      if (info.kind == SpeciesKind::Flag || info.decay <= 0.0) continue;
      out.push_back(WriteEvent{tick_, "decay", key.species, key.locus, WriteKind::Set, q * (1.0 - info.decay), 0.0, 0});
    }
    // Collected first so the map is not mutated while being walked.
    for (auto& ev : out) ev = apply("decay", ev.species, ev.locus, WriteKind::Set, ev.delta_or_value);
    return out;
  }

  BlackboardSnapshot snapshot() const {
    BlackboardSnapshot snap{tick_, {}, log_.size()};
    for (const auto& [key, q] : values_)
      if (q != 0.0) snap.entries.push_back(SignalEntry{key.species, key.locus, q});
    return snap;
  }

  void begin_tick(Tick t) {
    tick_ = t;
    next_seq_ = 0;
  }

  Tick tick() const { return tick_; }
  const std::vector<WriteEvent>& log() const { return log_; }
  std::uint64_t event_count() const { return log_.size(); }

  // Every pair ever written or initialized, zeros included.
  const std::map<SignalKey, double>& quantities() const { return values_; }
  const std::map<SignalKey, double>& initial_quantities() const { return initial_; }

  bool is_flag(std::string_view species) const {
    auto it = species_.find(species);
    return it != species_.end() && it->second.kind == SpeciesKind::Flag;
  }

  // Restores a serialized state. Used by replay and session forking.
  void restore(Tick tick, std::map<SignalKey, double> values, std::vector<WriteEvent> log) {
    tick_ = tick;
    values_ = std::move(values);
    log_ = std::move(log);
    next_seq_ = 0;
    for (auto it = log_.rbegin(); it != log_.rend() && it->tick == tick_; ++it)
      next_seq_ = std::max(next_seq_, it->seq + 1);
  }

 private:
  struct SpeciesInfo {
    SpeciesKind kind;
    double decay;
  };

  void check_declared(std::string_view species, const Locus& locus) const {
    if (!species_.count(species)) throw Error(ErrorCode::UnknownSpecies, std::string(species));
    if (!levels_.count(locus.level)) throw Error(ErrorCode::UnknownLevel, locus.level);
  }

  double raw(std::string_view species, const Locus& locus) const {
    auto it = values_.find(SignalKey{std::string(species), locus});
    return it == values_.end() ? 0.0 : it->second;
  }

  std::map<std::string, SpeciesInfo, std::less<>> species_;
  std::set<std::string, std::less<>> levels_;
  std::map<SignalKey, double> values_;
  std::map<SignalKey, double> initial_;
  std::vector<WriteEvent> log_;
  Tick tick_ = 0;
  std::uint64_t next_seq_ = 0;
};

}  // namespace cellulat
