#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cellulat/agent.hpp"
#include "cellulat/blackboard.hpp"
#include "cellulat/lesion.hpp"
#include "cellulat/model.hpp"
#include "cellulat/rng.hpp"

namespace cellulat {

enum class AgendaReason { EventMatch, Refire, InterfacePoll };

inline std::string_view to_string(AgendaReason r) {
  switch (r) {
    case AgendaReason::EventMatch: return "event_match";
    case AgendaReason::Refire: return "refire";
    case AgendaReason::InterfacePoll: return "interface_poll";
  }
  return "event_match";
}

struct AgendaEntry {
  std::string agent;
  AgendaReason reason = AgendaReason::EventMatch;
  int priority = 0;

  bool operator==(const AgendaEntry&) const = default;
};

struct FiringRecord {
  std::string agent;
  bool fired = false;
  int count = 0;  // successful firings out of the agent's multiplicity
  std::optional<SkipReason> skip_reason;

  bool operator==(const FiringRecord&) const = default;
};

struct TickReport {
  Tick tick = 0;
  std::vector<std::pair<std::string, double>> stimuli_active;
  std::vector<AgendaEntry> agenda;
  std::vector<FiringRecord> firings;  // same order as agenda
  std::vector<WriteEvent> events;
  std::vector<ExternalEmission> emissions;

  bool operator==(const TickReport&) const = default;
};

struct EmissionRecord {
  Tick tick = 0;
  ExternalEmission emission;

  bool operator==(const EmissionRecord&) const = default;
};

// Ligand amounts summed over every schedule window covering tick t.
inline StimulusView active_stimuli(const StimulusSchedule& schedule, Tick t) {
  std::map<std::string, double, std::less<>> amounts;
  for (const auto& s : schedule)
    if (s.from_tick <= t && t <= s.to_tick && s.amount > 0.0) amounts[s.ligand] += s.amount;
  return StimulusView(std::move(amounts));
}

inline void order_agenda(std::vector<AgendaEntry>& agenda) {
  std::sort(agenda.begin(), agenda.end(), [](const AgendaEntry& a, const AgendaEntry& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.agent < b.agent;
  });
}

// Which agents care about which signals and ligands. Built once per model.
class SubscriptionIndex {
 public:
  explicit SubscriptionIndex(const ModelDef& model) {
    for (std::size_t i = 0; i < model.agents.size(); ++i) {
      const AgentDef& agent = model.agents[i];
      by_id_.emplace(agent.id, i);
      SensedInputs in = sensed_inputs(agent);
      for (const auto& key : in.signals) by_signal_[key].push_back(i);
      if (agent.cls == AgentClass::Interface)
        for (const auto& lig : in.ligands) by_ligand_[lig].push_back(i);
    }
  }

  const std::vector<std::size_t>& subscribers(const SignalKey& key) const {
    auto it = by_signal_.find(key);
    return it == by_signal_.end() ? none_ : it->second;
  }
  const std::vector<std::size_t>& pollers(const std::string& ligand) const {
    auto it = by_ligand_.find(ligand);
    return it == by_ligand_.end() ? none_ : it->second;
  }
  std::optional<std::size_t> position(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<SignalKey, std::vector<std::size_t>> by_signal_;
  std::map<std::string, std::vector<std::size_t>> by_ligand_;
  std::map<std::string, std::size_t> by_id_;
  std::vector<std::size_t> none_;
};

// Indexed agenda construction: looks up subscribers of each previous-tick
// write instead of scanning every agent. Reason precedence is
// event_match > refire > interface_poll.
inline std::vector<AgendaEntry> build_agenda(const std::vector<WriteEvent>& prev_events,
                                             const std::set<std::string>& prev_fired, const StimulusView& stimuli,
                                             const ModelDef& model, const SubscriptionIndex& index,
                                             const std::set<std::string>& excluded = {}) {
  std::map<std::size_t, AgendaReason> chosen;
  for (const auto& ev : prev_events)
    for (std::size_t i : index.subscribers(SignalKey{ev.species, ev.locus}))
      chosen.emplace(i, AgendaReason::EventMatch);
  for (const auto& id : prev_fired)
    if (auto i = index.position(id)) chosen.emplace(*i, AgendaReason::Refire);
  for (const auto& [ligand, amount] : stimuli.amounts())
    if (amount > 0.0)
      for (std::size_t i : index.pollers(ligand)) chosen.emplace(i, AgendaReason::InterfacePoll);

  std::vector<AgendaEntry> agenda;
  for (const auto& [i, reason] : chosen) {
    const AgentDef& a = model.agents[i];
    if (!excluded.count(a.id)) agenda.push_back({a.id, reason, a.priority});
  }
  order_agenda(agenda);
  return agenda;
}

// Brute-force agenda: every agent, every atom, every previous-tick event.
inline std::vector<AgendaEntry> reference_agenda(const std::vector<WriteEvent>& prev_events,
                                                 const std::set<std::string>& prev_fired,
                                                 const StimulusView& stimuli, const ModelDef& model,
                                                 const std::set<std::string>& excluded = {}) {
  std::vector<AgendaEntry> agenda;
  for (const AgentDef& a : model.agents) {
    if (excluded.count(a.id)) continue;
    bool event_match = false;
    bool ligand_active = false;
    for_each_atom(a, [&](const Atom& atom) {
      if (atom.source == Atom::Source::Ligand) {
        ligand_active = ligand_active || stimuli.active(atom.name);
        return;
      }
      for (const auto& ev : prev_events)
        if (ev.species == atom.name && ev.locus == atom.locus) event_match = true;
    });
    if (event_match)
      agenda.push_back({a.id, AgendaReason::EventMatch, a.priority});
    else if (prev_fired.count(a.id))
      agenda.push_back({a.id, AgendaReason::Refire, a.priority});
    else if (a.cls == AgentClass::Interface && ligand_active)
      agenda.push_back({a.id, AgendaReason::InterfacePoll, a.priority});
  }
  order_agenda(agenda);
  return agenda;
}

// The control mechanism for one simulated cell. Copyable: a copy is an
// independent fork sharing only the immutable model.
class Simulation {
 public:
  struct State {
    Tick tick = 0;
    std::uint64_t seed = 0;
    std::string rng_state;
    std::map<SignalKey, double> quantities;
    std::vector<WriteEvent> log;
    StimulusSchedule stimuli;
    std::vector<Lesion> lesions;
    std::vector<WriteEvent> prev_events;
    std::set<std::string> prev_fired;
    std::vector<EmissionRecord> emissions;
  };

  Simulation(ModelDef model, std::uint64_t seed) : Simulation(std::make_shared<const ModelDef>(std::move(model)), seed) {}

  Simulation(std::shared_ptr<const ModelDef> model, std::uint64_t seed)
      : model_(std::move(model)),
        index_(std::make_shared<const SubscriptionIndex>(*model_)),
        board_(*model_),
        rng_(seed),
        seed_(seed),
        stimuli_(model_->stimuli) {}

  const ModelDef& model() const { return *model_; }
  std::shared_ptr<const ModelDef> shared_model() const { return model_; }
  const Blackboard& board() const { return board_; }
  Tick tick() const { return tick_; }
  std::uint64_t seed() const { return seed_; }
  const SeededRng& rng() const { return rng_; }
  const StimulusSchedule& stimuli() const { return stimuli_; }
  const std::vector<Lesion>& lesions() const { return lesions_; }
  const std::vector<EmissionRecord>& emissions() const { return emissions_; }
  const std::vector<WriteEvent>& last_tick_events() const { return prev_events_; }
  const std::set<std::string>& last_fired() const { return prev_fired_; }

  void set_stimuli(StimulusSchedule s) { stimuli_ = std::move(s); }

  void add_stimulus(Stimulus s) {
    if (!model_->has_ligand(s.ligand)) throw Error(ErrorCode::UnknownLigand, s.ligand);
    if (!(s.amount >= 0.0) || s.from_tick > s.to_tick) throw Error(ErrorCode::InvalidArgument, "stimulus window");
    if (s.from_tick < tick_) throw Error(ErrorCode::WindowInPast, "stimulus starts before current tick");
    stimuli_.push_back(std::move(s));
  }

  // Unchecked registration; see apply_lesion for the validated entry point.
  void register_lesion(Lesion l) { lesions_.push_back(std::move(l)); }

  // Lesions whose effects are still pending or ongoing at the current tick.
  std::vector<Lesion> active_lesions() const {
    std::vector<Lesion> out;
    for (const auto& l : lesions_)
      if (!l.until_tick || *l.until_tick + 1 >= tick_) out.push_back(l);
    return out;
  }

  TickReport step() { return advance(false); }

  // Same semantics as step() with the agenda derived by brute force. Test oracle.
  TickReport reference_step() { return advance(true); }

  std::vector<TickReport> run(Tick n) {
    std::vector<TickReport> reports;
    for (Tick i = 0; i < n; ++i) reports.push_back(step());
    return reports;
  }

  State state() const {
    return State{tick_,     seed_,        rng_.state(), board_.quantities(), board_.log(), stimuli_,
                 lesions_,  prev_events_, prev_fired_,  emissions_};
  }

  static Simulation restore(std::shared_ptr<const ModelDef> model, const State& s) {
    Simulation sim(std::move(model), s.seed);
    sim.tick_ = s.tick;
    sim.rng_.set_state(s.rng_state);
    sim.board_.restore(s.tick, s.quantities, s.log);
    sim.stimuli_ = s.stimuli;
    sim.lesions_ = s.lesions;
    sim.prev_events_ = s.prev_events;
    sim.prev_fired_ = s.prev_fired;
    sim.emissions_ = s.emissions;
    return sim;
  }

 private:
  TickReport advance(bool reference) {
    const Tick t = tick_;
    board_.begin_tick(t);
    const std::size_t log_start = board_.log().size();

    TickReport report;
    report.tick = t;
    const StimulusView stimuli = active_stimuli(stimuli_, t);
    for (const auto& [ligand, amount] : stimuli.amounts()) report.stimuli_active.emplace_back(ligand, amount);

    std::set<std::string> knocked_out;
    for (const auto& l : lesions_)
      if (l.kind == LesionKind::Knockout && in_force_during(l, t)) knocked_out.insert(l.agent);

    report.agenda = reference ? reference_agenda(prev_events_, prev_fired_, stimuli, *model_, knocked_out)
                              : build_agenda(prev_events_, prev_fired_, stimuli, *model_, *index_, knocked_out);

    std::set<std::string> fired_now;
    const StimulusView blocked_view;
    for (const auto& entry : report.agenda) {
      const AgentDef& agent = reference ? *model_->find_agent(entry.agent) : model_->agents[*index_->position(entry.agent)];
      double attenuation = 1.0;
      bool blocked = false;
      for (const auto& l : lesions_) {
        if (l.agent != agent.id || !in_force_during(l, t)) continue;
        if (l.kind == LesionKind::Attenuate) attenuation *= l.factor;
        if (l.kind == LesionKind::ReceptorBlock) blocked = true;
      }

      FiringRecord record{agent.id, false, 0, std::nullopt};
      for (const auto& outcome : fire_multiple(agent, board_, blocked ? blocked_view : stimuli, rng_, attenuation)) {
        if (outcome.fired) {
          ++record.count;
          for (const auto& e : agent.emissions) report.emissions.push_back({agent.id, e.ligand, e.amount});
        } else if (record.count == 0 && !record.skip_reason) {
          record.skip_reason = outcome.skip_reason;
        }
      }
      record.fired = record.count > 0;
      if (record.fired) {
        record.skip_reason.reset();
        fired_now.insert(agent.id);
      }
      report.firings.push_back(std::move(record));
    }

    board_.apply_decay();

    for (const auto& l : lesions_)
      if (l.kind == LesionKind::Clamp && applied_at_end_of(l, t))
        board_.apply("lesion", l.species, l.locus, WriteKind::Set, l.value);

    report.events.assign(board_.log().begin() + static_cast<std::ptrdiff_t>(log_start), board_.log().end());
    for (const auto& e : report.emissions) emissions_.push_back({t, e});
    prev_events_ = report.events;
    prev_fired_ = std::move(fired_now);
    ++tick_;
    board_.begin_tick(tick_);
    return report;
  }

  std::shared_ptr<const ModelDef> model_;
  std::shared_ptr<const SubscriptionIndex> index_;
  Blackboard board_;
  SeededRng rng_;
  std::uint64_t seed_ = 0;
  Tick tick_ = 0;
  StimulusSchedule stimuli_;
  std::vector<Lesion> lesions_;
  std::vector<WriteEvent> prev_events_;
  std::set<std::string> prev_fired_;
  std::vector<EmissionRecord> emissions_;
};

}  // namespace cellulat
