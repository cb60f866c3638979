#pragma once

// JSON forms of engine values, shared by the CLI and the lab service.

#include <string>

#include "json.hpp"

#include "cellulat/columns.hpp"
#include "cellulat/dsl.hpp"
#include "cellulat/lesion_lab.hpp"
#include "cellulat/scheduler.hpp"
#include "cellulat/trace.hpp"

namespace cellulat {

using json = nlohmann::json;

inline void to_json(json& j, const Locus& l) { j = json{{"level", l.level}, {"region", l.region}}; }

inline void to_json(json& j, const WriteEvent& e) {
  j = json{{"tick", e.tick},
           {"seq", e.seq},
           {"actor", e.actor},
           {"species", e.species},
           {"level", e.locus.level},
           {"region", e.locus.region},
           {"kind", to_string(e.kind)},
           {"delta_or_value", e.delta_or_value},
           {"resulting_quantity", e.resulting_quantity}};
}

inline void from_json(const json& j, WriteEvent& e) {
  e.tick = j.at("tick").get<Tick>();
  e.seq = j.at("seq").get<std::uint64_t>();
  e.actor = j.at("actor").get<std::string>();
  e.species = j.at("species").get<std::string>();
  e.locus = Locus{j.at("level").get<std::string>(), j.at("region").get<std::string>()};
  const auto kind = j.at("kind").get<std::string>();
  e.kind = kind == "add" ? WriteKind::Add : kind == "remove" ? WriteKind::Remove : WriteKind::Set;
  e.delta_or_value = j.at("delta_or_value").get<double>();
  e.resulting_quantity = j.at("resulting_quantity").get<double>();
}

inline void to_json(json& j, const ExternalEmission& e) {
  j = json{{"agent", e.agent}, {"ligand", e.ligand}, {"amount", e.amount}};
}

inline void to_json(json& j, const AgendaEntry& a) {
  j = json{{"agent", a.agent}, {"reason", to_string(a.reason)}, {"priority", a.priority}};
}

inline void to_json(json& j, const FiringRecord& f) {
  j = json{{"agent", f.agent}, {"fired", f.fired}, {"count", f.count}, {"skip_reason", nullptr}};
  if (f.skip_reason) j["skip_reason"] = to_string(*f.skip_reason);
}

inline void to_json(json& j, const TickReport& r) {
  json stimuli = json::array();
  for (const auto& [ligand, amount] : r.stimuli_active) stimuli.push_back({{"ligand", ligand}, {"amount", amount}});
  j = json{{"tick", r.tick},     {"stimuli_active", stimuli}, {"agenda", r.agenda},
           {"firings", r.firings}, {"events", r.events},        {"emissions", r.emissions}};
}

// Compact form used by the step endpoint.
inline json tick_summary(const TickReport& r) {
  json fired = json::object();
  json skipped = json::object();
  for (const auto& f : r.firings) {
    if (f.fired)
      fired[f.agent] = f.count;
    else
      skipped[f.agent] = f.skip_reason ? std::string(to_string(*f.skip_reason)) : "";
  }
  return json{{"tick", r.tick},
              {"agenda_size", r.agenda.size()},
              {"fired", fired},
              {"skipped", skipped},
              {"event_count", r.events.size()},
              {"emissions", r.emissions}};
}

inline void to_json(json& j, const SignalEntry& e) {
  j = json{{"species", e.species}, {"level", e.locus.level}, {"region", e.locus.region}, {"quantity", e.quantity}};
}

inline void to_json(json& j, const BlackboardSnapshot& s) {
  j = json{{"tick", s.tick}, {"signals", s.entries}, {"event_count", s.event_count}};
}

inline void to_json(json& j, const Stimulus& s) {
  j = json{{"ligand", s.ligand}, {"amount", s.amount}, {"from_tick", s.from_tick}, {"to_tick", s.to_tick}};
}

inline void from_json(const json& j, Stimulus& s) {
  s.ligand = j.at("ligand").get<std::string>();
  s.amount = j.at("amount").get<double>();
  s.from_tick = j.at("from_tick").get<Tick>();
  s.to_tick = j.at("to_tick").get<Tick>();
}

inline void to_json(json& j, const Lesion& l) {
  j = json{{"id", l.id}, {"kind", to_string(l.kind)}, {"at_tick", l.at_tick}, {"until_tick", nullptr}};
  if (l.until_tick) j["until_tick"] = *l.until_tick;
  switch (l.kind) {
    case LesionKind::Knockout:
    case LesionKind::ReceptorBlock: j["agent"] = l.agent; break;
    case LesionKind::Attenuate:
      j["agent"] = l.agent;
      j["factor"] = l.factor;
      break;
    case LesionKind::Clamp:
      j["species"] = l.species;
      j["level"] = l.locus.level;
      j["region"] = l.locus.region;
      j["value"] = l.value;
      break;
  }
}

// Accepts either {"spec": "knockout:PLCbeta@3"} or the object form written by
// to_json. Malformed input raises Error(InvalidLesion).
inline void from_json(const json& j, Lesion& l) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidLesion, "lesion must be a JSON object");
  if (j.contains("spec")) {
    if (!j["spec"].is_string()) throw Error(ErrorCode::InvalidLesion, "spec must be a string");
    l = parse_lesion_spec(j["spec"].get<std::string>());
    return;
  }
  try {
    auto kind = lesion_kind_from(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::InvalidLesion, "unknown lesion kind");
    l = Lesion{};
    l.kind = *kind;
    l.id = j.value("id", std::string{});
    l.at_tick = j.at("at_tick").get<Tick>();
    if (j.contains("until_tick") && !j["until_tick"].is_null()) l.until_tick = j["until_tick"].get<Tick>();
    switch (l.kind) {
      case LesionKind::Knockout:
      case LesionKind::ReceptorBlock: l.agent = j.at("agent").get<std::string>(); break;
      case LesionKind::Attenuate:
        l.agent = j.at("agent").get<std::string>();
        l.factor = j.at("factor").get<double>();
        break;
      case LesionKind::Clamp:
        l.species = j.at("species").get<std::string>();
        l.locus = Locus{j.at("level").get<std::string>(), j.value("region", std::string(kGlobalRegion))};
        l.value = j.at("value").get<double>();
        break;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidLesion, e.what());
  }
}

inline void to_json(json& j, const AgencyColumn& c) {
  j = json{{"region", c.region}, {"levels_spanned", c.levels_spanned}, {"members", c.members}};
}

inline void to_json(json& j, const ColumnMerge& m) { j = json{{"sources", m.sources}, {"target", m.target}}; }
inline void to_json(json& j, const ColumnSplit& s) { j = json{{"source", s.source}, {"targets", s.targets}}; }

inline void to_json(json& j, const MembershipChange& m) {
  j = json{{"region", m.region},
           {"added_members", m.added_members},
           {"removed_members", m.removed_members},
           {"added_levels", m.added_levels},
           {"removed_levels", m.removed_levels}};
}

inline void to_json(json& j, const ColumnDiffReport& r) {
  j = json{{"merged", r.merged},
           {"split", r.split},
           {"appeared", r.appeared},
           {"vanished", r.vanished},
           {"membership_changes", r.membership_changes}};
}

inline void to_json(json& j, const LevelOccupancy& o) {
  j = json{{"sensing", o.sensing}, {"affecting", o.affecting}, {"species", o.species}};
}

inline void to_json(json& j, const DivergenceReport& r) {
  j = json{{"first_divergence_tick", nullptr},
           {"window", {0, r.window_end}},
           {"max_abs_difference", r.max_abs_difference},
           {"firing_count_delta", r.firing_count_delta}};
  if (r.first_divergence_tick) j["first_divergence_tick"] = *r.first_divergence_tick;
}

inline void to_json(json& j, const TraceRow& r) {
  j = json{{"tick", r.tick}, {"level", r.level}, {"region", r.region}, {"species", r.species}, {"quantity", r.quantity}};
}

inline void to_json(json& j, const Diagnostic& d) {
  j = json{{"severity", d.severity == Severity::Error ? "error" : "warning"},
           {"code", d.code},
           {"message", d.message},
           {"line", d.loc.line},
           {"column", d.loc.column}};
}

// Full simulation state: the model travels as canonical DSL text so a dump
// can be reloaded without any other input.
inline json dump_simulation(const Simulation& sim) {
  const Simulation::State s = sim.state();
  json quantities = json::array();
  for (const auto& [key, q] : s.quantities)
    quantities.push_back({{"species", key.species}, {"level", key.locus.level}, {"region", key.locus.region}, {"quantity", q}});
  json emissions = json::array();
  for (const auto& e : s.emissions)
    emissions.push_back({{"tick", e.tick}, {"agent", e.emission.agent}, {"ligand", e.emission.ligand}, {"amount", e.emission.amount}});
  return json{{"model", pretty_print(sim.model())},
              {"tick", s.tick},
              {"seed", s.seed},
              {"rng", s.rng_state},
              {"quantities", quantities},
              {"log", s.log},
              {"stimuli", s.stimuli},
              {"lesions", s.lesions},
              {"prev_events", s.prev_events},
              {"prev_fired", s.prev_fired},
              {"emissions", emissions}};
}

inline Simulation load_simulation(const json& j) {
  ParseResult parsed = parse(j.at("model").get<std::string>());
  if (!parsed.ok()) throw Error(ErrorCode::InvalidModel, "embedded model does not parse");
  Simulation::State s;
  s.tick = j.at("tick").get<Tick>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.rng_state = j.at("rng").get<std::string>();
  for (const auto& q : j.at("quantities"))
    s.quantities[SignalKey{q.at("species").get<std::string>(), Locus{q.at("level").get<std::string>(), q.at("region").get<std::string>()}}] =
        q.at("quantity").get<double>();
  s.log = j.at("log").get<std::vector<WriteEvent>>();
  s.stimuli = j.at("stimuli").get<StimulusSchedule>();
  s.lesions = j.at("lesions").get<std::vector<Lesion>>();
  s.prev_events = j.at("prev_events").get<std::vector<WriteEvent>>();
  s.prev_fired = j.at("prev_fired").get<std::set<std::string>>();
  for (const auto& e : j.at("emissions"))
    s.emissions.push_back({e.at("tick").get<Tick>(),
                           {e.at("agent").get<std::string>(), e.at("ligand").get<std::string>(), e.at("amount").get<double>()}});
  return Simulation::restore(std::make_shared<const ModelDef>(std::move(*parsed.model)), s);
}

}  // namespace cellulat
