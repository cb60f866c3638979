#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellulat/error.hpp"
#include "cellulat/model.hpp"
#include "cellulat/text.hpp"

namespace cellulat {

enum class LesionKind { Knockout, Attenuate, Clamp, ReceptorBlock };

inline std::string_view to_string(LesionKind k) {
  switch (k) {
    case LesionKind::Knockout: return "knockout";
    case LesionKind::Attenuate: return "attenuate";
    case LesionKind::Clamp: return "clamp";
    case LesionKind::ReceptorBlock: return "block";
  }
  return "knockout";
}

inline std::optional<LesionKind> lesion_kind_from(std::string_view s) {
  for (auto k : {LesionKind::Knockout, LesionKind::Attenuate, LesionKind::Clamp, LesionKind::ReceptorBlock})
    if (to_string(k) == s) return k;
  if (s == "receptor_block") return LesionKind::ReceptorBlock;
  return std::nullopt;
}

// A timed perturbation. The window [at_tick, until_tick] names the ticks at
// whose end the lesion is applied: clamps write at the end of each of those
// ticks, and agent-side lesions govern the following tick's firings.
struct Lesion {
  std::string id;
  LesionKind kind = LesionKind::Knockout;
  std::string agent;    // knockout, attenuate, block
  double factor = 1.0;  // attenuate
  std::string species;  // clamp
  Locus locus;          // clamp
  double value = 0.0;   // clamp
  Tick at_tick = 0;
  std::optional<Tick> until_tick;

  bool operator==(const Lesion&) const = default;
};

inline bool applied_at_end_of(const Lesion& l, Tick t) {
  return l.at_tick <= t && (!l.until_tick || t <= *l.until_tick);
}

inline bool in_force_during(const Lesion& l, Tick t) { return t >= 1 && applied_at_end_of(l, t - 1); }

// knockout:AGENT@T[..T2]  attenuate:AGENT:FACTOR@T[..T2]
// clamp:SPECIES:LEVEL[/REGION]:VALUE@T[..T2]  block:AGENT@T[..T2]
inline Lesion parse_lesion_spec(std::string_view spec) {
  auto fail = [&](const std::string& why) { return Error(ErrorCode::InvalidLesion, why + " in '" + std::string(spec) + "'"); };

  const auto at = spec.rfind('@');
  if (at == std::string_view::npos) throw fail("missing @tick");
  std::string_view head = spec.substr(0, at);
  std::string_view window = spec.substr(at + 1);

  Lesion l;
  l.id = std::string(spec);
  if (auto dots = window.find(".."); dots != std::string_view::npos) {
    auto from = parse_int(window.substr(0, dots));
    auto to = parse_int(window.substr(dots + 2));
    if (!from || !to) throw fail("bad tick window");
    l.at_tick = *from;
    l.until_tick = *to;
  } else {
    auto from = parse_int(window);
    if (!from) throw fail("bad tick");
    l.at_tick = *from;
  }

  std::vector<std::string_view> parts;
  for (std::size_t start = 0;;) {
    auto colon = head.find(':', start);
    parts.push_back(head.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  auto kind = lesion_kind_from(parts[0]);
  if (!kind) throw fail("unknown lesion kind");
  l.kind = *kind;

  switch (l.kind) {
    case LesionKind::Knockout:
    case LesionKind::ReceptorBlock:
      if (parts.size() != 2 || parts[1].empty()) throw fail("expected KIND:AGENT");
      l.agent = std::string(parts[1]);
      break;
    case LesionKind::Attenuate: {
      if (parts.size() != 3 || parts[1].empty()) throw fail("expected attenuate:AGENT:FACTOR");
      auto f = parse_real(parts[2]);
      if (!f) throw fail("bad factor");
      l.agent = std::string(parts[1]);
      l.factor = *f;
      break;
    }
    case LesionKind::Clamp: {
      if (parts.size() != 4 || parts[1].empty() || parts[2].empty())
        throw fail("expected clamp:SPECIES:LEVEL[/REGION]:VALUE");
      auto v = parse_real(parts[3]);
      if (!v) throw fail("bad clamp value");
      l.species = std::string(parts[1]);
      auto slash = parts[2].find('/');
      l.locus.level = std::string(parts[2].substr(0, slash));
      if (slash != std::string_view::npos) l.locus.region = std::string(parts[2].substr(slash + 1));
      l.value = *v;
      break;
    }
  }
  return l;
}

inline std::string format_lesion_spec(const Lesion& l) {
  std::string s(to_string(l.kind));
  switch (l.kind) {
    case LesionKind::Knockout:
    case LesionKind::ReceptorBlock: s += ":" + l.agent; break;
    case LesionKind::Attenuate: s += ":" + l.agent + ":" + format_real(l.factor); break;
    case LesionKind::Clamp: s += ":" + l.species + ":" + to_string(l.locus) + ":" + format_real(l.value); break;
  }
  s += "@" + std::to_string(l.at_tick);
  if (l.until_tick) s += ".." + std::to_string(*l.until_tick);
  return s;
}

// Static checks against the model. The "window in the past" check needs the
// session clock and lives in apply_lesion.
inline void validate_lesion(const Lesion& l, const ModelDef& model) {
  if (l.until_tick && *l.until_tick < l.at_tick) throw Error(ErrorCode::InvalidLesion, "until_tick before at_tick");
  if (l.at_tick < 0) throw Error(ErrorCode::InvalidLesion, "negative at_tick");
  switch (l.kind) {
    case LesionKind::Knockout:
    case LesionKind::Attenuate:
    case LesionKind::ReceptorBlock: {
      const AgentDef* a = model.find_agent(l.agent);
      if (!a) throw Error(ErrorCode::UnknownAgent, l.agent);
      if (l.kind == LesionKind::Attenuate && !(l.factor > 0.0 && l.factor < 1.0))
        throw Error(ErrorCode::InvalidLesion, "attenuation factor must lie strictly between 0 and 1");
      if (l.kind == LesionKind::ReceptorBlock && a->cls != AgentClass::Interface)
        throw Error(ErrorCode::InvalidLesion, l.agent + " is not an interface agent");
      break;
    }
    case LesionKind::Clamp: {
      const SignalSpecies* s = model.find_species(l.species);
      if (!s) throw Error(ErrorCode::UnknownSpecies, l.species);
      if (!model.find_level(l.locus.level)) throw Error(ErrorCode::UnknownLevel, l.locus.level);
      if (!(l.value >= 0.0)) throw Error(ErrorCode::NegativeQuantity, "clamp value");
      if (s->kind == SpeciesKind::Flag && l.value != 0.0 && l.value != 1.0)
        throw Error(ErrorCode::FlagDomain, "clamp value for flag " + l.species);
      break;
    }
  }
}

}  // namespace cellulat
