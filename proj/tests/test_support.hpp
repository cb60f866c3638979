#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellulat/columns.hpp"
#include "cellulat/dsl.hpp"
#include "cellulat/lesion.hpp"
#include "cellulat/model.hpp"

namespace cellulat::testing {

inline ModelDef parse_or_die(std::string_view text) {
  ParseResult r = parse(text);
  if (!r.ok()) {
    std::string msg = "model does not parse:";
    for (const auto& d : r.diagnostics) msg += "\n  " + format_diagnostic("<test>", d);
    throw std::runtime_error(msg);
  }
  return std::move(*r.model);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Grouping oracle: flatten every (agent, region, level) touch, then scan the
// flat list once per region without any shared bookkeeping.
inline std::vector<AgencyColumn> brute_force_columns(const ModelDef& m) {
  struct Touch {
    std::string agent, region, level;
  };
  std::vector<Touch> touches;
  for (const auto& a : m.agents) {
    for_each_atom(a, [&](const Atom& atom) {
      if (atom.source == Atom::Source::Signal) touches.push_back({a.id, atom.locus.region, atom.locus.level});
    });
    for (const auto& e : a.effects) touches.push_back({a.id, e.locus.region, e.locus.level});
  }
  std::set<std::string> regions;
  for (const auto& t : touches) regions.insert(t.region);
  std::vector<AgencyColumn> out;
  for (const auto& r : regions) {
    AgencyColumn c{r, {}, {}};
    for (const auto& t : touches) {
      if (t.region != r) continue;
      c.levels_spanned.insert(t.level);
      c.members.insert(t.agent);
    }
    if (c.levels_spanned.size() > 1) out.push_back(c);
  }
  return out;
}

// Small, valid models with enough structure to exercise every scheduler path:
// interface polling, flags, decay, multiplicity, stochastic firing, boolean
// nets, shared substrates and several regions.
class ModelGenerator {
 public:
  explicit ModelGenerator(std::uint64_t seed) : rng_(seed) {}

  ModelDef generate(int max_agents = 6, int max_species = 4) {
    ModelDef m;
    m.name = "random_" + std::to_string(counter_++);
    if (coin(0.3)) m.metadata.emplace_back("origin", "generated \"model\"");

    const int n_levels = uniform(1, 3);
    std::vector<int> ranks{0, 1, 2, 3, 4};
    std::shuffle(ranks.begin(), ranks.end(), rng_);
    for (int i = 0; i < n_levels; ++i)
      m.levels.push_back({"lv" + std::to_string(i), ranks[i], pick<LevelKind>({LevelKind::Membrane, LevelKind::Cytosol,
                                                                               LevelKind::Nucleus, LevelKind::Organelle,
                                                                               LevelKind::Custom}),
                          {}});

    const int n_species = uniform(1, max_species);
    for (int i = 0; i < n_species; ++i) {
      SignalSpecies s{"S" + std::to_string(i), coin(0.3) ? SpeciesKind::Flag : SpeciesKind::Messenger, 0.0, {}};
      if (s.kind == SpeciesKind::Messenger && coin(0.25)) s.decay = pick<double>({0.25, 0.5, 0.125});
      m.species.push_back(s);
    }
    const int n_ligands = uniform(1, 2);
    for (int i = 0; i < n_ligands; ++i) m.ligands.push_back({"G" + std::to_string(i), {}});

    std::set<std::pair<std::string, Locus>> seen;
    for (const auto& s : m.species) {
      for (int k = 0; k < 2; ++k) {
        if (!coin(0.5)) continue;
        Locus l = locus(m);
        if (!seen.insert({s.name, l}).second) continue;
        double q = s.kind == SpeciesKind::Flag ? pick<double>({0.0, 1.0}) : pick<double>({0.0, 1.0, 2.0, 2.5, 5.0});
        m.initializers.push_back({s.name, l, q, {}});
      }
    }

    m.stimuli.push_back({m.ligands.front().name, pick<double>({1.0, 2.0}), 0, uniform(0, 8), {}});
    if (coin(0.5)) {
      Tick from = uniform(0, 15);
      m.stimuli.push_back({pick_ligand(m), pick<double>({0.5, 1.0, 3.0}), from, from + uniform(0, 5), {}});
    }

    const int n_agents = uniform(0, max_agents);
    static const std::vector<std::string> ids{"a", "B", "c1", "Ab", "aa", "z", "Zq", "m_2"};
    std::vector<std::string> pool = ids;
    std::shuffle(pool.begin(), pool.end(), rng_);
    for (int i = 0; i < n_agents; ++i) {
      AgentDef a;
      a.id = pool[i];
      a.cls = (i == 0 || coin(0.25)) ? AgentClass::Interface : AgentClass::Internal;
      a.priority = uniform(-1, 2);
      a.multiplicity = coin(0.7) ? 1 : uniform(2, 3);
      a.firing_probability = coin(0.7) ? 1.0 : pick<double>({0.25, 0.5, 0.75});
      if (coin(0.4)) a.region_tag = pick<std::string>({"global", "r1", "r2"});
      const bool iface = a.cls == AgentClass::Interface;
      if (coin(0.15))
        a.trigger = boolnet(m, iface);
      else
        a.trigger = condition(m, iface, 0, iface && coin(0.8));
      const int n_effects = uniform(0, 3);
      for (int e = 0; e < n_effects; ++e) a.effects.push_back(effect(m));
      if (iface && coin(0.3)) a.emissions.push_back({pick_ligand(m), pick<double>({1.0, 0.5}), {}});
      m.agents.push_back(std::move(a));
    }
    return m;
  }

  Lesion lesion(const ModelDef& m, Tick horizon) {
    Lesion l;
    l.at_tick = uniform(0, static_cast<int>(horizon / 2));
    if (coin(0.5)) l.until_tick = l.at_tick + uniform(0, static_cast<int>(horizon / 2));
    std::vector<const AgentDef*> interfaces;
    for (const auto& a : m.agents)
      if (a.cls == AgentClass::Interface) interfaces.push_back(&a);
    const int kind = m.agents.empty() ? 2 : uniform(0, 3);
    if (kind == 0) {
      l.kind = LesionKind::Knockout;
      l.agent = m.agents[uniform(0, static_cast<int>(m.agents.size()) - 1)].id;
    } else if (kind == 1) {
      l.kind = LesionKind::Attenuate;
      l.agent = m.agents[uniform(0, static_cast<int>(m.agents.size()) - 1)].id;
      l.factor = pick<double>({0.5, 0.25});
    } else if (kind == 3 && !interfaces.empty()) {
      l.kind = LesionKind::ReceptorBlock;
      l.agent = interfaces[uniform(0, static_cast<int>(interfaces.size()) - 1)]->id;
    } else {
      l.kind = LesionKind::Clamp;
      const auto& s = m.species[uniform(0, static_cast<int>(m.species.size()) - 1)];
      l.species = s.name;
      l.locus = locus(m);
      l.value = s.kind == SpeciesKind::Flag ? pick<double>({0.0, 1.0}) : pick<double>({0.0, 1.0, 3.0});
    }
    l.id = format_lesion_spec(l);
    return l;
  }

  std::mt19937_64& engine() { return rng_; }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

  template <typename T>
  T pick(std::initializer_list<T> xs) {
    std::vector<T> v(xs);
    return v[uniform(0, static_cast<int>(v.size()) - 1)];
  }

 private:
  Locus locus(const ModelDef& m) {
    return Locus{m.levels[uniform(0, static_cast<int>(m.levels.size()) - 1)].name,
                 pick<std::string>({"global", "global", "r1", "r2"})};
  }

  std::string pick_ligand(const ModelDef& m) {
    return m.ligands[uniform(0, static_cast<int>(m.ligands.size()) - 1)].name;
  }

  Atom atom(const ModelDef& m, bool allow_ligand) {
    const auto cmp = pick<Comparator>({Comparator::Ge, Comparator::Ge, Comparator::Gt, Comparator::Le, Comparator::Lt,
                                       Comparator::Eq});
    if (allow_ligand && coin(0.4)) return Atom::ligand(pick_ligand(m), cmp, pick<double>({0.0, 1.0, 2.0}));
    const auto& s = m.species[uniform(0, static_cast<int>(m.species.size()) - 1)];
    return Atom::signal(s.name, locus(m), cmp, pick<double>({0.0, 0.5, 1.0, 2.0}));
  }

  Condition condition(const ModelDef& m, bool iface, int depth, bool force_ligand = false) {
    if (force_ligand) {
      Condition lig = Condition::leaf(Atom::ligand(pick_ligand(m), Comparator::Ge, pick<double>({0.5, 1.0})));
      if (coin(0.5)) return lig;
      return Condition::all_of({lig, condition(m, iface, depth + 1)});
    }
    if (depth >= 2 || coin(0.5)) return Condition::leaf(atom(m, iface));
    const int kind = uniform(0, 2);
    if (kind == 2) return Condition::negate(condition(m, iface, depth + 1));
    std::vector<Condition> kids;
    const int n = uniform(2, 3);
    for (int i = 0; i < n; ++i) kids.push_back(condition(m, iface, depth + 1));
    return kind == 0 ? Condition::all_of(std::move(kids)) : Condition::any_of(std::move(kids));
  }

  BooleanNet boolnet(const ModelDef& m, bool iface) {
    BooleanNet net;
    const int n_inputs = uniform(1, 2);
    std::vector<std::string> names;
    for (int i = 0; i < n_inputs; ++i) {
      BoolNode in;
      in.name = "in" + std::to_string(i);
      in.input = atom(m, iface);
      names.push_back(in.name);
      net.nodes.push_back(std::move(in));
    }
    const int n_internal = uniform(1, 2);
    for (int i = 0; i < n_internal; ++i) {
      BoolNode node;
      node.name = "n" + std::to_string(i);
      const int k = uniform(0, std::min<int>(2, static_cast<int>(names.size())));
      std::vector<std::string> shuffled = names;
      std::shuffle(shuffled.begin(), shuffled.end(), rng_);
      node.inputs.assign(shuffled.begin(), shuffled.begin() + k);
      for (int r = 0; r < (1 << k); ++r) node.table += coin(0.5) ? '1' : '0';
      names.push_back(node.name);
      net.nodes.push_back(std::move(node));
    }
    net.output = names[uniform(0, static_cast<int>(names.size()) - 1)];
    net.sync_steps = uniform(1, 3);
    return net;
  }

  Effect effect(const ModelDef& m) {
    const auto& s = m.species[uniform(0, static_cast<int>(m.species.size()) - 1)];
    Effect e;
    e.species = s.name;
    e.locus = locus(m);
    if (s.kind == SpeciesKind::Flag) {
      e.kind = EffectKind::SetFlag;
      e.amount = pick<double>({0.0, 1.0, 1.0});
    } else {
      e.kind = coin(0.5) ? EffectKind::Produce : EffectKind::Consume;
      e.amount = pick<double>({0.5, 1.0, 2.0});
    }
    return e;
  }

  std::mt19937_64 rng_;
  int counter_ = 0;
};

}  // namespace cellulat::testing
