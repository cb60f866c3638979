#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cellulat/dsl.hpp"
#include "cellulat/lesion.hpp"
#include "cellulat/scheduler.hpp"

namespace cellulat {

// Validates and registers a lesion on a live simulation.
inline void apply_lesion(Simulation& sim, Lesion lesion) {
  validate_lesion(lesion, sim.model());
  if (lesion.at_tick < sim.tick())
    throw Error(ErrorCode::WindowInPast, "lesion at tick " + std::to_string(lesion.at_tick) + " but simulation is at " +
                                             std::to_string(sim.tick()));
  if (lesion.id.empty()) lesion.id = format_lesion_spec(lesion);
  sim.register_lesion(std::move(lesion));
}

using QuantityMap = std::map<SignalKey, double>;

inline QuantityMap nonzero_quantities(const Blackboard& board) {
  QuantityMap out;
  for (const auto& [key, q] : board.quantities())
    if (q != 0.0) out.emplace(key, q);
  return out;
}

// A run as observed by the lab: per-tick reports plus the board after every
// tick. states[0] is the initial board, states[t + 1] the board after tick t.
struct RunTrace {
  std::vector<TickReport> reports;
  std::vector<QuantityMap> states;

  bool operator==(const RunTrace&) const = default;
};

inline RunTrace record_run(Simulation& sim, Tick n_ticks) {
  RunTrace trace;
  trace.states.push_back(nonzero_quantities(sim.board()));
  for (Tick i = 0; i < n_ticks; ++i) {
    trace.reports.push_back(sim.step());
    trace.states.push_back(nonzero_quantities(sim.board()));
  }
  return trace;
}

struct DivergenceReport {
  std::optional<Tick> first_divergence_tick;
  Tick window_end = 0;
  std::map<std::string, double> max_abs_difference;      // per species, over all loci and ticks
  std::map<std::string, std::int64_t> firing_count_delta;  // lesioned minus baseline

  bool operator==(const DivergenceReport&) const = default;
};

struct PairedRun {
  RunTrace baseline;
  RunTrace lesioned;
  DivergenceReport report;
};

namespace lab_detail {

inline std::map<std::string, int> fired_counts(const TickReport& r) {
  std::map<std::string, int> out;
  for (const auto& f : r.firings)
    if (f.count > 0) out[f.agent] += f.count;
  return out;
}

}  // namespace lab_detail

// Tick t diverges when the board after t, the agents that fired during t, or
// the emissions of t differ. Agenda bookkeeping alone does not count.
inline DivergenceReport compare_traces(const ModelDef& model, const RunTrace& baseline, const RunTrace& lesioned) {
  DivergenceReport report;
  const std::size_t ticks = std::min(baseline.reports.size(), lesioned.reports.size());
  report.window_end = static_cast<Tick>(ticks);

  for (const auto& s : model.species) report.max_abs_difference[s.name] = 0.0;
  for (std::size_t t = 0; t <= ticks; ++t) {
    const QuantityMap& a = baseline.states[t];
    const QuantityMap& b = lesioned.states[t];
    auto bump = [&](const SignalKey& key, double d) {
      double& slot = report.max_abs_difference[key.species];
      slot = std::max(slot, std::fabs(d));
    };
    for (const auto& [key, q] : a) {
      auto it = b.find(key);
      bump(key, q - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [key, q] : b)
      if (!a.count(key)) bump(key, q);
  }

  for (const auto& agent : model.agents) report.firing_count_delta[agent.id] = 0;
  for (std::size_t t = 0; t < ticks; ++t) {
    const auto fa = lab_detail::fired_counts(baseline.reports[t]);
    const auto fb = lab_detail::fired_counts(lesioned.reports[t]);
    for (const auto& [id, n] : fa) report.firing_count_delta[id] -= n;
    for (const auto& [id, n] : fb) report.firing_count_delta[id] += n;
    if (!report.first_divergence_tick &&
        (fa != fb || baseline.states[t + 1] != lesioned.states[t + 1] ||
         baseline.reports[t].emissions != lesioned.reports[t].emissions))
      report.first_divergence_tick = static_cast<Tick>(t);
  }
  return report;
}

// Baseline and lesioned simulations from identical initial state and seed.
// `stimuli`, when given, replaces the model's own schedule in both runs.
inline PairedRun run_paired(const ModelDef& model, const std::optional<StimulusSchedule>& stimuli,
                            const std::vector<Lesion>& lesions, Tick n_ticks, std::uint64_t seed) {
  const auto diags = validate(model);
  if (has_errors(diags)) throw Error(ErrorCode::InvalidModel, diags.front().message);
  if (n_ticks < 0) throw Error(ErrorCode::InvalidArgument, "negative tick count");

  auto shared = std::make_shared<const ModelDef>(model);
  Simulation baseline(shared, seed);
  Simulation lesioned(shared, seed);
  if (stimuli) {
    baseline.set_stimuli(*stimuli);
    lesioned.set_stimuli(*stimuli);
  }
  for (const auto& l : lesions) apply_lesion(lesioned, l);

  PairedRun out;
  out.baseline = record_run(baseline, n_ticks);
  out.lesioned = record_run(lesioned, n_ticks);
  out.report = compare_traces(model, out.baseline, out.lesioned);
  return out;
}

}  // namespace cellulat
