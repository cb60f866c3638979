#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cellulat/model.hpp"

namespace cellulat {

// Agents operating on one region across two or more levels.
struct AgencyColumn {
  std::string region;
  std::set<std::string> levels_spanned;
  std::set<std::string> members;

  bool operator==(const AgencyColumn&) const = default;
  auto operator<=>(const AgencyColumn&) const = default;
};

inline std::set<Locus> sensed_loci(const AgentDef& agent) {
  std::set<Locus> out;
  for_each_atom(agent, [&](const Atom& a) {
    if (a.source == Atom::Source::Signal) out.insert(a.locus);
  });
  return out;
}

inline std::set<Locus> affected_loci(const AgentDef& agent) {
  std::set<Locus> out;
  for (const auto& e : agent.effects) out.insert(e.locus);
  return out;
}

// Columns come from declared structure only: each agent touches the loci it
// senses or writes, and a region becomes a column once its agents jointly
// reach two levels. Result is sorted by region. `excluded` agents (e.g.
// knocked out) are left out of the grouping.
inline std::vector<AgencyColumn> detect_columns(const ModelDef& model, const std::set<std::string>& excluded = {}) {
  std::map<std::string, AgencyColumn> by_region;
  for (const auto& agent : model.agents) {
    if (excluded.count(agent.id)) continue;
    std::set<Locus> touched = sensed_loci(agent);
    touched.merge(affected_loci(agent));
    for (const auto& locus : touched) {
      AgencyColumn& col = by_region[locus.region];
      col.region = locus.region;
      col.levels_spanned.insert(locus.level);
      col.members.insert(agent.id);
    }
  }
  std::vector<AgencyColumn> out;
  for (auto& [region, col] : by_region)
    if (col.levels_spanned.size() >= 2) out.push_back(std::move(col));
  return out;
}

struct ColumnMerge {
  std::vector<std::string> sources;  // regions of the "before" columns
  std::string target;                // region of the "after" column

  bool operator==(const ColumnMerge&) const = default;
};

struct ColumnSplit {
  std::string source;
  std::vector<std::string> targets;

  bool operator==(const ColumnSplit&) const = default;
};

struct MembershipChange {
  std::string region;
  std::set<std::string> added_members;
  std::set<std::string> removed_members;
  std::set<std::string> added_levels;
  std::set<std::string> removed_levels;

  bool operator==(const MembershipChange&) const = default;
};

struct ColumnDiffReport {
  std::vector<ColumnMerge> merged;
  std::vector<ColumnSplit> split;
  std::vector<AgencyColumn> appeared;
  std::vector<AgencyColumn> vanished;
  std::vector<MembershipChange> membership_changes;

  bool empty() const {
    return merged.empty() && split.empty() && appeared.empty() && vanished.empty() && membership_changes.empty();
  }
  bool operator==(const ColumnDiffReport&) const = default;
};

namespace columns_detail {

inline bool overlaps(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a)
    if (b.count(x)) return true;
  return false;
}

template <typename T>
std::set<T> minus(const std::set<T>& a, const std::set<T>& b) {
  std::set<T> out;
  for (const auto& x : a)
    if (!b.count(x)) out.insert(x);
  return out;
}

}  // namespace columns_detail

// Convergence shows up as an "after" column sharing members with several
// "before" columns (merged); divergence is the mirror image (split).
inline ColumnDiffReport column_diff(const std::vector<AgencyColumn>& before, const std::vector<AgencyColumn>& after) {
  using columns_detail::minus;
  using columns_detail::overlaps;
  ColumnDiffReport report;

  std::map<std::string, const AgencyColumn*> old_by_region, new_by_region;
  for (const auto& c : before) old_by_region[c.region] = &c;
  for (const auto& c : after) new_by_region[c.region] = &c;

  for (const auto& [region, col] : new_by_region) {
    auto it = old_by_region.find(region);
    if (it == old_by_region.end()) {
      report.appeared.push_back(*col);
    } else if (!(*it->second == *col)) {
      report.membership_changes.push_back({region, minus(col->members, it->second->members),
                                           minus(it->second->members, col->members),
                                           minus(col->levels_spanned, it->second->levels_spanned),
                                           minus(it->second->levels_spanned, col->levels_spanned)});
    }
  }
  for (const auto& [region, col] : old_by_region)
    if (!new_by_region.count(region)) report.vanished.push_back(*col);

  for (const auto& [region, col] : new_by_region) {
    ColumnMerge m{{}, region};
    for (const auto& [old_region, old_col] : old_by_region)
      if (overlaps(col->members, old_col->members)) m.sources.push_back(old_region);
    if (m.sources.size() >= 2) report.merged.push_back(std::move(m));
  }
  for (const auto& [region, col] : old_by_region) {
    ColumnSplit s{region, {}};
    for (const auto& [new_region, new_col] : new_by_region)
      if (overlaps(col->members, new_col->members)) s.targets.push_back(new_region);
    if (s.targets.size() >= 2) report.split.push_back(std::move(s));
  }
  return report;
}

struct LevelOccupancy {
  std::set<std::string> sensing;
  std::set<std::string> affecting;
  std::set<std::string> species;  // initialized or written on this level

  bool operator==(const LevelOccupancy&) const = default;
};

// Horizontal view: what happens on each level, independent of region.
inline std::map<std::string, LevelOccupancy> level_occupancy(const ModelDef& model) {
  std::map<std::string, LevelOccupancy> out;
  for (const auto& l : model.levels) out[l.name];
  auto at = [&](const std::string& level) -> LevelOccupancy* {
    auto it = out.find(level);
    return it == out.end() ? nullptr : &it->second;
  };
  for (const auto& init : model.initializers)
    if (auto* occ = at(init.locus.level)) occ->species.insert(init.species);
  for (const auto& agent : model.agents) {
    for (const auto& locus : sensed_loci(agent))
      if (auto* occ = at(locus.level)) occ->sensing.insert(agent.id);
    for (const auto& e : agent.effects) {
      if (auto* occ = at(e.locus.level)) {
        occ->affecting.insert(agent.id);
        occ->species.insert(e.species);
      }
    }
  }
  return out;
}

}  // namespace cellulat
