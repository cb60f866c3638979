#pragma once

#include <algorithm>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cellulat/blackboard.hpp"
#include "cellulat/model.hpp"
#include "cellulat/text.hpp"

namespace cellulat {

struct TraceRow {
  Tick tick = 0;
  std::string level;
  std::string region;
  std::string species;
  double quantity = 0.0;

  bool operator==(const TraceRow&) const = default;
};

// Dense time series: once a (species, locus) pair has been nonzero it gets a
// row at every later tick, zero or not. Rows within a tick are ordered by
// (level rank, region, species).
class TraceRecorder {
 public:
  explicit TraceRecorder(const ModelDef& model) {
    for (const auto& l : model.levels) ranks_.emplace_back(l.name, l.rank);
  }

  void observe(Tick tick, const Blackboard& board) {
    for (const auto& [key, q] : board.quantities())
      if (q != 0.0) seen_.insert(SeenKey{rank_of(key.locus.level), key.locus.region, key.species, key.locus.level});
    for (const auto& k : seen_)
      rows_.push_back(TraceRow{tick, k.level, k.region, k.species, board.read(k.species, Locus{k.level, k.region})});
  }

  const std::vector<TraceRow>& rows() const { return rows_; }

  std::vector<TraceRow> rows_since(Tick from) const {
    std::vector<TraceRow> out;
    std::copy_if(rows_.begin(), rows_.end(), std::back_inserter(out), [&](const TraceRow& r) { return r.tick >= from; });
    return out;
  }

 private:
  struct SeenKey {
    int rank;
    std::string region;
    std::string species;
    std::string level;

    auto operator<=>(const SeenKey&) const = default;
  };

  int rank_of(const std::string& level) const {
    for (const auto& [name, rank] : ranks_)
      if (name == level) return rank;
    return -1;
  }

  std::vector<std::pair<std::string, int>> ranks_;
  std::set<SeenKey> seen_;
  std::vector<TraceRow> rows_;
};

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << "tick,level,region,species,quantity\n";
  for (const auto& r : rows)
    os << r.tick << ',' << r.level << ',' << r.region << ',' << r.species << ',' << format_real(r.quantity) << '\n';
}

}  // namespace cellulat
