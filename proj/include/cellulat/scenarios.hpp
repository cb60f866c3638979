#pragma once

#include <string>
#include <vector>

#include "cellulat/error.hpp"

namespace cellulat {

struct Scenario {
  std::string name;
  std::string text;         // DSL source
  std::string description;
  std::string manifest;     // JSON expected-properties document, may be empty
};

// Kept byte-identical to scenarios/ca2plus.cellulat and
// scenarios/ca2plus.expected.json (checked by the scenario tests).
inline constexpr const char* kCa2plusText = R"cellulat(# Ca2+ signalling through a G-protein-linked surface receptor.
#
# Receptor (interface) -> G protein -> phospholipase C-beta -> IP3-gated
# release from the ER store -> protein kinase C -> secretion (interface).
# Every quantity, threshold and stoichiometric coefficient below is a
# scenario constant chosen at unit scale, not a measured value.
#
# Priorities run downstream-first so that a signal written in one tick is
# acted on only in the next one: each hop of the chain costs exactly a tick.

model ca2plus
meta description "Ca2+ signalling pathway through a G-protein-linked receptor"

level membrane kind membrane rank 0
level cytosol kind cytosol rank 1
level endoplasmic_reticulum kind organelle rank 2
level nucleus kind nucleus rank 3

signal PIP2 kind messenger decay 0.0
signal IP3 kind messenger decay 0.0
signal DAG kind messenger decay 0.0
signal Ca2plus kind messenger decay 0.0
signal ER_Ca_store kind messenger decay 0.0
signal R_active kind flag decay 0.0
signal Gp_active kind flag decay 0.0
signal PKC_active kind flag decay 0.0

ligand L1
ligand L2

init PIP2 at membrane/gpcr_patch amount 100.0
init ER_Ca_store at endoplasmic_reticulum/gpcr_patch amount 50.0

stimulus L1 amount 5.0 from 0 to 10

interface GPCR priority 0 multiplicity 1 probability 1.0 region gpcr_patch
  when ligand L1 >= 1.0
  set R_active at membrane value 1.0
end

agent Gprotein priority 1 multiplicity 1 probability 1.0 region gpcr_patch
  when R_active at membrane >= 1.0
  set Gp_active at membrane value 1.0
end

agent PLCbeta priority 2 multiplicity 1 probability 1.0 region gpcr_patch
  when Gp_active at membrane >= 1.0 and PIP2 at membrane >= 1.0
  consume PIP2 at membrane amount 1.0
  produce IP3 at cytosol amount 1.0
  produce DAG at membrane amount 1.0
end

# Calcium release from the ER store, gated by IP3.
agent ERchannel priority 3 multiplicity 1 probability 1.0 region gpcr_patch
  when IP3 at cytosol >= 1.0 and ER_Ca_store at endoplasmic_reticulum >= 1.0
  consume ER_Ca_store at endoplasmic_reticulum amount 1.0
  produce Ca2plus at cytosol amount 1.0
end

agent PKC priority 4 multiplicity 1 probability 1.0 region gpcr_patch
  when DAG at membrane >= 1.0 and Ca2plus at cytosol >= 1.0
  set PKC_active at cytosol value 1.0
end

# Not part of the receptor-to-kinase chain; closes the loop to the
# external medium through the secretion machinery.
interface Secretor priority 5 multiplicity 1 probability 1.0 region gpcr_patch
  when PKC_active at cytosol >= 1.0
  emit L2 amount 1.0
end
)cellulat";

inline constexpr const char* kCa2plusManifest = R"cellulat({
  "scenario": "ca2plus",
  "seed": 7,
  "stimulus": { "ligand": "L1", "amount": 5.0, "from_tick": 0, "to_tick": 10 },
  "causal_chain": ["GPCR", "Gprotein", "PLCbeta", "ERchannel", "PKC"],
  "first_firing_tick": { "GPCR": 0, "Gprotein": 1, "PLCbeta": 2, "ERchannel": 3, "PKC": 4 },
  "first_emission_tick": { "Secretor": 5 },
  "first_nonzero_trace_tick": { "IP3": 3, "DAG": 3, "Ca2plus": 4 },
  "conservation": [
    { "consumed": "PIP2", "produced": ["IP3", "DAG"] },
    { "consumed": "ER_Ca_store", "produced": ["Ca2plus"] }
  ],
  "columns": [
    {
      "region": "gpcr_patch",
      "levels_spanned": ["cytosol", "endoplasmic_reticulum", "membrane"],
      "pathway_members": ["ERchannel", "GPCR", "Gprotein", "PKC", "PLCbeta"]
    }
  ],
  "lesions": [
    { "spec": "knockout:PLCbeta@0", "ticks": 100, "zero_species": ["IP3", "DAG", "Ca2plus"] },
    { "spec": "clamp:Ca2plus:cytosol/gpcr_patch:0@0", "ticks": 100, "zero_firings": ["PKC"] },
    { "spec": "knockout:Gprotein@0", "ticks": 50, "first_divergence_tick": 1 }
  ]
}
)cellulat";

inline Scenario ca2plus_scenario() {
  return Scenario{"ca2plus", kCa2plusText,
                  "Ca2+ pathway: receptor, G protein, PLC-beta, ER calcium release, PKC, secretion",
                  kCa2plusManifest};
}

// S0 -> S1 -> ... -> Sn on one level. A1 is an interface agent that needs the
// ligand L; every later Ai moves one unit from S(i-1) to Si. S0 starts with a
// large pool and L pulses at tick 0, so Sn first appears on the board n ticks
// later. A1 also reads Sn as a saturation guard, which keeps the end of the
// chain observed (no dead-end species).
inline Scenario toy_linear_chain(int n) {
  if (n < 1 || n > 64) throw Error(ErrorCode::InvalidArgument, "chain length must lie in [1, 64]");
  const std::string s = "S";
  std::string t = "model chain_" + std::to_string(n) + "\n\n";
  t += "level cytosol kind cytosol rank 0\n\n";
  for (int i = 0; i <= n; ++i) t += "signal S" + std::to_string(i) + " kind messenger decay 0.0\n";
  t += "\nligand L\n\n";
  t += "init S0 at cytosol amount 1000.0\n\n";
  t += "stimulus L amount 1.0 from 0 to 0\n";
  for (int i = 1; i <= n; ++i) {
    const std::string prev = s + std::to_string(i - 1);
    const std::string next = s + std::to_string(i);
    t += "\n";
    t += (i == 1 ? "interface A" : "agent A") + std::to_string(i) + " priority " + std::to_string(i) +
         " multiplicity 1 probability 1.0\n";
    t += "  when ";
    if (i == 1) t += "ligand L >= 1.0 and ";
    t += prev + " at cytosol >= 1.0";
    if (i == 1) t += " and S" + std::to_string(n) + " at cytosol < 1000.0";
    t += "\n";
    t += "  consume " + prev + " at cytosol amount 1.0\n";
    t += "  produce " + next + " at cytosol amount 1.0\n";
    t += "end\n";
  }
  return Scenario{"chain_" + std::to_string(n), t, "linear transfer chain of length " + std::to_string(n), ""};
}

inline std::vector<Scenario> bundled_scenarios() { return {ca2plus_scenario(), toy_linear_chain(8)}; }

}  // namespace cellulat
