#include <gtest/gtest.h>

#include "cellulat/agent.hpp"
#include "test_support.hpp"

namespace cellulat {
namespace {

using testing::parse_or_die;

const char* kPathway = R"(
model pathway
level membrane kind membrane rank 0
level cytosol kind cytosol rank 1
signal PIP2 kind messenger
signal IP3 kind messenger
signal DAG kind messenger
signal Gp_active kind flag
signal PKC_active kind flag
ligand L1
ligand L2

agent PLCbeta
  when Gp_active at membrane >= 1.0 and PIP2 at membrane >= 1.0
  consume PIP2 at membrane amount 1.0
  produce IP3 at cytosol amount 1.0
  produce DAG at membrane amount 1.0
end

interface Secretor
  when PKC_active at cytosol >= 1.0
  emit L2 amount 1.0
end

interface Receptor
  when ligand L1 >= 1.0 and not IP3 at cytosol >= 1.0
  set Gp_active at membrane value 1.0
end
)";

const Locus kMembrane{"membrane", "global"};
const Locus kCytosol{"cytosol", "global"};

struct Fixture : ::testing::Test {
  ModelDef model = parse_or_die(kPathway);
  Blackboard board{model};
  SeededRng rng{1};
  StimulusView none;

  const AgentDef& agent(const std::string& id) { return *model.find_agent(id); }
};

TEST_F(Fixture, AtomBelowThresholdIsFalse) {
  Atom a = Atom::signal("IP3", kCytosol, Comparator::Ge, 1.0);
  EXPECT_FALSE(holds(a, board, none));
}

TEST_F(Fixture, ConjunctionOfActiveGProteinAndSubstrate) {
  board.apply("t", "Gp_active", kMembrane, WriteKind::Set, 1.0);
  board.apply("t", "PIP2", kMembrane, WriteKind::Add, 100.0);
  EXPECT_TRUE(evaluate_condition(agent("PLCbeta"), board, none));
}

TEST_F(Fixture, ComparatorsAtBoundary) {
  EXPECT_TRUE(compare(1.0, Comparator::Ge, 1.0));
  EXPECT_FALSE(compare(1.0, Comparator::Gt, 1.0));
  EXPECT_TRUE(compare(1.0, Comparator::Le, 1.0));
  EXPECT_FALSE(compare(1.0, Comparator::Lt, 1.0));
  EXPECT_TRUE(compare(1.0, Comparator::Eq, 1.0));
}

TEST_F(Fixture, IdentityBooleanNetMatchesAtom) {
  BooleanNet net;
  BoolNode in;
  in.name = "x";
  in.input = Atom::signal("IP3", kCytosol, Comparator::Ge, 1.0);
  net.nodes.push_back(in);
  BoolNode out;
  out.name = "y";
  out.inputs = {"x"};
  out.table = "01";
  net.nodes.push_back(out);
  net.output = "y";
  net.sync_steps = 1;
  EXPECT_FALSE(evaluate(net, board, none));
  board.apply("t", "IP3", kCytosol, WriteKind::Add, 1.0);
  EXPECT_TRUE(evaluate(net, board, none));
}

// Two inputs through a two-layer net: the second layer only sees the first
// after two synchronous updates.
TEST_F(Fixture, BooleanNetPropagatesOneLayerPerStep) {
  BooleanNet net;
  BoolNode a{"a", Atom::signal("IP3", kCytosol, Comparator::Ge, 1.0), {}, "", {}};
  BoolNode b{"b", Atom::signal("DAG", kMembrane, Comparator::Ge, 1.0), {}, "", {}};
  BoolNode both{"both", std::nullopt, {"a", "b"}, "0001", {}};
  BoolNode relay{"relay", std::nullopt, {"both"}, "01", {}};
  net.nodes = {a, b, both, relay};
  net.output = "relay";
  board.apply("t", "IP3", kCytosol, WriteKind::Add, 1.0);
  board.apply("t", "DAG", kMembrane, WriteKind::Add, 1.0);
  net.sync_steps = 1;
  EXPECT_FALSE(evaluate(net, board, none));
  net.sync_steps = 2;
  EXPECT_TRUE(evaluate(net, board, none));
  // First listed input is the high bit of the row index.
  net.nodes[2].table = "0010";  // a=1, b=0
  EXPECT_FALSE(evaluate(net, board, none));
}

TEST_F(Fixture, PlcBetaFiringMovesOneUnit) {
  board.apply("t", "Gp_active", kMembrane, WriteKind::Set, 1.0);
  board.apply("t", "PIP2", kMembrane, WriteKind::Add, 100.0);
  FiringOutcome out = fire(agent("PLCbeta"), board, rng);
  EXPECT_TRUE(out.fired);
  ASSERT_EQ(out.events.size(), 3u);
  EXPECT_EQ(out.events[0].kind, WriteKind::Remove);
  EXPECT_EQ(board.read("PIP2", kMembrane), 99.0);
  EXPECT_EQ(board.read("IP3", kCytosol), 1.0);
  EXPECT_EQ(board.read("DAG", kMembrane), 1.0);
}

TEST_F(Fixture, EmptySubstrateLeavesBoardUntouched) {
  board.apply("t", "Gp_active", kMembrane, WriteKind::Set, 1.0);
  const auto before = board.quantities();
  const auto log_size = board.log().size();
  FiringOutcome out = fire(agent("PLCbeta"), board, rng);
  EXPECT_FALSE(out.fired);
  EXPECT_EQ(out.skip_reason, SkipReason::ConsumeUnsatisfiable);
  EXPECT_TRUE(out.events.empty());
  EXPECT_EQ(board.quantities(), before);
  EXPECT_EQ(board.log().size(), log_size);
}

TEST_F(Fixture, CertainFiringNeverDependsOnSeed) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Blackboard b(model);
    b.apply("t", "PIP2", kMembrane, WriteKind::Add, 5.0);
    SeededRng r(seed);
    EXPECT_TRUE(fire(agent("PLCbeta"), b, r).fired);
    EXPECT_EQ(r.draws(), 0u);
  }
}

TEST_F(Fixture, StochasticFiringFrequency) {
  AgentDef a = agent("PLCbeta");
  a.firing_probability = 0.25;
  int fired = 0;
  for (int i = 0; i < 4000; ++i) {
    Blackboard b(model);
    b.apply("t", "PIP2", kMembrane, WriteKind::Add, 1.0);
    if (fire(a, b, rng).fired) ++fired;
  }
  EXPECT_NEAR(fired / 4000.0, 0.25, 0.03);
}

TEST_F(Fixture, MultiplicityAllowedByResources) {
  AgentDef a = agent("PLCbeta");
  a.multiplicity = 3;
  board.apply("t", "Gp_active", kMembrane, WriteKind::Set, 1.0);
  board.apply("t", "PIP2", kMembrane, WriteKind::Add, 10.0);
  auto outs = fire_multiple(a, board, none, rng);
  ASSERT_EQ(outs.size(), 3u);
  for (const auto& o : outs) EXPECT_TRUE(o.fired);
  EXPECT_EQ(board.read("IP3", kCytosol), 3.0);
}

TEST_F(Fixture, MultiplicityLimitedBySubstrate) {
  AgentDef a = agent("PLCbeta");
  a.multiplicity = 3;
  board.apply("t", "Gp_active", kMembrane, WriteKind::Set, 1.0);
  board.apply("t", "PIP2", kMembrane, WriteKind::Add, 2.0);
  auto outs = fire_multiple(a, board, none, rng);
  int fired = 0;
  for (const auto& o : outs) fired += o.fired;
  EXPECT_EQ(fired, 2);
  EXPECT_EQ(board.read("PIP2", kMembrane), 0.0);
  // The third copy sees the exhausted substrate in its condition.
  EXPECT_EQ(outs.back().skip_reason, SkipReason::ConditionFalse);
}

TEST_F(Fixture, MultiplicityOneEqualsFire) {
  board.apply("t", "Gp_active", kMembrane, WriteKind::Set, 1.0);
  board.apply("t", "PIP2", kMembrane, WriteKind::Add, 4.0);
  Blackboard copy = board;
  SeededRng r1(5), r2(5);
  auto outs = fire_multiple(agent("PLCbeta"), board, none, r1);
  ASSERT_EQ(outs.size(), 1u);
  EXPECT_EQ(outs[0], fire(agent("PLCbeta"), copy, r2));
  EXPECT_EQ(board.quantities(), copy.quantities());
}

TEST_F(Fixture, AttenuationScalesAmounts) {
  board.apply("t", "PIP2", kMembrane, WriteKind::Add, 4.0);
  fire(agent("PLCbeta"), board, rng, 0.5);
  EXPECT_EQ(board.read("IP3", kCytosol), 0.5);
  EXPECT_EQ(board.read("PIP2", kMembrane), 3.5);
}

TEST_F(Fixture, SecretionGatedOnFlag) {
  EXPECT_TRUE(emit_external(agent("Secretor"), board, none).empty());
  board.apply("t", "PKC_active", kCytosol, WriteKind::Set, 1.0);
  auto out = emit_external(agent("Secretor"), board, none);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (ExternalEmission{"Secretor", "L2", 1.0}));
}

TEST_F(Fixture, InternalAgentCannotEmit) {
  std::string text = kPathway;
  text.replace(text.find("  produce DAG"), 0, "  emit L2 amount 1.0\n");
  ParseResult r = parse(text);
  ASSERT_FALSE(r.ok());
  bool found = false;
  for (const auto& d : r.diagnostics) found = found || d.code == "class_constraint";
  EXPECT_TRUE(found);
}

TEST_F(Fixture, SensedInputsOfCondition) {
  Condition c = Condition::all_of({Condition::leaf(Atom::signal("A", Locus{"m", "global"}, Comparator::Ge, 1.0)),
                                   Condition::negate(Condition::leaf(Atom::signal("B", Locus{"c", "global"}, Comparator::Ge, 1.0)))});
  AgentDef a;
  a.id = "x";
  a.trigger = c;
  SensedInputs in = sensed_inputs(a);
  EXPECT_EQ(in.signals, (std::set<SignalKey>{{"A", Locus{"m", "global"}}, {"B", Locus{"c", "global"}}}));
  EXPECT_TRUE(in.ligands.empty());
}

TEST_F(Fixture, SensedInputsOfReceptor) {
  SensedInputs in = sensed_inputs(agent("Receptor"));
  EXPECT_EQ(in.ligands, std::set<std::string>{"L1"});
  EXPECT_EQ(in.signals, (std::set<SignalKey>{{"IP3", kCytosol}}));
}

TEST_F(Fixture, SensedInputsOfBooleanNet) {
  BooleanNet net;
  net.nodes.push_back({"x", Atom::signal("IP3", kCytosol, Comparator::Ge, 1.0), {}, "", {}});
  net.nodes.push_back({"y", Atom::ligand("L1", Comparator::Ge, 1.0), {}, "", {}});
  net.nodes.push_back({"z", std::nullopt, {"x", "y"}, "0111", {}});
  net.output = "z";
  AgentDef a;
  a.id = "net";
  a.cls = AgentClass::Interface;
  a.trigger = net;
  SensedInputs in = sensed_inputs(a);
  EXPECT_EQ(in.signals, (std::set<SignalKey>{{"IP3", kCytosol}}));
  EXPECT_EQ(in.ligands, std::set<std::string>{"L1"});
}

TEST_F(Fixture, ProbabilityDrawPrecedesConsumeCheck) {
  AgentDef a = agent("PLCbeta");
  a.firing_probability = 0.5;
  SeededRng r(9);
  fire(a, board, r);  // PIP2 empty, but the draw still happens
  EXPECT_EQ(r.draws(), 1u);
}

}  // namespace
}  // namespace cellulat
