#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "cellulat/dsl.hpp"
#include "cellulat/scenarios.hpp"
#include "test_support.hpp"

namespace cellulat {
namespace {

using testing::ModelGenerator;
using testing::parse_or_die;

std::vector<std::string> codes(const std::vector<Diagnostic>& ds, Severity sev) {
  std::vector<std::string> out;
  for (const auto& d : ds)
    if (d.severity == sev) out.push_back(d.code);
  return out;
}

std::vector<std::string> error_codes(std::string_view text) { return codes(parse(text).diagnostics, Severity::Error); }

TEST(DslTest, MinimalModel) {
  ParseResult r = parse("model m \n level cytosol kind cytosol rank 0");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.model->levels.size(), 1u);
  EXPECT_EQ(r.model->levels[0].name, "cytosol");
  EXPECT_TRUE(r.model->agents.empty());
}

TEST(DslTest, UnknownSpeciesReportedAtReferencingLine) {
  ParseResult r = parse(R"(model m
level cytosol kind cytosol rank 0
signal A kind messenger

agent P
  when X at cytosol >= 1.0
  produce A at cytosol amount 1.0
end
)");
  ASSERT_FALSE(r.ok());
  ASSERT_EQ(codes(r.diagnostics, Severity::Error), std::vector<std::string>{"unknown_species"});
  EXPECT_EQ(r.diagnostics[0].loc.line, 6);
  EXPECT_EQ(r.diagnostics[0].loc.column, 8);
  EXPECT_EQ(format_diagnostic("m.cellulat", r.diagnostics[0]).substr(0, 35), "m.cellulat:6:8: error[unknown_speci");
}

TEST(DslTest, BundledScenarioIsClean) {
  ParseResult r = parse(ca2plus_scenario().text);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.diagnostics.empty());
  EXPECT_TRUE(validate(*r.model).empty());
}

TEST(DslTest, UnreachableAgentWarning) {
  ParseResult r = parse(R"(model m
level c kind cytosol rank 0
signal A kind messenger
signal B kind messenger
agent P
  when A at c >= 1.0
  produce B at c amount 1.0
end
agent Q
  when B at c >= 1.0
  consume B at c amount 1.0
end
)");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(codes(r.diagnostics, Severity::Warning), std::vector<std::string>{"unreachable_agent"});
}

TEST(DslTest, DeadEndSpeciesWarning) {
  ParseResult r = parse("model m\nlevel c kind cytosol rank 0\nsignal A kind messenger\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(codes(r.diagnostics, Severity::Warning), std::vector<std::string>{"dead_end_species"});
}

struct BadCase {
  const char* name;
  std::string body;
  const char* code;
};

const std::string kHead = "model m\nlevel c kind cytosol rank 0\nlevel n kind nucleus rank 1\n"
                          "signal A kind messenger\nsignal F kind flag\nligand L\n";

std::string agent(const std::string& header, const std::string& body) { return header + "\n" + body + "end\n"; }

TEST(DslTest, EveryErrorCodeHasATrigger) {
  const std::vector<BadCase> cases{
      {"lexical", kHead + "init A at c amount 1.0 $\n", "lexical_error"},
      {"unterminated string", kHead + "meta k \"open\n", "lexical_error"},
      {"syntax", kHead + "level x kind cytosol\n", "syntax_error"},
      {"unknown declaration", kHead + "enzyme X\n", "syntax_error"},
      {"reserved word", kHead + "signal and kind messenger\n", "syntax_error"},
      {"missing model", "level c kind cytosol rank 0\n", "missing_model"},
      {"missing condition", kHead + agent("agent P", "  produce A at c amount 1.0\n"), "missing_condition"},
      {"duplicate level", kHead + "level c kind nucleus rank 7\n", "duplicate_declaration"},
      {"duplicate agent", kHead + agent("agent P", "  when A at c >= 1.0\n") + agent("agent P", "  when A at c >= 1.0\n"),
       "duplicate_declaration"},
      {"no levels", "model m\n", "no_levels"},
      {"rank", kHead + "level x kind custom rank -1\n", "rank_domain"},
      {"duplicate rank", kHead + "level x kind custom rank 1\n", "duplicate_rank"},
      {"decay", kHead + "signal D kind messenger decay 1.5\n", "decay_domain"},
      {"flag decay", kHead + "signal D kind flag decay 0.5\n", "decay_domain"},
      {"unknown species", kHead + "init Z at c amount 1.0\n", "unknown_species"},
      {"unknown level", kHead + "init A at golgi amount 1.0\n", "unknown_level"},
      {"unknown ligand", kHead + "stimulus M amount 1.0 from 0 to 1\n", "unknown_ligand"},
      {"unknown node", kHead + agent("agent P", "  boolnet output y steps 1\n    input x = A at c >= 1.0\n  end\n"),
       "unknown_node"},
      {"duplicate init", kHead + "init A at c amount 1.0\ninit A at c amount 2.0\n", "duplicate_initializer"},
      {"negative init", kHead + "init A at c amount -1.0\n", "negative_quantity"},
      {"flag init", kHead + "init F at c amount 0.5\n", "flag_domain"},
      {"flag produce", kHead + agent("agent P", "  when A at c >= 1.0\n  produce F at c amount 1.0\n"), "flag_domain"},
      {"set messenger", kHead + agent("agent P", "  when A at c >= 1.0\n  set A at c value 1.0\n"), "flag_domain"},
      {"stimulus window", kHead + "stimulus L amount 1.0 from 5 to 2\n", "stimulus_range"},
      {"multiplicity", kHead + agent("agent P multiplicity 0", "  when A at c >= 1.0\n"), "multiplicity_domain"},
      {"probability zero", kHead + agent("agent P probability 0.0", "  when A at c >= 1.0\n"), "probability_domain"},
      {"probability high", kHead + agent("agent P probability 1.5", "  when A at c >= 1.0\n"), "probability_domain"},
      {"ligand in internal", kHead + agent("agent P", "  when ligand L >= 1.0\n"), "class_constraint"},
      {"emit from internal", kHead + agent("agent P", "  when A at c >= 1.0\n  emit L amount 1.0\n"), "class_constraint"},
      {"out of range number", kHead + agent("agent P", "  when A at c >= 1e999\n"), "syntax_error"},
      {"table size", kHead + agent("agent P", "  boolnet output y steps 1\n    input x = A at c >= 1.0\n"
                                              "    node y = table x : 011\n  end\n"),
       "boolnet_error"},
      {"steps", kHead + agent("agent P", "  boolnet output x steps 0\n    input x = A at c >= 1.0\n  end\n"),
       "boolnet_error"},
      {"amount", kHead + agent("agent P", "  when A at c >= 1.0\n  produce A at c amount 0.0\n"), "amount_domain"},
      {"unclosed", kHead + "agent P\n  when A at c >= 1.0\n", "syntax_error"},
  };
  for (const auto& c : cases) {
    auto errs = error_codes(c.body);
    ASSERT_FALSE(errs.empty()) << c.name;
    EXPECT_EQ(errs.front(), c.code) << c.name;
  }
}

TEST(DslTest, ProbabilityZeroIsDomainError) {
  auto errs = error_codes(kHead + agent("agent P probability 0.0", "  when A at c >= 1.0\n"));
  EXPECT_EQ(errs, std::vector<std::string>{"probability_domain"});
}

TEST(DslTest, ConditionArityCheckedOnHandBuiltModels) {
  ModelDef m = parse_or_die(kHead);
  AgentDef a;
  a.id = "P";
  a.trigger = Condition::all_of({Condition::leaf(Atom::signal("A", Locus{"c", "global"}, Comparator::Ge, 1.0))});
  m.agents.push_back(a);
  EXPECT_EQ(codes(validate(m), Severity::Error), std::vector<std::string>{"condition_arity"});
}

TEST(DslTest, NonFiniteThresholdCheckedOnHandBuiltModels) {
  ModelDef m = parse_or_die(kHead);
  AgentDef a;
  a.id = "P";
  a.trigger = Condition::leaf(Atom::signal("A", Locus{"c", "global"}, Comparator::Ge, std::numeric_limits<double>::infinity()));
  m.agents.push_back(a);
  EXPECT_EQ(codes(validate(m), Severity::Error), std::vector<std::string>{"threshold_domain"});
}

TEST(DslTest, RegionDefaultsFromAgentHeader) {
  ModelDef m = parse_or_die(kHead + agent("agent P region patch", "  when A at c >= 1.0 and A at n/other >= 2\n"
                                                                  "  produce A at n amount 1.0\n"));
  const auto& a = m.agents[0];
  EXPECT_EQ(a.effects[0].locus, (Locus{"n", "patch"}));
  const auto& cond = std::get<Condition>(a.trigger);
  EXPECT_EQ(cond.children[0].atom.locus, (Locus{"c", "patch"}));
  EXPECT_EQ(cond.children[1].atom.locus, (Locus{"n", "other"}));
}

TEST(DslTest, OperatorPrecedence) {
  ModelDef m = parse_or_die(kHead + agent("agent P", "  when A at c >= 1 or A at n >= 1 and not F at c == 1\n"));
  const auto& cond = std::get<Condition>(m.agents[0].trigger);
  ASSERT_EQ(cond.op, Condition::Op::Or);
  ASSERT_EQ(cond.children.size(), 2u);
  EXPECT_EQ(cond.children[1].op, Condition::Op::And);
  EXPECT_EQ(cond.children[1].children[1].op, Condition::Op::Not);
}

TEST(DslTest, ScenarioRoundTrip) {
  const ModelDef m = parse_or_die(ca2plus_scenario().text);
  const std::string printed = pretty_print(m);
  EXPECT_EQ(parse_or_die(printed), m);
  EXPECT_EQ(pretty_print(parse_or_die(printed)), printed);
}

TEST(DslTest, ChainRoundTrip) {
  for (int n : {1, 8, 64}) {
    const ModelDef m = parse_or_die(toy_linear_chain(n).text);
    EXPECT_EQ(parse_or_die(pretty_print(m)), m);
  }
}

TEST(DslTest, AgentlessModelRoundTrip) {
  const ModelDef m = parse_or_die(kHead + "init A at c/r amount 2.5\nstimulus L amount 1 from 0 to 3\nmeta k \"a \\\"q\\\"\"\n");
  EXPECT_EQ(m.metadata.front().second, "a \"q\"");
  EXPECT_EQ(parse_or_die(pretty_print(m)), m);
}

TEST(DslTest, RandomModelsRoundTrip) {
  ModelGenerator gen(8128);
  for (int i = 0; i < 200; ++i) {
    const ModelDef m = gen.generate();
    const std::string printed = pretty_print(m);
    ParseResult r = parse(printed);
    ASSERT_TRUE(r.ok()) << printed << (r.diagnostics.empty() ? "" : format_diagnostic("gen", r.diagnostics[0]));
    EXPECT_EQ(*r.model, m) << printed;
    EXPECT_EQ(pretty_print(*r.model), printed);
  }
}

// Totality: arbitrary edits of a valid file never throw and never produce a
// model alongside errors.
TEST(DslTest, MutatedInputNeverThrows) {
  const std::string base = ca2plus_scenario().text;
  const std::string alphabet = "abcXYZ019 .:/<>=()\"#\n\t-+e_$";
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 2000; ++i) {
    std::string text = base;
    const int edits = 1 + static_cast<int>(rng() % 6);
    for (int e = 0; e < edits; ++e) {
      const std::size_t pos = rng() % (text.size() + 1);
      switch (rng() % 3) {
        case 0: text.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
        case 1:
          if (pos < text.size()) text.erase(pos, 1 + rng() % 8);
          break;
        default:
          if (pos < text.size()) text[pos] = alphabet[rng() % alphabet.size()];
      }
    }
    ParseResult r;
    ASSERT_NO_THROW(r = parse(text)) << text;
    EXPECT_EQ(r.ok(), !has_errors(r.diagnostics));
    for (const auto& d : r.diagnostics) EXPECT_GE(d.loc.line, 1);
  }
}

TEST(DslTest, RandomBytesNeverThrow) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    std::string text(rng() % 200, '\0');
    for (auto& c : text) c = static_cast<char>(rng() % 256);
    EXPECT_NO_THROW(parse(text));
  }
}

// An error in one agent block does not cascade into its neighbours.
TEST(DslTest, ErrorsStayLocal) {
  const std::string text = kHead + agent("agent P", "  when A at c >= 1.0\n  produce A at c amount 1.0\n") +
                           agent("agent Q", "  when A at c >=\n  produce A at c amount 1.0\n") +
                           agent("agent R", "  when A at c >= 1.0\n  produce A at c amount 1.0\n");
  ParseResult r = parse(text);
  ASSERT_EQ(r.diagnostics.size(), 1u) << format_diagnostic("x", r.diagnostics[1]);
  EXPECT_EQ(r.diagnostics[0].code, "syntax_error");
  EXPECT_EQ(r.diagnostics[0].loc.line, 12);  // the truncated when line
}

TEST(DslTest, UnclosedBlockDoesNotSwallowNextAgent) {
  const std::string text = kHead + "agent P\n  when A at c >= 1.0\n" +
                           agent("agent Q", "  when A at c >= 1.0\n  produce A at c amount 1.0\n");
  ParseResult r = parse(text);
  auto errs = codes(r.diagnostics, Severity::Error);
  EXPECT_EQ(errs, std::vector<std::string>{"syntax_error"});
  EXPECT_EQ(r.diagnostics[0].loc.line, 7);
}

}  // namespace
}  // namespace cellulat
