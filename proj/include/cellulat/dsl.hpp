#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cellulat/model.hpp"
#include "cellulat/text.hpp"

namespace cellulat {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  SourceLoc loc;

  bool operator==(const Diagnostic&) const = default;
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

inline std::string format_diagnostic(std::string_view file, const Diagnostic& d) {
  std::ostringstream os;
  os << file << ':' << d.loc.line << ':' << d.loc.column << ": "
     << (d.severity == Severity::Error ? "error" : "warning") << '[' << d.code << "]: " << d.message;
  return os.str();
}

struct ParseResult {
  std::optional<ModelDef> model;  // present iff diagnostics hold no errors
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return model.has_value(); }
};

inline std::vector<Diagnostic> validate(const ModelDef& model);

namespace dsl_detail {

inline const std::set<std::string, std::less<>>& reserved_words() {
  static const std::set<std::string, std::less<>> words{"and", "or", "not", "at", "ligand", "end", "table"};
  return words;
}

struct Token {
  enum class Kind { Ident, Number, String, Symbol };
  Kind kind = Kind::Ident;
  std::string text;
  SourceLoc loc;
};

using Line = std::vector<Token>;

// Splits source into non-empty logical lines of tokens. Never throws.
inline std::vector<Line> lex(std::string_view src, std::vector<Diagnostic>& diags) {
  std::vector<Line> lines;
  Line current;
  int line = 1;
  std::size_t line_start = 0;
  std::size_t i = 0;
  auto col = [&](std::size_t pos) { return static_cast<int>(pos - line_start) + 1; };
  auto flush = [&] {
    if (!current.empty()) lines.push_back(std::move(current));
    current.clear();
  };
  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };

  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      flush();
      ++line;
      line_start = ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    const SourceLoc loc{line, col(i)};
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident(src[j])) ++j;
      current.push_back({Token::Kind::Ident, std::string(src.substr(i, j - i)), loc});
      i = j;
      continue;
    }
    if (is_digit(c) || ((c == '-' || c == '+' || c == '.') && i + 1 < src.size() &&
                        (is_digit(src[i + 1]) || src[i + 1] == '.'))) {
      std::size_t j = i + 1;
      while (j < src.size()) {
        const char d = src[j];
        if (is_digit(d) || d == '.' || d == 'e' || d == 'E' ||
            ((d == '-' || d == '+') && (src[j - 1] == 'e' || src[j - 1] == 'E')))
          ++j;
        else
          break;
      }
      current.push_back({Token::Kind::Number, std::string(src.substr(i, j - i)), loc});
      i = j;
      continue;
    }
    if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < src.size() && src[j] != '\n') {
        if (src[j] == '\\' && j + 1 < src.size() && (src[j + 1] == '"' || src[j + 1] == '\\')) {
          value += src[j + 1];
          j += 2;
          continue;
        }
        if (src[j] == '"') {
          closed = true;
          ++j;
          break;
        }
        value += src[j++];
      }
      if (!closed) {
        diags.push_back({Severity::Error, "lexical_error", "unterminated string", loc});
        i = j;
        continue;
      }
      current.push_back({Token::Kind::String, std::move(value), loc});
      i = j;
      continue;
    }
    static constexpr std::string_view two[] = {">=", "<=", "=="};
    bool matched = false;
    for (auto sym : two) {
      if (src.substr(i, 2) == sym) {
        current.push_back({Token::Kind::Symbol, std::string(sym), loc});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("<>=()/:").find(c) != std::string_view::npos) {
      current.push_back({Token::Kind::Symbol, std::string(1, c), loc});
      ++i;
      continue;
    }
    diags.push_back({Severity::Error, "lexical_error", std::string("unexpected character '") + c + "'", loc});
    ++i;
  }
  flush();
  return lines;
}

struct SyntaxError {
  std::string message;
  SourceLoc loc;
};

// Token cursor over one line.
class Cursor {
 public:
  explicit Cursor(const Line& line) : line_(line) {}

  bool done() const { return pos_ >= line_.size(); }
  const Token& peek() const { return line_[pos_]; }
  SourceLoc loc() const { return done() ? end_loc() : peek().loc; }

  bool accept(std::string_view word) {
    if (!done() && peek().kind != Token::Kind::String && peek().text == word) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view word) {
    if (!accept(word)) fail("expected '" + std::string(word) + "'");
  }
  std::string ident(std::string_view what) {
    if (done() || peek().kind != Token::Kind::Ident) fail("expected " + std::string(what));
    if (reserved_words().count(peek().text)) fail("'" + peek().text + "' is a reserved word");
    return line_[pos_++].text;
  }
  double real(std::string_view what) {
    if (done() || peek().kind != Token::Kind::Number) fail("expected number for " + std::string(what));
    auto v = parse_real(peek().text);
    if (!v) fail("malformed number '" + peek().text + "'");
    ++pos_;
    return *v;
  }
  std::int64_t integer(std::string_view what) {
    if (done() || peek().kind != Token::Kind::Number) fail("expected integer for " + std::string(what));
    auto v = parse_int(peek().text);
    if (!v) fail("expected integer for " + std::string(what) + ", got '" + peek().text + "'");
    ++pos_;
    return *v;
  }
  std::string string_literal() {
    if (done() || peek().kind != Token::Kind::String) fail("expected string");
    return line_[pos_++].text;
  }
  std::string raw_number() {
    if (done() || peek().kind != Token::Kind::Number) fail("expected bit string");
    return line_[pos_++].text;
  }
  void finish() {
    if (!done()) fail("unexpected '" + peek().text + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError{msg, loc()}; }

 private:
  SourceLoc end_loc() const {
    if (line_.empty()) return {};
    const Token& last = line_.back();
    return {last.loc.line, last.loc.column + static_cast<int>(last.text.size())};
  }

  const Line& line_;
  std::size_t pos_ = 0;
};

inline Locus parse_locus(Cursor& cur, const std::optional<std::string>& default_region) {
  Locus locus;
  locus.level = cur.ident("level name");
  if (cur.accept("/"))
    locus.region = cur.ident("region name");
  else if (default_region)
    locus.region = *default_region;
  return locus;
}

inline Comparator parse_comparator(Cursor& cur) {
  if (cur.accept(">=")) return Comparator::Ge;
  if (cur.accept("<=")) return Comparator::Le;
  if (cur.accept(">")) return Comparator::Gt;
  if (cur.accept("<")) return Comparator::Lt;
  if (cur.accept("=") || cur.accept("==")) return Comparator::Eq;
  cur.fail("expected comparator");
}

inline Atom parse_atom(Cursor& cur, const std::optional<std::string>& region) {
  const SourceLoc loc = cur.loc();
  Atom atom;
  atom.loc = loc;
  if (cur.accept("ligand")) {
    atom.source = Atom::Source::Ligand;
    atom.name = cur.ident("ligand name");
  } else {
    atom.source = Atom::Source::Signal;
    atom.name = cur.ident("signal name");
    cur.expect("at");
    atom.locus = parse_locus(cur, region);
  }
  atom.cmp = parse_comparator(cur);
  atom.threshold = cur.real("threshold");
  return atom;
}

inline Condition parse_or(Cursor& cur, const std::optional<std::string>& region);

inline Condition parse_unary(Cursor& cur, const std::optional<std::string>& region) {
  if (cur.accept("not")) return Condition::negate(parse_unary(cur, region));
  if (cur.accept("(")) {
    Condition inner = parse_or(cur, region);
    cur.expect(")");
    return inner;
  }
  return Condition::leaf(parse_atom(cur, region));
}

inline Condition parse_and(Cursor& cur, const std::optional<std::string>& region) {
  std::vector<Condition> terms{parse_unary(cur, region)};
  while (cur.accept("and")) terms.push_back(parse_unary(cur, region));
  return terms.size() == 1 ? std::move(terms.front()) : Condition::all_of(std::move(terms));
}

inline Condition parse_or(Cursor& cur, const std::optional<std::string>& region) {
  std::vector<Condition> terms{parse_and(cur, region)};
  while (cur.accept("or")) terms.push_back(parse_and(cur, region));
  return terms.size() == 1 ? std::move(terms.front()) : Condition::any_of(std::move(terms));
}

class Parser {
 public:
  Parser(std::vector<Line> lines, std::vector<Diagnostic>& diags) : lines_(std::move(lines)), diags_(diags) {}

  ModelDef parse() {
    ModelDef model;
    bool have_name = false;
    while (next_ < lines_.size()) {
      const Line& line = lines_[next_++];
      try {
        Cursor cur(line);
        const std::string head = line.front().text;
        const SourceLoc loc = line.front().loc;
        if (cur.accept("model")) {
          if (have_name) cur.fail("model declared twice");
          model.name = cur.ident("model name");
          have_name = true;
          cur.finish();
        } else if (cur.accept("meta")) {
          std::string key = cur.ident("metadata key");
          model.metadata.emplace_back(std::move(key), cur.string_literal());
          cur.finish();
        } else if (cur.accept("level")) {
          Level level{cur.ident("level name"), 0, LevelKind::Custom, loc};
          cur.expect("kind");
          const Token& kind_tok = cur.done() ? line.back() : cur.peek();
          auto kind = level_kind_from(cur.ident("level kind"));
          if (!kind) throw SyntaxError{"unknown level kind '" + kind_tok.text + "'", kind_tok.loc};
          level.kind = *kind;
          cur.expect("rank");
          level.rank = static_cast<int>(cur.integer("rank"));
          cur.finish();
          model.levels.push_back(std::move(level));
        } else if (cur.accept("signal")) {
          SignalSpecies s{cur.ident("signal name"), SpeciesKind::Messenger, 0.0, loc};
          cur.expect("kind");
          if (cur.accept("flag"))
            s.kind = SpeciesKind::Flag;
          else
            cur.expect("messenger");
          if (cur.accept("decay")) s.decay = cur.real("decay");
          cur.finish();
          model.species.push_back(std::move(s));
        } else if (cur.accept("ligand")) {
          model.ligands.push_back({cur.ident("ligand name"), loc});
          cur.finish();
        } else if (cur.accept("init")) {
          Initializer init;
          init.loc = loc;
          init.species = cur.ident("signal name");
          cur.expect("at");
          init.locus = parse_locus(cur, std::nullopt);
          cur.expect("amount");
          init.quantity = cur.real("amount");
          cur.finish();
          model.initializers.push_back(std::move(init));
        } else if (cur.accept("stimulus")) {
          Stimulus s;
          s.loc = loc;
          s.ligand = cur.ident("ligand name");
          cur.expect("amount");
          s.amount = cur.real("amount");
          cur.expect("from");
          s.from_tick = cur.integer("from tick");
          cur.expect("to");
          s.to_tick = cur.integer("to tick");
          cur.finish();
          model.stimuli.push_back(std::move(s));
        } else if (head == "agent" || head == "interface") {
          if (auto agent = parse_agent(line)) model.agents.push_back(std::move(*agent));
        } else if (head == "end") {
          cur.fail("'end' without an open block");
        } else {
          cur.fail("unknown declaration '" + head + "'");
        }
      } catch (const SyntaxError& e) {
        diags_.push_back({Severity::Error, "syntax_error", e.message, e.loc});
      }
    }
    if (!have_name) diags_.push_back({Severity::Error, "missing_model", "no 'model NAME' declaration", {1, 1}});
    return model;
  }

 private:
  // Consumes the block body through its 'end'. Returns nullopt after a
  // syntax error; the rest of the block is skipped so diagnostics stay local.
  std::optional<AgentDef> parse_agent(const Line& header) {
    AgentDef agent;
    agent.loc = header.front().loc;
    bool ok = true;
    try {
      Cursor cur(header);
      agent.cls = cur.accept("agent") ? AgentClass::Internal : (cur.expect("interface"), AgentClass::Interface);
      agent.id = cur.ident("agent id");
      while (!cur.done()) {
        if (cur.accept("priority"))
          agent.priority = static_cast<int>(cur.integer("priority"));
        else if (cur.accept("multiplicity"))
          agent.multiplicity = static_cast<int>(cur.integer("multiplicity"));
        else if (cur.accept("probability"))
          agent.firing_probability = cur.real("probability");
        else if (cur.accept("region"))
          agent.region_tag = cur.ident("region name");
        else
          cur.fail("unexpected '" + cur.peek().text + "' in agent header");
      }
    } catch (const SyntaxError& e) {
      diags_.push_back({Severity::Error, "syntax_error", e.message, e.loc});
      ok = false;
    }

    bool seen_trigger = false;
    while (true) {
      if (next_ >= lines_.size()) {
        diags_.push_back({Severity::Error, "syntax_error", "unclosed block for agent '" + agent.id + "'", agent.loc});
        return std::nullopt;
      }
      const Line& line = lines_[next_++];
      Cursor body(line);
      const SourceLoc loc = line.front().loc;
      try {
        if (body.accept("end")) {
          body.finish();
          break;
        }
        if (body.accept("when")) {
          if (seen_trigger) body.fail("agent already has a condition");
          agent.trigger = parse_or(body, agent.region_tag);
          seen_trigger = true;
          body.finish();
        } else if (body.accept("boolnet")) {
          if (seen_trigger) body.fail("agent already has a condition");
          agent.trigger = parse_boolnet(body, agent);
          seen_trigger = true;
        } else if (line.front().text == "produce" || line.front().text == "consume" || line.front().text == "set") {
          Effect e;
          e.loc = loc;
          e.kind = body.accept("produce") ? EffectKind::Produce
                   : body.accept("consume") ? EffectKind::Consume
                                            : (body.expect("set"), EffectKind::SetFlag);
          e.species = body.ident("signal name");
          body.expect("at");
          e.locus = parse_locus(body, agent.region_tag);
          body.expect(e.kind == EffectKind::SetFlag ? "value" : "amount");
          e.amount = body.real("amount");
          body.finish();
          agent.effects.push_back(std::move(e));
        } else if (body.accept("emit")) {
          Emission em;
          em.loc = loc;
          em.ligand = body.ident("ligand name");
          body.expect("amount");
          em.amount = body.real("amount");
          body.finish();
          agent.emissions.push_back(std::move(em));
        } else if (line.front().text == "agent" || line.front().text == "interface") {
          // A new block header means this one was never closed.
          --next_;
          diags_.push_back({Severity::Error, "syntax_error", "unclosed block for agent '" + agent.id + "'", agent.loc});
          return std::nullopt;
        } else {
          body.fail("unexpected '" + line.front().text + "' in agent body");
        }
      } catch (const SyntaxError& e) {
        diags_.push_back({Severity::Error, "syntax_error", e.message, e.loc});
        ok = false;
      }
    }
    if (!seen_trigger && ok) {
      diags_.push_back({Severity::Error, "missing_condition", "agent '" + agent.id + "' has no 'when' or 'boolnet'", agent.loc});
      ok = false;
    }
    if (!ok) return std::nullopt;
    return agent;
  }

  BooleanNet parse_boolnet(Cursor& header, const AgentDef& agent) {
    BooleanNet net;
    net.loc = header.loc();
    header.expect("output");
    net.output = header.ident("output node");
    header.expect("steps");
    net.sync_steps = static_cast<int>(header.integer("steps"));
    header.finish();
    while (true) {
      if (next_ >= lines_.size()) throw SyntaxError{"unclosed boolnet block", net.loc};
      const Line& line = lines_[next_++];
      Cursor cur(line);
      if (cur.accept("end")) {
        cur.finish();
        return net;
      }
      BoolNode node;
      node.loc = line.front().loc;
      if (cur.accept("input")) {
        node.name = cur.ident("node name");
        cur.expect("=");
        node.input = parse_atom(cur, agent.region_tag);
      } else if (cur.accept("node")) {
        node.name = cur.ident("node name");
        cur.expect("=");
        cur.expect("table");
        while (!cur.done() && cur.peek().kind == Token::Kind::Ident) node.inputs.push_back(cur.ident("node name"));
        cur.expect(":");
        node.table = cur.raw_number();
      } else {
        --next_;
        throw SyntaxError{"unclosed boolnet block", net.loc};
      }
      cur.finish();
      net.nodes.push_back(std::move(node));
    }
  }

  std::vector<Line> lines_;
  std::size_t next_ = 0;
  std::vector<Diagnostic>& diags_;
};

inline void print_condition(std::ostream& os, const Condition& c, const std::string& region, bool nested);

inline void print_locus(std::ostream& os, const Locus& l, const std::string& default_region) {
  os << l.level;
  if (l.region != default_region) os << '/' << l.region;
}

inline void print_atom(std::ostream& os, const Atom& a, const std::string& region) {
  if (a.source == Atom::Source::Ligand) {
    os << "ligand " << a.name;
  } else {
    os << a.name << " at ";
    print_locus(os, a.locus, region);
  }
  os << ' ' << to_string(a.cmp) << ' ' << format_real(a.threshold);
}

inline void print_condition(std::ostream& os, const Condition& c, const std::string& region, bool nested) {
  switch (c.op) {
    case Condition::Op::Atom:
      print_atom(os, c.atom, region);
      return;
    case Condition::Op::Not:
      os << "not ";
      print_condition(os, c.children.front(), region, true);
      return;
    case Condition::Op::And:
    case Condition::Op::Or: {
      if (nested) os << '(';
      const char* joiner = c.op == Condition::Op::And ? " and " : " or ";
      for (std::size_t i = 0; i < c.children.size(); ++i) {
        if (i) os << joiner;
        print_condition(os, c.children[i], region, true);
      }
      if (nested) os << ')';
      return;
    }
  }
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace dsl_detail

// Parses one model. Total: malformed input yields diagnostics, never a throw.
inline ParseResult parse(std::string_view text) {
  ParseResult result;
  auto lines = dsl_detail::lex(text, result.diagnostics);
  ModelDef model = dsl_detail::Parser(std::move(lines), result.diagnostics).parse();
  if (!has_errors(result.diagnostics)) {
    auto more = validate(model);
    result.diagnostics.insert(result.diagnostics.end(), more.begin(), more.end());
  }
  if (!has_errors(result.diagnostics)) result.model = std::move(model);
  return result;
}

// Cross-reference and domain checks. Warnings flag agents that can never be
// triggered and species nobody senses.
inline std::vector<Diagnostic> validate(const ModelDef& model) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string code, std::string msg, SourceLoc loc) {
    out.push_back({Severity::Error, std::move(code), std::move(msg), loc});
  };
  auto warn = [&](std::string code, std::string msg, SourceLoc loc) {
    out.push_back({Severity::Warning, std::move(code), std::move(msg), loc});
  };

  if (model.levels.empty()) error("no_levels", "model declares no levels", {1, 1});
  std::set<std::string> names;
  std::set<int> ranks;
  for (const auto& l : model.levels) {
    if (!names.insert(l.name).second) error("duplicate_declaration", "level '" + l.name + "' declared twice", l.loc);
    if (l.rank < 0) error("rank_domain", "level rank must be non-negative", l.loc);
    if (!ranks.insert(l.rank).second) error("duplicate_rank", "rank " + std::to_string(l.rank) + " used twice", l.loc);
  }
  names.clear();
  for (const auto& s : model.species) {
    if (!names.insert(s.name).second) error("duplicate_declaration", "signal '" + s.name + "' declared twice", s.loc);
    if (!(s.decay >= 0.0 && s.decay <= 1.0)) error("decay_domain", "decay must lie in [0, 1]", s.loc);
    if (s.kind == SpeciesKind::Flag && s.decay != 0.0) error("decay_domain", "flags do not decay", s.loc);
  }
  names.clear();
  for (const auto& l : model.ligands)
    if (!names.insert(l.name).second) error("duplicate_declaration", "ligand '" + l.name + "' declared twice", l.loc);
  names.clear();
  for (const auto& [key, value] : model.metadata)
    if (!names.insert(key).second) error("duplicate_declaration", "metadata key '" + key + "' declared twice", {});

  auto check_signal = [&](const std::string& species, const Locus& locus, SourceLoc loc) -> const SignalSpecies* {
    const SignalSpecies* s = model.find_species(species);
    if (!s) error("unknown_species", "unknown signal '" + species + "'", loc);
    if (!model.find_level(locus.level)) error("unknown_level", "unknown level '" + locus.level + "'", loc);
    if (locus.region.empty()) error("syntax_error", "empty region", loc);
    return s;
  };

  std::function<void(const Condition&, SourceLoc)> check_arity = [&](const Condition& c, SourceLoc loc) {
    const std::size_t n = c.children.size();
    if ((c.op == Condition::Op::Atom && n != 0) || (c.op == Condition::Op::Not && n != 1) ||
        ((c.op == Condition::Op::And || c.op == Condition::Op::Or) && n < 2))
      error("condition_arity", "malformed condition tree", loc);
    for (const auto& child : c.children) check_arity(child, loc);
  };

  std::set<std::pair<std::string, Locus>> initialized;
  for (const auto& init : model.initializers) {
    const SignalSpecies* s = check_signal(init.species, init.locus, init.loc);
    if (!initialized.insert({init.species, init.locus}).second)
      error("duplicate_initializer", "'" + init.species + "' initialized twice at " + to_string(init.locus), init.loc);
    if (!(init.quantity >= 0.0)) error("negative_quantity", "initial quantity must be non-negative", init.loc);
    if (s && s->kind == SpeciesKind::Flag && init.quantity != 0.0 && init.quantity != 1.0)
      error("flag_domain", "flag '" + s->name + "' takes 0 or 1", init.loc);
  }

  for (const auto& s : model.stimuli) {
    if (!model.has_ligand(s.ligand)) error("unknown_ligand", "unknown ligand '" + s.ligand + "'", s.loc);
    if (!(s.amount >= 0.0)) error("stimulus_range", "stimulus amount must be non-negative", s.loc);
    if (s.from_tick < 0 || s.from_tick > s.to_tick) error("stimulus_range", "stimulus window is empty or negative", s.loc);
  }

  std::set<std::string> produced;
  for (const auto& init : model.initializers)
    if (init.quantity > 0.0) produced.insert(init.species);
  std::set<std::string> sensed;

  names.clear();
  for (const auto& a : model.agents) {
    if (!names.insert(a.id).second) error("duplicate_declaration", "agent '" + a.id + "' declared twice", a.loc);
    if (a.multiplicity < 1) error("multiplicity_domain", "multiplicity must be at least 1", a.loc);
    if (!(a.firing_probability > 0.0 && a.firing_probability <= 1.0))
      error("probability_domain", "firing probability must lie in (0, 1]", a.loc);
    if (a.cls == AgentClass::Internal && !a.emissions.empty())
      error("class_constraint", "only interface agents emit ligands", a.emissions.front().loc);

    if (const auto* cond = std::get_if<Condition>(&a.trigger)) check_arity(*cond, a.loc);
    for_each_atom(a, [&](const Atom& atom) {
      if (atom.source == Atom::Source::Ligand) {
        if (a.cls == AgentClass::Internal)
          error("class_constraint", "internal agent '" + a.id + "' cannot sense ligand '" + atom.name + "'", atom.loc);
        else if (!model.has_ligand(atom.name))
          error("unknown_ligand", "unknown ligand '" + atom.name + "'", atom.loc);
      } else {
        check_signal(atom.name, atom.locus, atom.loc);
        sensed.insert(atom.name);
      }
      if (!std::isfinite(atom.threshold)) error("threshold_domain", "threshold must be finite", atom.loc);
    });

    if (const auto* net = std::get_if<BooleanNet>(&a.trigger)) {
      std::map<std::string, const BoolNode*> nodes;
      for (const auto& n : net->nodes)
        if (!nodes.emplace(n.name, &n).second) error("duplicate_declaration", "node '" + n.name + "' declared twice", n.loc);
      if (net->sync_steps < 1) error("boolnet_error", "steps must be at least 1", net->loc);
      if (!nodes.count(net->output)) error("unknown_node", "output node '" + net->output + "' not declared", net->loc);
      for (const auto& n : net->nodes) {
        if (n.input) continue;
        for (const auto& in : n.inputs)
          if (!nodes.count(in)) error("unknown_node", "node '" + in + "' not declared", n.loc);
        const std::size_t rows = n.inputs.size() < 16 ? (std::size_t{1} << n.inputs.size()) : 0;
        if (rows == 0 || n.table.size() != rows ||
            n.table.find_first_not_of("01") != std::string::npos)
          error("boolnet_error", "node '" + n.name + "' needs a table of " + std::to_string(rows) + " bits", n.loc);
      }
    }

    for (const auto& e : a.effects) {
      const SignalSpecies* s = check_signal(e.species, e.locus, e.loc);
      if (e.kind == EffectKind::SetFlag) {
        if (s && s->kind != SpeciesKind::Flag) error("flag_domain", "'set' applies to flags only", e.loc);
        if (e.amount != 0.0 && e.amount != 1.0) error("flag_domain", "flag value must be 0 or 1", e.loc);
        if (e.amount == 1.0) produced.insert(e.species);
      } else {
        if (s && s->kind == SpeciesKind::Flag) error("flag_domain", "flags change only through 'set'", e.loc);
        if (!(e.amount > 0.0) || !std::isfinite(e.amount)) error("amount_domain", "amount must be positive", e.loc);
        if (e.kind == EffectKind::Produce) produced.insert(e.species);
      }
    }
    for (const auto& em : a.emissions) {
      if (!model.has_ligand(em.ligand)) error("unknown_ligand", "unknown ligand '" + em.ligand + "'", em.loc);
      if (!(em.amount > 0.0)) error("amount_domain", "emission amount must be positive", em.loc);
    }
  }

  for (const auto& a : model.agents) {
    std::set<std::string> reported;
    for_each_atom(a, [&](const Atom& atom) {
      if (atom.source == Atom::Source::Signal && model.find_species(atom.name) && !produced.count(atom.name) &&
          reported.insert(atom.name).second)
        warn("unreachable_agent", "agent '" + a.id + "' senses '" + atom.name + "', which nothing produces", atom.loc);
    });
  }
  for (const auto& s : model.species)
    if (!sensed.count(s.name)) warn("dead_end_species", "signal '" + s.name + "' is never sensed", s.loc);
  return out;
}

// Canonical text: declaration categories in fixed order, fields in fixed
// order, shortest round-trip numbers. Comments and layout are not kept.
inline std::string pretty_print(const ModelDef& model) {
  using namespace dsl_detail;
  std::ostringstream os;
  os << "model " << model.name << '\n';
  for (const auto& [k, v] : model.metadata) os << "meta " << k << ' ' << quote(v) << '\n';

  auto section = [&](bool nonempty) {
    if (nonempty) os << '\n';
  };
  section(!model.levels.empty());
  for (const auto& l : model.levels) os << "level " << l.name << " kind " << to_string(l.kind) << " rank " << l.rank << '\n';
  section(!model.species.empty());
  for (const auto& s : model.species)
    os << "signal " << s.name << " kind " << to_string(s.kind) << " decay " << format_real(s.decay) << '\n';
  section(!model.ligands.empty());
  for (const auto& l : model.ligands) os << "ligand " << l.name << '\n';
  section(!model.initializers.empty());
  for (const auto& i : model.initializers) {
    os << "init " << i.species << " at ";
    print_locus(os, i.locus, std::string(kGlobalRegion));
    os << " amount " << format_real(i.quantity) << '\n';
  }
  section(!model.stimuli.empty());
  for (const auto& s : model.stimuli)
    os << "stimulus " << s.ligand << " amount " << format_real(s.amount) << " from " << s.from_tick << " to "
       << s.to_tick << '\n';

  for (const auto& a : model.agents) {
    const std::string region = a.region_tag.value_or(std::string(kGlobalRegion));
    os << '\n'
       << (a.cls == AgentClass::Interface ? "interface " : "agent ") << a.id << " priority " << a.priority
       << " multiplicity " << a.multiplicity << " probability " << format_real(a.firing_probability);
    if (a.region_tag) os << " region " << *a.region_tag;
    os << '\n';
    if (const auto* cond = std::get_if<Condition>(&a.trigger)) {
      os << "  when ";
      print_condition(os, *cond, region, false);
      os << '\n';
    } else {
      const auto& net = std::get<BooleanNet>(a.trigger);
      os << "  boolnet output " << net.output << " steps " << net.sync_steps << '\n';
      for (const auto& n : net.nodes) {
        if (n.input) {
          os << "    input " << n.name << " = ";
          print_atom(os, *n.input, region);
        } else {
          os << "    node " << n.name << " = table";
          for (const auto& in : n.inputs) os << ' ' << in;
          os << " : " << n.table;
        }
        os << '\n';
      }
      os << "  end\n";
    }
    for (const auto& e : a.effects) {
      os << "  " << to_string(e.kind) << ' ' << e.species << " at ";
      print_locus(os, e.locus, region);
      os << (e.kind == EffectKind::SetFlag ? " value " : " amount ") << format_real(e.amount) << '\n';
    }
    for (const auto& em : a.emissions) os << "  emit " << em.ligand << " amount " << format_real(em.amount) << '\n';
    os << "end\n";
  }
  return os.str();
}

}  // namespace cellulat
