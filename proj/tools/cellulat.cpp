// cellulat: run models, validate them, and compare lesioned runs.
//
// Exit codes: 0 success, 1 missing or unreadable file, 2 validation error,
// 64 command-line usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cellulat/dsl.hpp"
#include "cellulat/lesion_lab.hpp"
#include "cellulat/serialize.hpp"
#include "cellulat/trace.hpp"

namespace {

using namespace cellulat;

constexpr int kExitMissingFile = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitUsage = 64;

struct ExitError {
  int code;
};

std::string read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "cellulat: cannot read " << path << "\n";
    throw ExitError{kExitMissingFile};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_diagnostics(std::ostream& os, const std::string& path, const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) os << format_diagnostic(path, d) << "\n";
}

ModelDef load_model(const std::string& path) {
  ParseResult r = parse(read_model_file(path));
  print_diagnostics(std::cerr, path, r.diagnostics);
  if (!r.ok()) throw ExitError{kExitInvalid};
  return std::move(*r.model);
}

// LIGAND=AMT@FROM..TO
Stimulus parse_stimulus_flag(const std::string& text) {
  const auto eq = text.find('=');
  const auto at = text.find('@', eq == std::string::npos ? 0 : eq);
  const auto dots = text.find("..", at == std::string::npos ? 0 : at);
  auto bad = [&] {
    std::cerr << "cellulat: bad --stimulus '" << text << "', expected LIGAND=AMOUNT@FROM..TO\n";
    return ExitError{kExitUsage};
  };
  if (eq == std::string::npos || at == std::string::npos || dots == std::string::npos || eq == 0) throw bad();
  Stimulus s;
  s.ligand = text.substr(0, eq);
  auto amount = parse_real(std::string_view(text).substr(eq + 1, at - eq - 1));
  auto from = parse_int(std::string_view(text).substr(at + 1, dots - at - 1));
  auto to = parse_int(std::string_view(text).substr(dots + 2));
  if (!amount || !from || !to || *amount < 0.0 || *from < 0 || *to < *from) throw bad();
  s.amount = *amount;
  s.from_tick = *from;
  s.to_tick = *to;
  return s;
}

std::vector<Lesion> parse_lesion_flags(const std::vector<std::string>& specs) {
  std::vector<Lesion> out;
  for (const auto& spec : specs) {
    try {
      out.push_back(parse_lesion_spec(spec));
    } catch (const Error& e) {
      std::cerr << "cellulat: " << e.what() << "\n";
      throw ExitError{kExitUsage};
    }
  }
  return out;
}

void check_lesions(const std::vector<Lesion>& lesions, const ModelDef& model) {
  for (const auto& l : lesions) {
    try {
      validate_lesion(l, model);
    } catch (const Error& e) {
      std::cerr << "cellulat: lesion " << format_lesion_spec(l) << ": " << to_string(e.code()) << ": " << e.what()
                << "\n";
      throw ExitError{kExitInvalid};
    }
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "cellulat: cannot write " << path << "\n";
    throw ExitError{kExitMissingFile};
  }
  return out;
}

struct RunOptions {
  std::string model;
  Tick ticks = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> stimuli;
  std::vector<std::string> lesions;
  std::string out_trace;
  std::string out_log;
  std::string format = "csv";
};

int cmd_run(const RunOptions& opt) {
  ModelDef model = load_model(opt.model);
  std::vector<Stimulus> flag_stimuli;
  for (const auto& s : opt.stimuli) flag_stimuli.push_back(parse_stimulus_flag(s));
  const auto lesions = parse_lesion_flags(opt.lesions);
  for (const auto& s : flag_stimuli) {
    if (!model.has_ligand(s.ligand)) {
      std::cerr << "cellulat: unknown_ligand: " << s.ligand << "\n";
      return kExitInvalid;
    }
  }
  check_lesions(lesions, model);

  Simulation sim(std::move(model), opt.seed);
  if (!flag_stimuli.empty()) {
    if (!sim.stimuli().empty())
      std::cerr << "cellulat: warning: --stimulus flags replace the model's stimulus schedule\n";
    sim.set_stimuli(flag_stimuli);
  }
  for (const auto& l : lesions) apply_lesion(sim, l);

  std::ofstream trace_out = open_output(opt.out_trace);
  std::ofstream log_out = open_output(opt.out_log);

  TraceRecorder recorder(sim.model());
  recorder.observe(0, sim.board());
  for (Tick i = 0; i < opt.ticks; ++i) {
    const TickReport report = sim.step();
    log_out << json(report).dump() << "\n";
    recorder.observe(sim.tick(), sim.board());
  }

  if (opt.format == "jsonl") {
    for (const auto& row : recorder.rows()) trace_out << json(row).dump() << "\n";
  } else {
    write_trace_csv(trace_out, recorder.rows());
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  ParseResult r = parse(read_model_file(path));
  print_diagnostics(std::cout, path, r.diagnostics);
  return r.ok() ? 0 : kExitInvalid;
}

struct CompareOptions {
  std::string model;
  Tick ticks = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> lesions;
  std::string out;
};

int cmd_lesion_compare(const CompareOptions& opt) {
  ModelDef model = load_model(opt.model);
  const auto lesions = parse_lesion_flags(opt.lesions);
  check_lesions(lesions, model);

  const PairedRun run = run_paired(model, std::nullopt, lesions, opt.ticks, opt.seed);
  json report = run.report;
  report["lesions"] = lesions;
  report["seed"] = opt.seed;
  std::ofstream out = open_output(opt.out);
  out << report.dump(2) << "\n";

  if (run.report.first_divergence_tick)
    std::cout << *run.report.first_divergence_tick << "\n";
  else
    std::cout << "null\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cellulat blackboard signalling simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a model and write its trace and firing log");
  run_cmd->add_option("model", run.model, "Model file")->required();
  run_cmd->add_option("--ticks", run.ticks, "Number of ticks")->required()->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--seed", run.seed, "RNG seed")->required();
  run_cmd->add_option("--stimulus", run.stimuli, "LIGAND=AMOUNT@FROM..TO (replaces model stimuli)");
  run_cmd->add_option("--lesion", run.lesions, "Lesion spec");
  run_cmd->add_option("--out-trace", run.out_trace, "Trace output path")->required();
  run_cmd->add_option("--out-log", run.out_log, "Firing log output path (JSON lines)")->required();
  run_cmd->add_option("--format", run.format, "Trace format")->check(CLI::IsMember({"csv", "jsonl"}));

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a model and print diagnostics");
  validate_cmd->add_option("model", validate_path, "Model file")->required();

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("lesion-compare", "Run baseline and lesioned copies and report divergence");
  cmp_cmd->add_option("model", cmp.model, "Model file")->required();
  cmp_cmd->add_option("--ticks", cmp.ticks, "Number of ticks")->required()->check(CLI::NonNegativeNumber);
  cmp_cmd->add_option("--seed", cmp.seed, "RNG seed")->required();
  cmp_cmd->add_option("--lesion", cmp.lesions, "Lesion spec")->required();
  cmp_cmd->add_option("--out", cmp.out, "Report output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*validate_cmd) return cmd_validate(validate_path);
    if (*cmp_cmd) return cmd_lesion_compare(cmp);
  } catch (const ExitError& e) {
    return e.code;
  } catch (const Error& e) {
    std::cerr << "cellulat: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitUsage;
}
