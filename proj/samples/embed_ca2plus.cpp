// Embedding the engine: run the bundled Ca2+ model, knock out PLC-beta in a
// fork halfway through, and print both calcium time courses side by side.

#include <iostream>

#include "cellulat/lesion_lab.hpp"
#include "cellulat/scenarios.hpp"

int main() {
  using namespace cellulat;

  ParseResult parsed = parse(ca2plus_scenario().text);
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) std::cerr << format_diagnostic("ca2plus", d) << "\n";
    return 1;
  }

  Simulation control(std::move(*parsed.model), 7);
  control.run(10);

  Simulation lesioned = control;  // fork: independent copy at tick 10
  apply_lesion(lesioned, parse_lesion_spec("knockout:PLCbeta@10"));

  const Locus cytosol{"cytosol", "gpcr_patch"};
  std::cout << "tick  Ca2plus(control)  Ca2plus(knockout)\n";
  for (int i = 0; i < 40; ++i) {
    control.step();
    lesioned.step();
    std::cout << control.tick() << "  " << control.board().read("Ca2plus", cytosol) << "  "
              << lesioned.board().read("Ca2plus", cytosol) << "\n";
  }
}
