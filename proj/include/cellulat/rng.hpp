#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace cellulat {

// Model-level generator. Every stochastic firing draws from one instance in
// scheduler order; the engine state is serializable for replay and forking.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : engine_(seed) {}

  // Uniform in [0, 1) built from the top 53 bits, so the value does not depend
  // on the standard library's distribution implementation.
  double uniform() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // p >= 1 never consumes a draw.
  bool bernoulli(double p) { return p >= 1.0 || uniform() < p; }

  std::uint64_t draws() const { return draws_; }

  std::string state() const {
    std::ostringstream os;
    os << draws_ << ' ' << engine_;
    return os.str();
  }

  void set_state(const std::string& s) {
    std::istringstream is(s);
    is >> draws_ >> engine_;
  }

  bool operator==(const SeededRng&) const = default;

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace cellulat
