#pragma once

#include <cstdint>
#include <random>

#include "minav/common.hpp"

namespace minav {

/// Seeded generator with platform-independent output. The engine is
/// mt19937_64 (fully specified by the standard); the uniform and normal
/// transforms are implemented here because the standard library
/// distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for (master seed, trial index, stream id). Streams are
  /// derived by counter so results do not depend on execution order.
  static Rng stream(std::uint64_t master, std::uint64_t trial, std::uint64_t stream_id = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();
  double normal();
  Vector3d normal3() { return {normal(), normal(), normal()}; }

 private:
  std::mt19937_64 engine_;
  double spare_{0.0};
  bool has_spare_{false};
};

}  // namespace minav
