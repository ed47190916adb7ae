#include "minav/random.hpp"

#include <cmath>

namespace minav {

namespace {

std::mt19937_64 seeded_engine(std::initializer_list<std::uint32_t> words) {
  std::seed_seq seq(words);
  return std::mt19937_64(seq);
}

std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seeded_engine({lo(seed), hi(seed)})) {}

Rng Rng::stream(std::uint64_t master, std::uint64_t trial, std::uint64_t stream_id) {
  Rng rng(0);
  rng.engine_ = seeded_engine(
      {lo(master), hi(master), lo(trial), hi(trial), lo(stream_id), hi(stream_id), 0x9e3779b9u});
  return rng;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

}  // namespace minav
