#include "weakpairs/random.hpp"

#include <cmath>
#include <numbers>

namespace weakpairs {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();  // [0,1); 1-u1 lies in (0,1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log1p(-u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double Rng::normal(double mean, double sd) {
  return mean + sd * normal();
}

std::size_t Rng::index(std::size_t n) {
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = ~0ULL - (~0ULL % n + 1) % n;
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw > limit);
  return static_cast<std::size_t>(draw % n);
}

std::uint64_t Rng::derive(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  std::uint64_t out = splitmix64(state);
  return out ^ splitmix64(state);
}

}  // namespace weakpairs
