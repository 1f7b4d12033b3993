#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace svi {

/// Which family of Brownian motions a stream belongs to. Particle i of an
/// N-particle system and the coupled limit process for index i share the
/// ParticleSystem stream; the reference law is simulated on LimitProcess.
enum class StreamTag : std::uint8_t { ParticleSystem = 0, LimitProcess = 1, PicardShared = 2 };

/// Independent sub-streams under one key.
enum class Lane : std::uint8_t { Increment = 0, Initial = 1, Resample = 2 };

std::string to_string(StreamTag tag);

struct NoiseKey {
  std::uint64_t seed = 0;
  std::uint64_t particle_id = 0;  // at most 2^48 - 1
  StreamTag tag = StreamTag::ParticleSystem;

  NoiseKey with_particle(std::uint64_t id) const { return {seed, id, tag}; }

  friend bool operator==(const NoiseKey&, const NoiseKey&) = default;
};

/// Philox-4x32-10: a keyed bijection on 128-bit counters.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Uniform in the open interval (0, 1) addressed by (key, lane, index).
double counter_uniform(const NoiseKey& key, Lane lane, std::uint64_t index);

/// Standard normal addressed by (key, lane, index), by inverse CDF.
double counter_normal(const NoiseKey& key, Lane lane, std::uint64_t index);

/// Inverse of the standard normal CDF (Wichura's AS241, ~1e-16 relative).
double normal_quantile(double p);

/// Standard normal CDF.
double normal_cdf(double x);

/// Mixes a 64-bit value (splitmix64 finalizer); used to derive trial seeds.
std::uint64_t mix64(std::uint64_t x);

/// Brownian increments on a dyadic family of grids over [0, T].
///
/// Level 0 is the finest grid with step dt_fine; level l has step
/// dt_fine * 2^l and each of its increments is the exact sum of the 2^l
/// fine increments it covers, so refinement is consistent by construction.
class IncrementGrid {
 public:
  /// Throws InvalidParams unless T / dt_fine is (within 1e-9) a positive integer.
  IncrementGrid(double horizon, double dt_fine);

  double horizon() const { return horizon_; }
  double dt(int level = 0) const;
  /// Number of complete steps at this level.
  std::size_t steps(int level = 0) const;

  /// Throws OutOfRange when step >= steps(level) or level < 0.
  double increment(const NoiseKey& key, int level, std::size_t step) const;

 private:
  double horizon_;
  double dt_fine_;
  double sqrt_dt_fine_;
  std::size_t fine_steps_;
};

/// Order-sensitive digest of the increments a path consumed, used to
/// audit that two coupled processes saw bit-identical noise.
class StreamAudit {
 public:
  void consume(double v);
  std::uint64_t digest() const { return hash_; }
  std::uint64_t count() const { return count_; }

  friend bool operator==(const StreamAudit&, const StreamAudit&) = default;

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
  std::uint64_t count_ = 0;
};

}  // namespace svi
