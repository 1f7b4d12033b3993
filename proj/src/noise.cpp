#include "svi/noise.hpp"

#include <bit>
#include <cmath>

#include "svi/errors.hpp"

namespace svi {

std::string to_string(StreamTag tag) {
  switch (tag) {
    case StreamTag::ParticleSystem: return "ParticleSystem";
    case StreamTag::LimitProcess: return "LimitProcess";
    case StreamTag::PicardShared: return "PicardShared";
  }
  return "?";
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

double counter_uniform(const NoiseKey& key, Lane lane, std::uint64_t index) {
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
      static_cast<std::uint32_t>(key.particle_id),
      static_cast<std::uint32_t>((key.particle_id >> 32) & 0xFFFFu) | (static_cast<std::uint32_t>(lane) << 16) |
          (static_cast<std::uint32_t>(key.tag) << 24)};
  const std::array<std::uint32_t, 2> k{static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)};
  const auto out = philox4x32(ctr, k);
  const std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double counter_normal(const NoiseKey& key, Lane lane, std::uint64_t index) {
  return normal_quantile(counter_uniform(key, lane, index));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -HUGE_VAL;
    if (p == 1.0) return HUGE_VAL;
    throw InvalidParams("normal_quantile requires p in [0, 1]");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
               1.27045825245236838258e0) * r + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
               1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
               2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
               7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

IncrementGrid::IncrementGrid(double horizon, double dt_fine) : horizon_{horizon}, dt_fine_{dt_fine} {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidParams("IncrementGrid requires T > 0");
  if (!(dt_fine > 0.0) || !std::isfinite(dt_fine)) throw InvalidParams("IncrementGrid requires dt > 0");
  const double ratio = horizon / dt_fine;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw InvalidParams("IncrementGrid requires T to be an integer multiple of dt");
  fine_steps_ = static_cast<std::size_t>(rounded);
  sqrt_dt_fine_ = std::sqrt(dt_fine);
}

double IncrementGrid::dt(int level) const { return std::ldexp(dt_fine_, level); }

std::size_t IncrementGrid::steps(int level) const {
  if (level < 0 || level >= 63) return 0;
  return fine_steps_ >> level;
}

double IncrementGrid::increment(const NoiseKey& key, int level, std::size_t step) const {
  if (level < 0 || step >= steps(level)) throw OutOfRange("IncrementGrid: step outside the grid at this level");
  // pairwise so that every level is the exact sum of its two children
  if (level == 0) return sqrt_dt_fine_ * counter_normal(key, Lane::Increment, step);
  return increment(key, level - 1, 2 * step) + increment(key, level - 1, 2 * step + 1);
}

void StreamAudit::consume(double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) {
    hash_ ^= (bits >> (8 * b)) & 0xFFu;
    hash_ *= 0x100000001b3ull;
  }
  ++count_;
}

}  // namespace svi
