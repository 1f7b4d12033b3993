#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

namespace svi {

/// A real number or one of the two infinities, carried as an explicit tag.
///
/// Interval endpoints and convex-function values use this type so that the
/// indicator semantics (0 inside, +inf outside) never depend on a sentinel
/// float leaking through arithmetic.
class ExtReal {
 public:
  enum class Tag { Finite, PosInf, NegInf };

  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : value_{v} {}  // NOLINT: implicit on purpose

  static constexpr ExtReal pos_inf() { return ExtReal{Tag::PosInf}; }
  static constexpr ExtReal neg_inf() { return ExtReal{Tag::NegInf}; }

  /// Maps IEEE infinities onto tags; NaN is rejected by callers, not here.
  static ExtReal from_double(double v) {
    if (v == std::numeric_limits<double>::infinity()) return pos_inf();
    if (v == -std::numeric_limits<double>::infinity()) return neg_inf();
    return ExtReal{v};
  }

  constexpr Tag tag() const { return tag_; }
  constexpr bool is_finite() const { return tag_ == Tag::Finite; }
  constexpr bool is_pos_inf() const { return tag_ == Tag::PosInf; }
  constexpr bool is_neg_inf() const { return tag_ == Tag::NegInf; }

  /// Finite payload. Only meaningful when is_finite().
  constexpr double value() const { return value_; }

  /// IEEE view, with the infinities mapped to +-inf.
  constexpr double to_double() const {
    switch (tag_) {
      case Tag::PosInf: return std::numeric_limits<double>::infinity();
      case Tag::NegInf: return -std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

  friend constexpr bool operator==(const ExtReal& a, const ExtReal& b) {
    if (a.tag_ != b.tag_) return false;
    return !a.is_finite() || a.value_ == b.value_;
  }

  friend constexpr std::partial_ordering operator<=>(const ExtReal& a, const ExtReal& b) {
    auto rank = [](const ExtReal& e) { return e.tag_ == Tag::NegInf ? 0 : e.tag_ == Tag::Finite ? 1 : 2; };
    if (rank(a) != rank(b)) return rank(a) <=> rank(b);
    if (!a.is_finite()) return std::partial_ordering::equivalent;
    return a.value_ <=> b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtReal& e) {
    if (e.is_pos_inf()) return os << "+inf";
    if (e.is_neg_inf()) return os << "-inf";
    return os << e.value_;
  }

 private:
  constexpr explicit ExtReal(Tag t) : tag_{t} {}

  Tag tag_ = Tag::Finite;
  double value_ = 0.0;
};

/// Closed interval [lo, hi] with possibly infinite endpoints.
struct ClosedInterval {
  ExtReal lo;
  ExtReal hi;

  bool contains(double x) const { return ExtReal{x} >= lo && ExtReal{x} <= hi; }
  bool is_real_line() const { return lo.is_neg_inf() && hi.is_pos_inf(); }

  /// Nearest point of the interval to x.
  double clamp(double x) const {
    if (lo.is_finite() && x < lo.value()) return lo.value();
    if (hi.is_finite() && x > hi.value()) return hi.value();
    return x;
  }

  friend bool operator==(const ClosedInterval&, const ClosedInterval&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const ClosedInterval& iv) {
  return os << '[' << iv.lo << ", " << iv.hi << ']';
}

}  // namespace svi
