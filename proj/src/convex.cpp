#include "svi/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "svi/errors.hpp"

namespace svi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const ClosedInterval kRealLine{ExtReal::neg_inf(), ExtReal::pos_inf()};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ClosedInterval point(double v) { return {ExtReal{v}, ExtReal{v}}; }

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// One-sided difference quotient taken inward from a finite domain endpoint.
// A quotient that keeps growing as h shrinks means the subdifferential is
// empty at the endpoint.
bool boundary_slope_diverges(const Custom& c, double x, double inward) {
  constexpr double kThreshold = 1e6;
  const double f0 = c.value(x);
  double prev = 0.0;
  bool growing = true;
  double q = 0.0;
  for (double h : {1e-3, 1e-5, 1e-7}) {
    q = std::abs(c.value(x + inward * h) - f0) / h;
    if (!std::isfinite(q)) return true;
    growing = growing && q > prev;
    prev = q;
  }
  return growing && q > kThreshold;
}

std::optional<ClosedInterval> custom_subgradient(const Custom& c, double x) {
  if (!c.domain.contains(x)) return std::nullopt;
  if (c.domain.lo.is_finite() && x == c.domain.lo.value() && boundary_slope_diverges(c, x, +1.0))
    return std::nullopt;
  if (c.domain.hi.is_finite() && x == c.domain.hi.value() && boundary_slope_diverges(c, x, -1.0))
    return std::nullopt;
  return c.subgradient(x);
}

// Upper envelope of affine pieces by slope-sorted hull construction.
MaxAffine build_envelope(std::vector<AffinePiece> raw) {
  std::sort(raw.begin(), raw.end(), [](const AffinePiece& a, const AffinePiece& b) {
    return a.slope < b.slope || (a.slope == b.slope && a.intercept > b.intercept);
  });
  std::vector<AffinePiece> hull;
  auto cross = [](const AffinePiece& a, const AffinePiece& b) {
    return (a.intercept - b.intercept) / (b.slope - a.slope);
  };
  for (const auto& p : raw) {
    if (!hull.empty() && hull.back().slope == p.slope) continue;
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      // b is never strictly on top once p overtakes a no later than b does
      if (cross(a, p) <= cross(a, b)) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  MaxAffine env;
  env.pieces = hull;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) env.breaks.push_back(cross(hull[i], hull[i + 1]));
  return env;
}

double max_affine_value(const MaxAffine& m, double x) {
  double v = -kInf;
  for (const auto& p : m.pieces) v = std::max(v, p.slope * x + p.intercept);
  return v;
}

std::optional<ClosedInterval> max_affine_subgradient(const MaxAffine& m, double x) {
  const std::size_t np = m.pieces.size();
  for (std::size_t i = 0; i < np; ++i) {
    const double left = i == 0 ? -kInf : m.breaks[i - 1];
    const double right = i + 1 == np ? kInf : m.breaks[i];
    if (x == right) return ClosedInterval{m.pieces[i].slope, m.pieces[i + 1].slope};
    if (x > left && x < right) return point(m.pieces[i].slope);
  }
  return point(m.pieces.back().slope);
}

double max_affine_resolvent(const MaxAffine& m, double lambda, double x) {
  const std::size_t np = m.pieces.size();
  for (std::size_t i = 0; i < np; ++i) {
    const double left = i == 0 ? -kInf : m.breaks[i - 1];
    const double right = i + 1 == np ? kInf : m.breaks[i];
    const double cand = x - lambda * m.pieces[i].slope;
    if (cand >= left && cand <= right) return cand;
    if (i + 1 < np) {
      // kink at `right` absorbs x when x - right lies in lambda * [s_i, s_{i+1}]
      if (x - lambda * m.pieces[i + 1].slope <= right && right <= cand) return right;
    }
  }
  return x - lambda * m.pieces.back().slope;
}

// Root of x' + lambda * d(psi)(x') containing x, by bisection on the monotone
// inclusion. direction(m) < 0 when the root lies left of m, > 0 when right,
// 0 when m itself solves the inclusion.
double bisect_resolvent(const ConvexSpec& psi, double lambda, double x, const ResolventOptions& opts) {
  const ClosedInterval& dom = psi.domain();
  auto direction = [&](double m) -> int {
    if (dom.lo.is_finite() && m < dom.lo.value()) return +1;
    if (dom.hi.is_finite() && m > dom.hi.value()) return -1;
    auto s = subdifferential_interval(psi, m);
    if (!s) {
      // boundary point with no subgradient: the root sits strictly inside
      if (dom.lo.is_finite() && m == dom.lo.value()) return +1;
      return -1;
    }
    if (s->lo.is_finite() && m + lambda * s->lo.value() > x) return -1;
    if (s->hi.is_finite() && m + lambda * s->hi.value() < x) return +1;
    if (s->lo.is_pos_inf()) return -1;
    if (s->hi.is_neg_inf()) return +1;
    return 0;
  };

  const double anchor = dom.clamp(x);
  double lo_slope = 0.0;
  double hi_slope = 0.0;
  if (auto s = subdifferential_interval(psi, anchor)) {
    if (s->lo.is_finite()) lo_slope = s->lo.value();
    if (s->hi.is_finite()) hi_slope = s->hi.value();
  }
  double lo = x - lambda * std::abs(hi_slope) - 1.0;
  double hi = x + lambda * std::abs(lo_slope) + 1.0;
  if (dom.lo.is_finite()) lo = std::max(lo, dom.lo.value());
  if (dom.hi.is_finite()) hi = std::min(hi, dom.hi.value());

  int iter = 0;
  double width = std::max(1.0, hi - lo);
  while (direction(lo) < 0) {
    if (++iter > opts.max_iter) throw NonConvergence("resolvent: cannot bracket root from below for " + psi.describe());
    hi = lo;
    lo -= width;
    width *= 2.0;
  }
  width = std::max(1.0, hi - lo);
  while (direction(hi) > 0) {
    if (++iter > opts.max_iter) throw NonConvergence("resolvent: cannot bracket root from above for " + psi.describe());
    lo = hi;
    hi += width;
    width *= 2.0;
  }
  if (direction(lo) == 0) return lo;
  if (direction(hi) == 0) return hi;

  for (int it = 0; it < opts.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double stop = std::min(opts.tol, 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid)));
    if (hi - lo <= stop || mid == lo || mid == hi) return mid;
    const int d = direction(mid);
    if (d == 0) return mid;
    if (d < 0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  if (hi - lo <= opts.tol) return 0.5 * (lo + hi);
  throw NonConvergence("resolvent: bisection did not reach tolerance for " + psi.describe());
}

}  // namespace

ConvexSpec ConvexSpec::indicator(ExtReal lo, ExtReal hi) {
  if (!(lo <= ExtReal{0.0} && ExtReal{0.0} <= hi && lo < hi))
    throw InvalidParams("IndicatorInterval requires lo <= 0 <= hi and lo < hi");
  return ConvexSpec{IndicatorInterval{lo, hi}, ClosedInterval{lo, hi}};
}

double ConvexSpec::interior_anchor() const {
  const ExtReal zero{0.0};
  if (domain_.lo < zero && zero < domain_.hi) return 0.0;
  if (domain_.lo == zero) return domain_.hi.is_finite() ? 0.5 * domain_.hi.value() : 1.0;
  return domain_.lo.is_finite() ? 0.5 * domain_.lo.value() : -1.0;
}

ConvexSpec ConvexSpec::zero() { return indicator(ExtReal::neg_inf(), ExtReal::pos_inf()); }

ConvexSpec ConvexSpec::abs_value(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidParams("AbsValue requires a positive finite scale");
  return ConvexSpec{AbsValue{scale}, kRealLine};
}

ConvexSpec ConvexSpec::quadratic(double curvature) {
  if (!(curvature >= 0.0) || !std::isfinite(curvature))
    throw InvalidParams("Quadratic requires a nonnegative finite curvature");
  return ConvexSpec{Quadratic{curvature}, kRealLine};
}

ConvexSpec ConvexSpec::even_power(int exponent, double scale) {
  if (exponent < 2 || exponent % 2 != 0) throw InvalidParams("EvenPower requires an even exponent >= 2");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidParams("EvenPower requires a positive finite scale");
  return ConvexSpec{EvenPower{exponent, scale}, kRealLine};
}

ConvexSpec ConvexSpec::max_affine(std::vector<AffinePiece> pieces) {
  if (pieces.empty()) throw InvalidParams("MaxAffine requires at least one piece");
  double top = -kInf;
  for (const auto& p : pieces) {
    if (!std::isfinite(p.slope) || !std::isfinite(p.intercept)) throw InvalidParams("MaxAffine pieces must be finite");
    top = std::max(top, p.intercept);
  }
  if (top != 0.0) throw InvalidParams("MaxAffine requires max intercept == 0 so that psi(0) = 0");
  double smin = kInf;
  double smax = -kInf;
  for (const auto& p : pieces) {
    if (p.intercept == 0.0) {
      smin = std::min(smin, p.slope);
      smax = std::max(smax, p.slope);
    }
  }
  if (!(smin <= 0.0 && 0.0 <= smax)) throw InvalidParams("MaxAffine must attain its minimum 0 at x = 0");
  return ConvexSpec{build_envelope(std::move(pieces)), kRealLine};
}

ConvexSpec ConvexSpec::custom(Custom fn) {
  if (!fn.value || !fn.subgradient) throw InvalidParams("Custom requires value and subgradient evaluators");
  if (!(fn.domain.lo < ExtReal{0.0} && ExtReal{0.0} < fn.domain.hi))
    throw InvalidParams("Custom domain must contain 0 in its interior");
  if (std::abs(fn.value(0.0)) > 1e-12) throw InvalidParams("Custom requires psi(0) = 0");
  auto s0 = fn.subgradient(0.0);
  if (!s0 || !s0->contains(0.0)) throw InvalidParams("Custom requires 0 in the subdifferential at 0");
  ClosedInterval dom = fn.domain;
  return ConvexSpec{std::move(fn), dom};
}

ExtReal ConvexSpec::value(double x) const {
  if (!domain_.contains(x)) return ExtReal::pos_inf();
  return std::visit(Overloaded{
                        [](const IndicatorInterval&) { return ExtReal{0.0}; },
                        [x](const AbsValue& a) { return ExtReal{a.scale * std::abs(x)}; },
                        [x](const Quadratic& q) { return ExtReal{0.5 * q.curvature * x * x}; },
                        [x](const EvenPower& e) { return ExtReal::from_double(e.scale * ipow(x, e.exponent)); },
                        [x](const MaxAffine& m) { return ExtReal{max_affine_value(m, x)}; },
                        [x](const Custom& c) { return ExtReal::from_double(c.value(x)); },
                    },
                    kind_);
}

bool ConvexSpec::is_zero() const {
  if (const auto* ind = std::get_if<IndicatorInterval>(&kind_)) return ind->lo.is_neg_inf() && ind->hi.is_pos_inf();
  if (const auto* q = std::get_if<Quadratic>(&kind_)) return q->curvature == 0.0;
  return false;
}

std::string ConvexSpec::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const IndicatorInterval& i) { os << "IndicatorInterval(" << i.lo << ", " << i.hi << ')'; },
                 [&](const AbsValue& a) { os << "AbsValue(" << a.scale << ')'; },
                 [&](const Quadratic& q) { os << "Quadratic(" << q.curvature << ')'; },
                 [&](const EvenPower& e) { os << "EvenPower(" << e.exponent << ", " << e.scale << ')'; },
                 [&](const MaxAffine& m) {
                   os << "MaxAffine(";
                   for (std::size_t i = 0; i < m.pieces.size(); ++i)
                     os << (i ? ", " : "") << '(' << m.pieces[i].slope << ", " << m.pieces[i].intercept << ')';
                   os << ')';
                 },
                 [&](const Custom& c) { os << "Custom(" << c.label << ')'; },
             },
             kind_);
  return os.str();
}

std::optional<ClosedInterval> subdifferential_interval(const ConvexSpec& psi, double x) {
  return std::visit(
      Overloaded{
          [x](const IndicatorInterval& i) -> std::optional<ClosedInterval> {
            if (!ClosedInterval{i.lo, i.hi}.contains(x)) return std::nullopt;
            const bool at_lo = i.lo.is_finite() && x == i.lo.value();
            const bool at_hi = i.hi.is_finite() && x == i.hi.value();
            if (at_lo && at_hi) return ClosedInterval{ExtReal::neg_inf(), ExtReal::pos_inf()};
            if (at_lo) return ClosedInterval{ExtReal::neg_inf(), 0.0};
            if (at_hi) return ClosedInterval{0.0, ExtReal::pos_inf()};
            return point(0.0);
          },
          [x](const AbsValue& a) -> std::optional<ClosedInterval> {
            if (x > 0.0) return point(a.scale);
            if (x < 0.0) return point(-a.scale);
            return ClosedInterval{-a.scale, a.scale};
          },
          [x](const Quadratic& q) -> std::optional<ClosedInterval> { return point(q.curvature * x); },
          [x](const EvenPower& e) -> std::optional<ClosedInterval> {
            return point(e.scale * e.exponent * ipow(x, e.exponent - 1));
          },
          [x](const MaxAffine& m) { return max_affine_subgradient(m, x); },
          [x](const Custom& c) { return custom_subgradient(c, x); },
      },
      psi.kind());
}

double resolvent(const ConvexSpec& psi, double lambda, double x, const ResolventOptions& opts) {
  if (!(lambda > 0.0)) throw InvalidParams("resolvent requires lambda > 0");
  return std::visit(Overloaded{
                        [x](const IndicatorInterval& i) { return ClosedInterval{i.lo, i.hi}.clamp(x); },
                        [x, lambda](const AbsValue& a) {
                          const double t = lambda * a.scale;
                          if (x > t) return x - t;
                          if (x < -t) return x + t;
                          return 0.0;
                        },
                        [x, lambda](const Quadratic& q) { return x / (1.0 + lambda * q.curvature); },
                        [&](const EvenPower&) { return bisect_resolvent(psi, lambda, x, opts); },
                        [x, lambda](const MaxAffine& m) { return max_affine_resolvent(m, lambda, x); },
                        [&](const Custom&) { return bisect_resolvent(psi, lambda, x, opts); },
                    },
                    psi.kind());
}

double project_domain(const ConvexSpec& psi, double x) { return psi.domain().clamp(x); }

YosidaView::YosidaView(ConvexSpec psi, double n_) : base{std::move(psi)}, n{n_} {
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidParams("YosidaView requires n > 0");
}

double moreau_envelope(const YosidaView& view, double x) {
  const double j = view.resolvent(x);
  const double d = x - j;
  return 0.5 * view.n * d * d + view.base.value(j).value();
}

// Closed forms where available: n * (x - J x) loses about n * ulp(x) to cancellation.
double yosida_gradient(const YosidaView& view, double x) {
  const double n = view.n;
  return std::visit(Overloaded{
                        [&](const AbsValue& a) { return std::clamp(n * x, -a.scale, a.scale); },
                        [&](const Quadratic& q) { return q.curvature * view.resolvent(x); },
                        [&](const MaxAffine& m) {
                          const double j = view.resolvent(x);
                          for (std::size_t i = 0; i < m.pieces.size(); ++i) {
                            const double left = i == 0 ? -kInf : m.breaks[i - 1];
                            const double right = i + 1 == m.pieces.size() ? kInf : m.breaks[i];
                            if (j > left && j < right) return m.pieces[i].slope;
                          }
                          return n * (x - j);
                        },
                        [&](const auto&) { return n * (x - view.resolvent(x)); },
                    },
                    view.base.kind());
}

}  // namespace svi
