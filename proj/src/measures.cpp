#include "svi/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svi/csv.hpp"
#include "svi/errors.hpp"

namespace svi {

namespace {

double cost(double a, double b, double p) {
  const double d = std::abs(a - b);
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  return std::pow(d, p);
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms) : atoms_{std::move(atoms)} {
  if (atoms_.empty()) throw InvalidParams("EmpiricalMeasure requires at least one atom");
  for (double a : atoms_)
    if (!std::isfinite(a)) throw InvalidParams("EmpiricalMeasure atoms must be finite");
  std::stable_sort(atoms_.begin(), atoms_.end());
  double s = 0.0;
  double sa = 0.0;
  for (double a : atoms_) {
    s += a;
    sa += std::abs(a);
  }
  mean_ = s / static_cast<double>(atoms_.size());
  abs_mean_ = sa / static_cast<double>(atoms_.size());
}

double EmpiricalMeasure::variance() const {
  const double m = mean();
  double s = 0.0;
  for (double a : atoms_) s += (a - m) * (a - m);
  return s / static_cast<double>(atoms_.size());
}

double EmpiricalMeasure::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidParams("quantile level must lie in [0, 1]");
  const auto n = atoms_.size();
  if (u <= 0.0) return atoms_.front();
  auto idx = static_cast<std::size_t>(std::ceil(u * static_cast<double>(n))) - 1;
  return atoms_[std::min(idx, n - 1)];
}

double wasserstein_pow(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
  if (!(p >= 1.0)) throw InvalidParams("wasserstein requires p >= 1");
  const auto x = mu.atoms();
  const auto y = nu.atoms();
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  double total = 0.0;
  if (n == m) {
    for (std::size_t i = 0; i < n; ++i) total += cost(x[i], y[i], p);
    return total / static_cast<double>(n);
  }
  // Breakpoints i/n and j/m compared as integers i*m vs j*n; each segment
  // between consecutive breakpoints pairs atom i of mu with atom j of nu.
  std::size_t i = 0;
  std::size_t j = 0;
  std::uint64_t prev = 0;  // current level times n*m
  const auto un = static_cast<std::uint64_t>(n);
  const auto um = static_cast<std::uint64_t>(m);
  while (i < n && j < m) {
    const std::uint64_t next_x = (i + 1) * um;
    const std::uint64_t next_y = (j + 1) * un;
    const std::uint64_t next = std::min(next_x, next_y);
    total += static_cast<double>(next - prev) * cost(x[i], y[j], p);
    prev = next;
    if (next_x == next) ++i;
    if (next_y == next) ++j;
  }
  return total / (static_cast<double>(n) * static_cast<double>(m));
}

double wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
  const double wp = wasserstein_pow(mu, nu, p);
  if (p == 1.0) return wp;
  if (p == 2.0) return std::sqrt(wp);
  return std::pow(wp, 1.0 / p);
}

double moment(const EmpiricalMeasure& mu, double p) {
  if (!(p > 0.0)) throw InvalidParams("moment requires p > 0");
  double s = 0.0;
  for (double a : mu.atoms()) s += p == 1.0 ? std::abs(a) : std::pow(std::abs(a), p);
  return s / static_cast<double>(mu.size());
}

ExtReal exp_moment(const EmpiricalMeasure& mu, double a) {
  if (!(a > 0.0)) throw InvalidParams("exp_moment requires a > 0");
  double s = 0.0;
  for (double x : mu.atoms()) {
    s += std::exp(a * std::abs(x));
    if (!std::isfinite(s)) return ExtReal::pos_inf();
  }
  return ExtReal{s / static_cast<double>(mu.size())};
}

double w1_to_dirac0(const EmpiricalMeasure& mu) { return mu.abs_mean(); }

void write_measure_csv(std::ostream& os, const EmpiricalMeasure& mu, std::size_t time_index,
                       const std::string& scenario_hash) {
  os << "# time_index=" << time_index << " scenario=" << scenario_hash << '\n';
  os << "atom\n";
  for (double a : mu.atoms()) os << format_double(a) << '\n';
}

}  // namespace svi
