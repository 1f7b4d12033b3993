#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "svi/extended_real.hpp"

namespace svi {

/// Uniformly weighted point cloud on the real line, atoms kept sorted.
class EmpiricalMeasure {
 public:
  /// Sorts once; throws InvalidParams on empty input or non-finite atoms.
  explicit EmpiricalMeasure(std::vector<double> atoms);

  /// The Dirac mass at x.
  static EmpiricalMeasure dirac(double x) { return EmpiricalMeasure{std::vector<double>{x}}; }

  std::size_t size() const { return atoms_.size(); }
  std::span<const double> atoms() const { return atoms_; }

  double mean() const { return mean_; }
  /// First absolute moment, cached at construction.
  double abs_mean() const { return abs_mean_; }
  double variance() const;
  /// Left-continuous inverse of the empirical CDF, u in [0, 1].
  double quantile(double u) const;

  friend bool operator==(const EmpiricalMeasure&, const EmpiricalMeasure&) = default;

 private:
  std::vector<double> atoms_;
  double mean_ = 0.0;
  double abs_mean_ = 0.0;
};

/// Exact W_p between two uniform empirical measures. Equal sizes pair the
/// order statistics; unequal sizes integrate |F^-1 - G^-1|^p over the
/// common refinement of the quantile breakpoints.
double wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p);

/// W_p^p, skipping the final root.
double wasserstein_pow(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p);

double moment(const EmpiricalMeasure& mu, double p);

/// (1/N) sum e^{a |x_i|}; overflow is reported as a tagged +inf.
ExtReal exp_moment(const EmpiricalMeasure& mu, double a);

/// W_1 distance to the Dirac mass at 0, i.e. the first absolute moment.
double w1_to_dirac0(const EmpiricalMeasure& mu);

/// One atom per line under a header naming the time index and scenario hash.
void write_measure_csv(std::ostream& os, const EmpiricalMeasure& mu, std::size_t time_index,
                       const std::string& scenario_hash);

}  // namespace svi
