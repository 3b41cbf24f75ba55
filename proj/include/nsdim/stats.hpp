#pragma once

#include <span>

namespace nsdim::stats {

/// Median; the mean of the two middle values for even sizes. Empty input gives NaN.
double median(std::span<const double> xs);

double pearson(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least-squares line y = slope * x + intercept.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace nsdim::stats
