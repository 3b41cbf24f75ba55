#include <nsdim/errors.hpp>
#include <nsdim/stats.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace nsdim::stats {

double median(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("stats: need two equal-length series of >= 2 values");
}

struct Moments {
  double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
};

Moments moments(std::span<const double> x, std::span<const double> y) {
  Moments m;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.mx += x[i];
    m.my += y[i];
  }
  m.mx /= n;
  m.my /= n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mx, dy = y[i] - m.my;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const Moments m = moments(x, y);
  if (m.sxx == 0.0 || m.syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return m.sxy / std::sqrt(m.sxx * m.syy);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const Moments m = moments(x, y);
  if (m.sxx == 0.0) throw ArgumentError("linear_fit: x values are all equal");
  LinearFit f;
  f.slope = m.sxy / m.sxx;
  f.intercept = m.my - f.slope * m.mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
  }
  f.r2 = m.syy > 0.0 ? 1.0 - ss_res / m.syy : 1.0;
  return f;
}

}  // namespace nsdim::stats
