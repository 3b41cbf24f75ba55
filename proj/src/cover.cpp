#include <nsdim/cover.hpp>
#include <nsdim/errors.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace nsdim {

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::Euclidean:
      return "euclidean";
    case Metric::SupNorm:
      return "sup";
    case Metric::ScaledL2:
      return "scaled-l2";
  }
  return "euclidean";
}

Metric metric_from_name(std::string_view name) {
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "sup" || name == "supnorm") return Metric::SupNorm;
  if (name == "scaled-l2" || name == "scaledl2") return Metric::ScaledL2;
  throw ArgumentError("unknown metric '" + std::string(name) + "' (expected euclidean, sup or scaled-l2)");
}

double distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                Metric metric) {
  switch (metric) {
    case Metric::Euclidean:
      return (a - b).norm();
    case Metric::SupNorm:
      return a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0;
    case Metric::ScaledL2:
      return a.size() ? (a - b).norm() / std::sqrt(static_cast<double>(a.size())) : 0.0;
  }
  return 0.0;
}

double MetricPoints::distance(Eigen::Index a, Eigen::Index b) const {
  return nsdim::distance(points.col(a), points.col(b), metric);
}

MetricPoints MetricPoints::from_rows(const std::vector<std::vector<double>>& rows, Metric metric) {
  MetricPoints pts;
  pts.metric = metric;
  const auto dim = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  pts.points.resize(dim, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (static_cast<Eigen::Index>(rows[j].size()) != dim) {
      throw ArgumentError("points: row " + std::to_string(j) + " has " + std::to_string(rows[j].size()) +
                          " coordinates, expected " + std::to_string(dim));
    }
    for (Eigen::Index k = 0; k < dim; ++k) pts.points(k, static_cast<Eigen::Index>(j)) = rows[j][k];
  }
  return pts;
}

double sparsity(const MetricPoints& s1, const MetricPoints& s2) {
  if (s1.count() == 0) return 0.0;
  if (s2.count() == 0) throw DomainError("sparsity: reference set is empty");
  if (s1.dim() != s2.dim()) throw ArgumentError("sparsity: point dimensions differ");
  if (s1.metric != s2.metric) throw ArgumentError("sparsity: metrics differ");
  double worst = 0.0;
  for (Eigen::Index a = 0; a < s1.count(); ++a) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index b = 0; b < s2.count(); ++b) {
      nearest = std::min(nearest, distance(s1.points.col(a), s2.points.col(b), s1.metric));
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

CoverResult greedy_cover(const MetricPoints& pts, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("greedy_cover: eps must be positive");
  CoverResult r;
  r.radius = eps;
  r.method = CoverMethod::Greedy;
  r.metric = pts.metric;
  std::vector<char> covered(static_cast<std::size_t>(pts.count()), 0);
  for (Eigen::Index c = 0; c < pts.count(); ++c) {
    if (covered[static_cast<std::size_t>(c)]) continue;
    r.centers.push_back(c);
    for (Eigen::Index p = c; p < pts.count(); ++p) {
      if (!covered[static_cast<std::size_t>(p)] && pts.distance(c, p) <= eps) covered[static_cast<std::size_t>(p)] = 1;
    }
  }
  r.size = r.centers.size();
  return r;
}

CoverResult exact_subset_cover(const MetricPoints& ambient, std::span<const Eigen::Index> members, double eps,
                               Eigen::Index max_points) {
  if (!(eps > 0.0)) throw ArgumentError("exact_cover: eps must be positive");
  max_points = std::min(max_points, kExactCoverLimit);
  const Eigen::Index n = ambient.count();
  if (n > max_points) {
    throw ArgumentError("exact_cover: " + std::to_string(n) + " points exceed the limit of " +
                        std::to_string(max_points) + "; use greedy_cover");
  }
  std::uint32_t target = 0;
  for (Eigen::Index m : members) {
    if (m < 0 || m >= n) throw ArgumentError("exact_cover: member index " + std::to_string(m) + " out of range");
    target |= 1u << m;
  }
  CoverResult r;
  r.radius = eps;
  r.method = CoverMethod::Exact;
  r.metric = ambient.metric;
  if (target == 0) return r;

  // reach[c] = bitmask of points inside the ball around point c.
  std::vector<std::uint32_t> reach(static_cast<std::size_t>(n), 0);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index p = 0; p < n; ++p) {
      if (ambient.distance(c, p) <= eps) reach[static_cast<std::size_t>(c)] |= 1u << p;
    }
  }
  // Increasing mask order with a strict comparison keeps the smallest mask among optimal covers.
  const std::uint32_t subsets = 1u << n;
  std::vector<std::uint32_t> union_of(subsets, 0);
  std::uint32_t best = 0;
  int best_size = static_cast<int>(n) + 1;
  for (std::uint32_t s = 1; s < subsets; ++s) {
    const std::uint32_t low = s & (~s + 1u);
    union_of[s] = union_of[s ^ low] | reach[static_cast<std::size_t>(std::countr_zero(low))];
    const int size = std::popcount(s);
    if ((union_of[s] & target) == target && size < best_size) {
      best = s;
      best_size = size;
    }
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    if (best & (1u << c)) r.centers.push_back(c);
  }
  r.size = r.centers.size();
  return r;
}

CoverResult exact_cover(const MetricPoints& pts, double eps, Eigen::Index max_points) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(pts.count()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  return exact_subset_cover(pts, all, eps, max_points);
}

bool covers(const MetricPoints& pts, const CoverResult& cover) {
  for (Eigen::Index p = 0; p < pts.count(); ++p) {
    bool hit = false;
    for (Eigen::Index c : cover.centers) {
      if (pts.distance(c, p) <= cover.radius) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return cover.size == cover.centers.size();
}

CoverResult function_family_cover(const HiddenMatrix& m, double eps, Metric metric) {
  if (metric == Metric::Euclidean) {
    throw ArgumentError("function_family_cover: metric must be sup or scaled-l2");
  }
  MetricPoints pts{m.values(), metric};
  return greedy_cover(pts, eps);
}

}  // namespace nsdim
