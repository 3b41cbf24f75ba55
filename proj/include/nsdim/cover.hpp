#pragma once

#include <nsdim/netmatrix.hpp>

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsdim {

enum class Metric { Euclidean, SupNorm, ScaledL2 };

std::string to_string(Metric metric);
/// Accepts "euclidean", "sup", "scaled-l2".
Metric metric_from_name(std::string_view name);

/// Finite point set in R^d. Each column of `points` is one point.
struct MetricPoints {
  Eigen::MatrixXd points;  // dim x count
  Metric metric = Metric::Euclidean;

  Eigen::Index count() const { return points.cols(); }
  Eigen::Index dim() const { return points.rows(); }

  double distance(Eigen::Index a, Eigen::Index b) const;

  static MetricPoints from_rows(const std::vector<std::vector<double>>& rows, Metric metric);
};

double distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                Metric metric);

enum class CoverMethod { Greedy, Exact };

/// Closed eps-balls around sample points covering the whole set.
struct CoverResult {
  std::vector<Eigen::Index> centers;
  double radius = 0.0;
  std::size_t size = 0;
  CoverMethod method = CoverMethod::Greedy;
  Metric metric = Metric::Euclidean;
};

/// delta(S1, S2) = max over a in S1 of the distance from a to its nearest point of S2.
/// Empty s1 gives 0; empty s2 throws DomainError.
double sparsity(const MetricPoints& s1, const MetricPoints& s2);

/// Repeatedly takes the lowest-index uncovered point as a center and marks every point
/// within eps of it as covered.
CoverResult greedy_cover(const MetricPoints& pts, double eps);

inline constexpr Eigen::Index kExactCoverLimit = 16;

/// Minimum-cardinality cover with centers restricted to the points, by exhaustive search
/// over center subsets. Ties go to the subset with the smallest bitmask.
CoverResult exact_cover(const MetricPoints& pts, double eps, Eigen::Index max_points = kExactCoverLimit);

/// Outer measure of a subset E of a finite metric space M: the fewest eps-balls centred at
/// points of `ambient` (= M) whose union contains every point listed in `members` (= E).
/// Unlike exact_cover on E alone this is monotone in E.
CoverResult exact_subset_cover(const MetricPoints& ambient, std::span<const Eigen::Index> members, double eps,
                               Eigen::Index max_points = kExactCoverLimit);

/// True when every point lies within eps of some center.
bool covers(const MetricPoints& pts, const CoverResult& cover);

/// Treats each column of H (one sampled function on the grid) as a point and returns the
/// greedy cover: an empirical upper estimate of the eps outer measure of the family.
CoverResult function_family_cover(const HiddenMatrix& m, double eps, Metric metric = Metric::SupNorm);

}  // namespace nsdim
