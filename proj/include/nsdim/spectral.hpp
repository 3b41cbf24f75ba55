#pragma once

#include <nsdim/netmatrix.hpp>

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsdim {

enum class SpectrumMethod { FullSVD, GramEig, Auto };

std::string to_string(SpectrumMethod method);
/// Accepts "svd", "gram", "auto".
SpectrumMethod spectrum_method_from_name(std::string_view name);

/// Above this min(N, Ntilde) the Auto method switches from FullSVD to GramEig.
inline constexpr Eigen::Index kAutoSvdLimit = 4096;

struct SingularSpectrum {
  std::vector<double> values;  // nonincreasing, all >= 0, length min(rows, cols)
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  SpectrumMethod method = SpectrumMethod::FullSVD;
  // Singular values below this are not resolved by the method that produced them.
  double trust_floor = 0.0;

  double max() const { return values.empty() ? 0.0 : values.front(); }
};

/// Rule that converts a spectrum into a count.
///   Absolute(eps):        cutoff = eps
///   RelativeMax(eps):     cutoff = eps * sigma_max
///   MachineRelative:      cutoff = sigma_max * max(N, Ntilde) * ulp(1)
struct ThresholdPolicy {
  enum class Mode { Absolute, RelativeMax, MachineRelative };

  Mode mode = Mode::Absolute;
  double eps = 1e-7;

  static ThresholdPolicy absolute(double eps);
  static ThresholdPolicy relative(double eps);
  static ThresholdPolicy machine();

  /// "abs:<eps>", "rel:<eps>" or "machine".
  static ThresholdPolicy parse(std::string_view text);
  std::string to_string() const;

  double cutoff(const SingularSpectrum& s) const;

  friend bool operator==(const ThresholdPolicy&, const ThresholdPolicy&) = default;
};

struct NsdimReport {
  SingularSpectrum spectrum;
  ThresholdPolicy policy;
  std::size_t nnsv_count = 0;
  double cutoff_used = 0.0;
  SpectrumMethod requested = SpectrumMethod::Auto;
  // True when GramEig was requested but could not resolve the cutoff and FullSVD ran instead.
  bool gram_fallback = false;
};

SingularSpectrum singular_spectrum(const Eigen::MatrixXd& h, SpectrumMethod method = SpectrumMethod::Auto);
SingularSpectrum singular_spectrum(const HiddenMatrix& m, SpectrumMethod method = SpectrumMethod::Auto);

/// nnsv_count = #{k : sigma_k > cutoff}.
NsdimReport nnsv_count(const SingularSpectrum& s, const ThresholdPolicy& policy);

/// Spectrum plus count. GramEig squares the matrix, so when the cutoff lies below what the
/// Gram route can resolve the FullSVD route runs instead and the report says so.
NsdimReport measure_nnsv(const Eigen::MatrixXd& h, const ThresholdPolicy& policy,
                         SpectrumMethod method = SpectrumMethod::Auto);

struct NsdimEstimate {
  NsdimReport report;
  std::size_t width = 0;
  bool saturated = false;
  std::vector<std::pair<std::size_t, std::size_t>> counts;  // (width, nnsv_count) per evaluated width
};

/// Builds H at each width of a strictly increasing schedule and stops at the first width
/// whose count equals the previous one. Without such a pair the last width is reported
/// with saturated = false.
NsdimEstimate estimate_nsdim(const InputGrid& grid, const NPSpaceSpec& np_space, const Activation& activation,
                             const ThresholdPolicy& policy, std::span<const std::size_t> width_schedule,
                             const SeedSpec& seed, SpectrumMethod method = SpectrumMethod::Auto,
                             const BuildOptions& options = {});

struct ThinSvd {
  Eigen::MatrixXd u;   // rows x k
  Eigen::VectorXd s;   // k, nonincreasing
  Eigen::MatrixXd vt;  // k x cols
};

/// Economy SVD, k = min(rows, cols).
ThinSvd thin_svd(const Eigen::MatrixXd& h);

struct LeastSquaresFit {
  Eigen::VectorXd beta;
  double residual_l2 = 0.0;    // root-mean-square error over the evaluation points
  double residual_linf = 0.0;  // max abs error over the evaluation points
  double rcond_used = 0.0;
  std::size_t rank_used = 0;   // singular values kept by the pseudo-inverse
  std::size_t eval_points = 0;
  std::string evaluation;      // "training" or "mesh-<factor>N"
};

using ScalarField = std::function<double(std::span<const double>)>;

/// Pseudo-inverse solution through the SVD; sigma_k <= rcond * sigma_max are dropped.
/// Residuals are measured on the rows of h.
LeastSquaresFit solve_least_squares(const Eigen::MatrixXd& h, const Eigen::VectorXd& target, double rcond);

/// Fits `target` sampled on m's grid, then re-evaluates the network on a mesh of
/// eval_factor * N points over the grid's domain and reports the errors there.
LeastSquaresFit solve_least_squares(const HiddenMatrix& m, const ScalarField& target, double rcond,
                                    std::size_t eval_factor = 10);

/// Top-k left singular vectors (N x k, orthonormal columns).
Eigen::MatrixXd principal_basis(const Eigen::MatrixXd& h, Eigen::Index k);
Eigen::MatrixXd principal_basis(const HiddenMatrix& m, Eigen::Index k);

}  // namespace nsdim
