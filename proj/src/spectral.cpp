#include <nsdim/errors.hpp>
#include <nsdim/spectral.hpp>

#include <lapacke.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace nsdim {

namespace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

constexpr double kDoubleUlp = std::numeric_limits<double>::epsilon();
constexpr long double kLongUlp = std::numeric_limits<long double>::epsilon();

std::string dims(Eigen::Index r, Eigen::Index c) { return std::to_string(r) + "x" + std::to_string(c); }

// Relative resolution of sqrt(eig(H^T H)) computed in extended precision.
double gram_relative_floor(Eigen::Index min_dim) {
  return static_cast<double>(std::sqrt(static_cast<long double>(std::max<Eigen::Index>(min_dim, 1)) * kLongUlp));
}

SingularSpectrum svd_values(const Eigen::MatrixXd& h) {
  Eigen::MatrixXd a = h;
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  std::vector<double> s(static_cast<std::size_t>(std::min(m, n)));
  double dummy = 0.0;
  const lapack_int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), std::max<lapack_int>(1, m), s.data(), &dummy, 1, &dummy, 1);
  if (info != 0) {
    throw NumericError("dgesdd failed (info=" + std::to_string(info) + ") on " + dims(h.rows(), h.cols()) + " matrix");
  }
  SingularSpectrum out;
  out.values = std::move(s);
  out.rows = h.rows();
  out.cols = h.cols();
  out.method = SpectrumMethod::FullSVD;
  out.trust_floor = out.max() * static_cast<double>(std::max(h.rows(), h.cols())) * kDoubleUlp;
  return out;
}

SingularSpectrum gram_values(const Eigen::MatrixXd& h) {
  // Gram matrix of the smaller side, accumulated and diagonalized in long double.
  const bool tall = h.rows() >= h.cols();
  const MatrixXld a = tall ? MatrixXld(h.cast<long double>()) : MatrixXld(h.transpose().cast<long double>());
  MatrixXld g = MatrixXld::Zero(a.cols(), a.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXld> eig(g, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericError("Gram eigensolver did not converge on " + dims(h.rows(), h.cols()) + " matrix");
  }
  const auto& lambda = eig.eigenvalues();
  SingularSpectrum out;
  out.values.resize(static_cast<std::size_t>(lambda.size()));
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    const long double l = lambda(lambda.size() - 1 - k);
    out.values[static_cast<std::size_t>(k)] = l > 0 ? static_cast<double>(std::sqrt(l)) : 0.0;
  }
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  out.rows = h.rows();
  out.cols = h.cols();
  out.method = SpectrumMethod::GramEig;
  out.trust_floor = out.max() * gram_relative_floor(std::min(h.rows(), h.cols()));
  return out;
}

// Shortest text that parses back to the same double.
std::string format_eps(double eps) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), eps);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(SpectrumMethod method) {
  switch (method) {
    case SpectrumMethod::FullSVD:
      return "svd";
    case SpectrumMethod::GramEig:
      return "gram";
    case SpectrumMethod::Auto:
      return "auto";
  }
  return "auto";
}

SpectrumMethod spectrum_method_from_name(std::string_view name) {
  if (name == "svd") return SpectrumMethod::FullSVD;
  if (name == "gram") return SpectrumMethod::GramEig;
  if (name == "auto") return SpectrumMethod::Auto;
  throw ArgumentError("unknown method '" + std::string(name) + "' (expected svd, gram or auto)");
}

ThresholdPolicy ThresholdPolicy::absolute(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ArgumentError("threshold eps must be a positive finite number");
  return ThresholdPolicy{Mode::Absolute, eps};
}

ThresholdPolicy ThresholdPolicy::relative(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ArgumentError("threshold eps must be a positive finite number");
  return ThresholdPolicy{Mode::RelativeMax, eps};
}

ThresholdPolicy ThresholdPolicy::machine() { return ThresholdPolicy{Mode::MachineRelative, kDoubleUlp}; }

ThresholdPolicy ThresholdPolicy::parse(std::string_view text) {
  if (text == "machine") return machine();
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ArgumentError("policy '" + std::string(text) + "' must be abs:<eps>, rel:<eps> or machine");
  }
  const auto kind = text.substr(0, colon);
  const std::string num(text.substr(colon + 1));
  double eps = 0.0;
  try {
    std::size_t used = 0;
    eps = std::stod(num, &used);
    if (used != num.size()) throw std::invalid_argument(num);
  } catch (const std::exception&) {
    throw ArgumentError("policy '" + std::string(text) + "': cannot parse eps");
  }
  if (kind == "abs") return absolute(eps);
  if (kind == "rel") return relative(eps);
  throw ArgumentError("policy '" + std::string(text) + "' must be abs:<eps>, rel:<eps> or machine");
}

std::string ThresholdPolicy::to_string() const {
  switch (mode) {
    case Mode::Absolute:
      return "abs:" + format_eps(eps);
    case Mode::RelativeMax:
      return "rel:" + format_eps(eps);
    case Mode::MachineRelative:
      return "machine";
  }
  return "machine";
}

double ThresholdPolicy::cutoff(const SingularSpectrum& s) const {
  switch (mode) {
    case Mode::Absolute:
      return eps;
    case Mode::RelativeMax:
      return eps * s.max();
    case Mode::MachineRelative:
      return s.max() * static_cast<double>(std::max(s.rows, s.cols)) * kDoubleUlp;
  }
  return eps;
}

SingularSpectrum singular_spectrum(const Eigen::MatrixXd& h, SpectrumMethod method) {
  if (h.size() == 0) throw ArgumentError("singular_spectrum: empty matrix");
  if (!h.allFinite()) throw NumericError("singular_spectrum: non-finite entries in " + dims(h.rows(), h.cols()) + " matrix");
  if (method == SpectrumMethod::Auto) {
    method = std::min(h.rows(), h.cols()) <= kAutoSvdLimit ? SpectrumMethod::FullSVD : SpectrumMethod::GramEig;
  }
  return method == SpectrumMethod::FullSVD ? svd_values(h) : gram_values(h);
}

SingularSpectrum singular_spectrum(const HiddenMatrix& m, SpectrumMethod method) {
  try {
    return singular_spectrum(m.values(), method);
  } catch (const NumericError& e) {
    throw NumericError(std::string(e.what()) + " [network seed " + std::to_string(m.network().seed.master_seed) + "/" +
                       std::to_string(m.network().seed.stream_index) + ", " +
                       std::to_string(m.network().layers.size()) + " layer(s)]");
  }
}

NsdimReport nnsv_count(const SingularSpectrum& s, const ThresholdPolicy& policy) {
  NsdimReport r;
  r.spectrum = s;
  r.policy = policy;
  r.cutoff_used = policy.cutoff(s);
  r.nnsv_count = static_cast<std::size_t>(
      std::count_if(s.values.begin(), s.values.end(), [&](double v) { return v > r.cutoff_used; }));
  r.requested = s.method;
  return r;
}

NsdimReport measure_nnsv(const Eigen::MatrixXd& h, const ThresholdPolicy& policy, SpectrumMethod method) {
  const SpectrumMethod requested = method;
  const Eigen::Index min_dim = std::min(h.rows(), h.cols());
  if (method == SpectrumMethod::Auto) {
    method = min_dim <= kAutoSvdLimit ? SpectrumMethod::FullSVD : SpectrumMethod::GramEig;
  }
  bool fallback = false;
  if (method == SpectrumMethod::GramEig) {
    const double rel_floor = gram_relative_floor(min_dim);
    switch (policy.mode) {
      case ThresholdPolicy::Mode::Absolute:
        // ||H||_F bounds sigma_max from above.
        fallback = !(policy.eps > h.norm() * rel_floor);
        break;
      case ThresholdPolicy::Mode::RelativeMax:
        fallback = !(policy.eps > rel_floor);
        break;
      case ThresholdPolicy::Mode::MachineRelative:
        fallback = true;
        break;
    }
    if (fallback) method = SpectrumMethod::FullSVD;
  }
  NsdimReport r = nnsv_count(singular_spectrum(h, method), policy);
  r.requested = requested;
  r.gram_fallback = fallback;
  return r;
}

NsdimEstimate estimate_nsdim(const InputGrid& grid, const NPSpaceSpec& np_space, const Activation& activation,
                             const ThresholdPolicy& policy, std::span<const std::size_t> width_schedule,
                             const SeedSpec& seed, SpectrumMethod method, const BuildOptions& options) {
  if (width_schedule.size() < 2) throw ArgumentError("estimate_nsdim: width schedule needs at least 2 entries");
  for (std::size_t i = 1; i < width_schedule.size(); ++i) {
    if (width_schedule[i] <= width_schedule[i - 1]) {
      throw ArgumentError("estimate_nsdim: width schedule must be strictly increasing");
    }
  }
  NsdimEstimate est;
  for (std::size_t i = 0; i < width_schedule.size(); ++i) {
    const std::size_t width = width_schedule[i];
    const HiddenMatrix m = build_single_layer(grid, np_space, width, activation, seed, options);
    est.report = measure_nnsv(m.values(), policy, method);
    est.width = width;
    est.counts.emplace_back(width, est.report.nnsv_count);
    if (i > 0 && est.counts[i].second == est.counts[i - 1].second) {
      est.saturated = true;
      break;
    }
  }
  return est;
}

ThinSvd thin_svd(const Eigen::MatrixXd& h) {
  if (h.size() == 0) throw ArgumentError("thin_svd: empty matrix");
  if (!h.allFinite()) throw NumericError("thin_svd: non-finite entries in " + dims(h.rows(), h.cols()) + " matrix");
  Eigen::MatrixXd a = h;
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  ThinSvd out;
  out.u.resize(m, k);
  out.s.resize(k);
  out.vt.resize(k, n);
  const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, out.s.data(), out.u.data(), m,
                                         out.vt.data(), k);
  if (info != 0) {
    throw NumericError("dgesdd failed (info=" + std::to_string(info) + ") on " + dims(h.rows(), h.cols()) + " matrix");
  }
  return out;
}

namespace {

struct PinvResult {
  Eigen::VectorXd beta;
  std::size_t rank = 0;
};

PinvResult pinv_apply(const Eigen::MatrixXd& h, const Eigen::VectorXd& target, double rcond) {
  const ThinSvd svd = thin_svd(h);
  const double cutoff = rcond * (svd.s.size() > 0 ? svd.s(0) : 0.0);
  Eigen::VectorXd coeff = svd.u.transpose() * target;
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < svd.s.size(); ++k) {
    if (svd.s(k) > cutoff) {
      coeff(k) /= svd.s(k);
      ++rank;
    } else {
      coeff(k) = 0.0;
    }
  }
  return PinvResult{svd.vt.transpose() * coeff, rank};
}

void check_fit_args(Eigen::Index rows, const Eigen::VectorXd& target, double rcond) {
  if (target.size() != rows) {
    throw ArgumentError("solve_least_squares: target has " + std::to_string(target.size()) + " values, matrix has " +
                        std::to_string(rows) + " rows");
  }
  if (!target.allFinite()) throw ArgumentError("solve_least_squares: non-finite target value");
  if (!(rcond > 0.0) || !std::isfinite(rcond)) throw ArgumentError("solve_least_squares: rcond must be positive");
}

void fill_residuals(LeastSquaresFit& fit, const Eigen::VectorXd& err) {
  fit.residual_l2 = err.size() ? std::sqrt(err.squaredNorm() / static_cast<double>(err.size())) : 0.0;
  fit.residual_linf = err.size() ? err.cwiseAbs().maxCoeff() : 0.0;
  fit.eval_points = static_cast<std::size_t>(err.size());
}

}  // namespace

LeastSquaresFit solve_least_squares(const Eigen::MatrixXd& h, const Eigen::VectorXd& target, double rcond) {
  check_fit_args(h.rows(), target, rcond);
  const PinvResult p = pinv_apply(h, target, rcond);
  LeastSquaresFit fit;
  fit.beta = p.beta;
  fit.rank_used = p.rank;
  fit.rcond_used = rcond;
  fit.evaluation = "training";
  fill_residuals(fit, h * fit.beta - target);
  return fit;
}

LeastSquaresFit solve_least_squares(const HiddenMatrix& m, const ScalarField& target, double rcond,
                                    std::size_t eval_factor) {
  if (eval_factor < 1) throw ArgumentError("solve_least_squares: eval_factor must be >= 1");
  const auto& pts = m.grid().points;
  Eigen::VectorXd y(pts.rows());
  std::vector<double> x(static_cast<std::size_t>(pts.cols()));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index k = 0; k < pts.cols(); ++k) x[static_cast<std::size_t>(k)] = pts(i, k);
    y(i) = target(x);
  }
  check_fit_args(m.rows(), y, rcond);
  const PinvResult p = pinv_apply(m.values(), y, rcond);

  const InputGrid dense =
      make_grid(m.grid().domain, eval_factor * static_cast<std::size_t>(m.rows()), GridMode::Mesh);
  const Eigen::MatrixXd h_eval = evaluate_network(dense.points, m.network(), m.params());
  Eigen::VectorXd err = h_eval * p.beta;
  for (Eigen::Index i = 0; i < dense.points.rows(); ++i) {
    for (Eigen::Index k = 0; k < dense.points.cols(); ++k) x[static_cast<std::size_t>(k)] = dense.points(i, k);
    err(i) -= target(x);
  }
  LeastSquaresFit fit;
  fit.beta = p.beta;
  fit.rank_used = p.rank;
  fit.rcond_used = rcond;
  fit.evaluation = "mesh-" + std::to_string(eval_factor) + "N";
  fill_residuals(fit, err);
  return fit;
}

Eigen::MatrixXd principal_basis(const Eigen::MatrixXd& h, Eigen::Index k) {
  if (k < 1 || k > std::min(h.rows(), h.cols())) {
    throw ArgumentError("principal_basis: k=" + std::to_string(k) + " outside [1, " +
                        std::to_string(std::min(h.rows(), h.cols())) + "]");
  }
  return thin_svd(h).u.leftCols(k);
}

Eigen::MatrixXd principal_basis(const HiddenMatrix& m, Eigen::Index k) { return principal_basis(m.values(), k); }

}  // namespace nsdim
