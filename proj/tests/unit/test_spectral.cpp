#include <gtest/gtest.h>

#include <nsdim/errors.hpp>
#include <nsdim/spectral.hpp>

#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace nsdim;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = dist(gen);
  return m;
}

Eigen::MatrixXd random_orthogonal(Eigen::Index n, unsigned seed) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(n, n, seed));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

// U diag(s) V^T with prescribed singular values.
Eigen::MatrixXd with_spectrum(const Eigen::VectorXd& s, Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index k = 0; k < s.size(); ++k) d(k, k) = s(k);
  return random_orthogonal(rows, seed) * d * random_orthogonal(cols, seed + 1).transpose();
}

}  // namespace

TEST(Spectrum, FullSvdMatchesEigenJacobi) {
  for (auto [r, c] : {std::pair{30, 12}, std::pair{12, 30}, std::pair{25, 25}}) {
    const Eigen::MatrixXd m = random_matrix(r, c, 17 + r);
    const SingularSpectrum s = singular_spectrum(m, SpectrumMethod::FullSVD);
    const Eigen::VectorXd ref = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
    ASSERT_EQ(s.values.size(), static_cast<std::size_t>(ref.size()));
    for (Eigen::Index k = 0; k < ref.size(); ++k) EXPECT_NEAR(s.values[k], ref(k), 1e-12 * ref(0));
    EXPECT_EQ(s.rows, r);
    EXPECT_EQ(s.cols, c);
  }
}

TEST(Spectrum, RecoversPrescribedValues) {
  Eigen::VectorXd s(6);
  s << 10.0, 3.0, 1.0, 1e-3, 1e-6, 1e-9;
  const Eigen::MatrixXd m = with_spectrum(s, 20, 6, 3);
  const SingularSpectrum out = singular_spectrum(m, SpectrumMethod::FullSVD);
  for (Eigen::Index k = 0; k < 6; ++k) EXPECT_NEAR(out.values[k], s(k), 1e-13 * 10.0);
}

TEST(Spectrum, GramAgreesAboveItsFloor) {
  const Eigen::MatrixXd m = random_matrix(200, 80, 5).array().tanh().matrix();
  const SingularSpectrum full = singular_spectrum(m, SpectrumMethod::FullSVD);
  const SingularSpectrum gram = singular_spectrum(m, SpectrumMethod::GramEig);
  EXPECT_EQ(gram.method, SpectrumMethod::GramEig);
  EXPECT_GT(gram.trust_floor, 0.0);
  for (std::size_t k = 0; k < full.values.size(); ++k) {
    if (full.values[k] > gram.trust_floor) EXPECT_NEAR(gram.values[k], full.values[k], 1e-9 * full.max());
  }
}

TEST(Spectrum, ValuesNonincreasingNonnegative) {
  const Eigen::MatrixXd m = random_matrix(50, 70, 8);
  for (auto method : {SpectrumMethod::FullSVD, SpectrumMethod::GramEig, SpectrumMethod::Auto}) {
    const SingularSpectrum s = singular_spectrum(m, method);
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      EXPECT_GE(s.values[k], 0.0);
      if (k > 0) EXPECT_LE(s.values[k], s.values[k - 1]);
    }
  }
}

TEST(Spectrum, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(singular_spectrum(Eigen::MatrixXd(0, 3)), ArgumentError);
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(3, 3);
  m(1, 1) = std::nan("");
  EXPECT_ANY_THROW(singular_spectrum(m));
}

TEST(Threshold, ParseAndPrintRoundTrip) {
  for (const char* text : {"abs:1e-07", "rel:1e-12", "machine", "abs:0.25"}) {
    const ThresholdPolicy p = ThresholdPolicy::parse(text);
    EXPECT_EQ(ThresholdPolicy::parse(p.to_string()), p) << text;
  }
  EXPECT_EQ(ThresholdPolicy::parse("abs:1e-7").mode, ThresholdPolicy::Mode::Absolute);
  EXPECT_EQ(ThresholdPolicy::parse("rel:1e-7").mode, ThresholdPolicy::Mode::RelativeMax);
  for (const char* bad : {"abs:", "abs:-1", "abs:0", "rel:x", "foo:1", "", "abs:nan"}) {
    EXPECT_THROW(ThresholdPolicy::parse(bad), ArgumentError) << bad;
  }
}

TEST(Threshold, CutoffModes) {
  SingularSpectrum s;
  s.values = {4.0, 2.0, 1e-3, 1e-9};
  s.rows = 10;
  s.cols = 4;
  EXPECT_EQ(ThresholdPolicy::absolute(1e-3).cutoff(s), 1e-3);
  EXPECT_EQ(ThresholdPolicy::relative(0.5).cutoff(s), 2.0);
  EXPECT_DOUBLE_EQ(ThresholdPolicy::machine().cutoff(s), 4.0 * 10 * std::numeric_limits<double>::epsilon());
}

TEST(Threshold, CountIsStrict) {
  SingularSpectrum s;
  s.values = {4.0, 2.0, 1e-3, 1e-9};
  s.rows = 4;
  s.cols = 4;
  // A value equal to the cutoff is not counted.
  EXPECT_EQ(nnsv_count(s, ThresholdPolicy::absolute(1e-3)).nnsv_count, 2u);
  EXPECT_EQ(nnsv_count(s, ThresholdPolicy::absolute(1e-10)).nnsv_count, 4u);
  EXPECT_EQ(nnsv_count(s, ThresholdPolicy::absolute(10.0)).nnsv_count, 0u);
  EXPECT_EQ(nnsv_count(s, ThresholdPolicy::relative(0.5)).nnsv_count, 1u);
}

TEST(Threshold, CountMatchesPrescribedRank) {
  Eigen::VectorXd s(5);
  s << 5.0, 1.0, 0.1, 0.0, 0.0;
  const Eigen::MatrixXd m = with_spectrum(s, 12, 5, 21);
  EXPECT_EQ(measure_nnsv(m, ThresholdPolicy::absolute(1e-8)).nnsv_count, 3u);
  EXPECT_EQ(measure_nnsv(m, ThresholdPolicy::machine()).nnsv_count, 3u);
}

TEST(Threshold, GramFallsBackBelowItsFloor) {
  const Eigen::MatrixXd m = random_matrix(100, 60, 2).array().tanh().matrix();
  const NsdimReport coarse = measure_nnsv(m, ThresholdPolicy::absolute(1e-2), SpectrumMethod::GramEig);
  EXPECT_FALSE(coarse.gram_fallback);
  EXPECT_EQ(coarse.spectrum.method, SpectrumMethod::GramEig);
  const NsdimReport fine = measure_nnsv(m, ThresholdPolicy::absolute(1e-17), SpectrumMethod::GramEig);
  EXPECT_TRUE(fine.gram_fallback);
  EXPECT_EQ(fine.spectrum.method, SpectrumMethod::FullSVD);
  EXPECT_EQ(fine.requested, SpectrumMethod::GramEig);
}

TEST(Threshold, MethodNames) {
  EXPECT_EQ(spectrum_method_from_name("svd"), SpectrumMethod::FullSVD);
  EXPECT_EQ(spectrum_method_from_name("gram"), SpectrumMethod::GramEig);
  EXPECT_EQ(spectrum_method_from_name("auto"), SpectrumMethod::Auto);
  EXPECT_THROW(spectrum_method_from_name("qr"), ArgumentError);
}

TEST(LeastSquares, ExactForConsistentSystem) {
  const Eigen::MatrixXd h = random_matrix(40, 10, 4);
  const Eigen::VectorXd beta = random_matrix(10, 1, 5);
  const LeastSquaresFit fit = solve_least_squares(h, h * beta, 1e-15);
  EXPECT_LT((fit.beta - beta).norm(), 1e-12);
  EXPECT_LT(fit.residual_linf, 1e-13);
  EXPECT_EQ(fit.rank_used, 10u);
  EXPECT_EQ(fit.evaluation, "training");
}

TEST(LeastSquares, MatchesOrthogonalDecompositionSolution) {
  const Eigen::MatrixXd h = random_matrix(30, 8, 6);
  const Eigen::VectorXd y = random_matrix(30, 1, 7);
  const LeastSquaresFit fit = solve_least_squares(h, y, 1e-15);
  const Eigen::VectorXd ref = h.completeOrthogonalDecomposition().solve(y);
  EXPECT_LT((fit.beta - ref).norm(), 1e-12);
  EXPECT_NEAR(fit.residual_l2, (h * ref - y).norm() / std::sqrt(30.0), 1e-13);
}

TEST(LeastSquares, RcondDropsSmallDirections) {
  Eigen::VectorXd s(4);
  s << 1.0, 0.5, 1e-6, 1e-10;
  const Eigen::MatrixXd h = with_spectrum(s, 10, 4, 31);
  const Eigen::VectorXd y = random_matrix(10, 1, 9);
  EXPECT_EQ(solve_least_squares(h, y, 1e-8).rank_used, 3u);
  EXPECT_EQ(solve_least_squares(h, y, 1e-3).rank_used, 2u);
  EXPECT_THROW(solve_least_squares(h, y, -1.0), ArgumentError);
  EXPECT_THROW(solve_least_squares(h, Eigen::VectorXd::Zero(3), 1e-8), ArgumentError);
}

TEST(LeastSquares, NetworkFitReportsMeshError) {
  const InputGrid grid = make_grid(Box::unit(1), 60, GridMode::Mesh);
  const HiddenMatrix h = build_single_layer(grid, {1, 1.0, Distribution::Uniform}, 60, Activation{}, {42, 0});
  const auto smooth = [](std::span<const double> x) { return std::tanh(0.3 * x[0] - 0.1); };
  const LeastSquaresFit fit = solve_least_squares(h, smooth, 1e-15, 10);
  EXPECT_EQ(fit.eval_points, 600u);
  EXPECT_EQ(fit.evaluation, "mesh-10N");
  EXPECT_LT(fit.residual_linf, 1e-6);
  EXPECT_LE(fit.residual_l2, fit.residual_linf);
}

TEST(PrincipalBasis, EckartYoungResidual) {
  const Eigen::MatrixXd h = random_matrix(40, 25, 12);
  const SingularSpectrum s = singular_spectrum(h, SpectrumMethod::FullSVD);
  for (Eigen::Index k : {1, 5, 12}) {
    const Eigen::MatrixXd u = principal_basis(h, k);
    ASSERT_EQ(u.cols(), k);
    EXPECT_LT((u.transpose() * u - Eigen::MatrixXd::Identity(k, k)).norm(), 1e-12);
    const Eigen::MatrixXd residual = h - u * (u.transpose() * h);
    const double spectral = Eigen::JacobiSVD<Eigen::MatrixXd>(residual).singularValues()(0);
    EXPECT_NEAR(spectral, s.values[k], 1e-10);
  }
  EXPECT_THROW(principal_basis(h, 0), ArgumentError);
  EXPECT_THROW(principal_basis(h, 26), ArgumentError);
}

TEST(ThinSvd, Reconstructs) {
  const Eigen::MatrixXd h = random_matrix(15, 9, 13);
  const ThinSvd svd = thin_svd(h);
  EXPECT_EQ(svd.u.cols(), 9);
  EXPECT_LT((svd.u * svd.s.asDiagonal() * svd.vt - h).norm(), 1e-12);
}

TEST(EstimateNsdim, StopsAtFirstRepeatedCount) {
  const InputGrid grid = make_grid(Box::unit(1), 200, GridMode::Mesh);
  const std::vector<std::size_t> schedule{25, 50, 100, 200, 400};
  const NsdimEstimate est = estimate_nsdim(grid, {1, 1.0, Distribution::Uniform}, Activation{},
                                           ThresholdPolicy::absolute(1e-7), schedule, {42, 0});
  ASSERT_GE(est.counts.size(), 2u);
  if (est.saturated) {
    const auto n = est.counts.size();
    EXPECT_EQ(est.counts[n - 1].second, est.counts[n - 2].second);
    for (std::size_t i = 1; i + 1 < n; ++i) EXPECT_NE(est.counts[i].second, est.counts[i - 1].second);
  }
  EXPECT_EQ(est.report.nnsv_count, est.counts.back().second);
  EXPECT_EQ(est.width, est.counts.back().first);
  const std::vector<std::size_t> unsorted{50, 25};
  EXPECT_THROW(estimate_nsdim(grid, {1, 1.0, Distribution::Uniform}, Activation{}, ThresholdPolicy::absolute(1e-7),
                              unsorted, {42, 0}),
               ArgumentError);
}
