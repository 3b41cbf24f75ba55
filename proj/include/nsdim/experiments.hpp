#pragma once

#include <nsdim/json_io.hpp>
#include <nsdim/spectral.hpp>
#include <nsdim/stats.hpp>

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace nsdim {

/// Named scalar target o(x) on the unit box.
struct TargetFunction {
  std::string name;
  ScalarField eval;

  /// Builtins: "sincos" = sin(4 pi (x + 0.05)) cos(5 pi (x + 0.05)) + 2 (1-D).
  static TargetFunction builtin(std::string_view name);
};

/// Replicate seeds {master, 0}, {master, 1}, ...
std::vector<SeedSpec> replicate_seeds(std::uint64_t master_seed, std::size_t count);

struct RunOptions {
  Activation activation;
  SpectrumMethod method = SpectrumMethod::Auto;
  unsigned threads = 1;
};

enum class SweepAxis { Width, Bound, Depth };
std::string to_string(SweepAxis axis);

struct SweepCell {
  SeedSpec seed;
  NsdimReport report;
  std::optional<LeastSquaresFit> fit;
};

struct SweepRow {
  double setting = 0.0;
  std::vector<SweepCell> cells;  // one per replicate seed, in seed order

  std::vector<double> counts() const;
  double median_count() const;
  double median_l2() const;
  double median_linf() const;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::Width;
  std::vector<SweepRow> rows;  // sorted by setting
  std::vector<SeedSpec> seeds;
  Json config;  // snapshot sufficient for replay_experiment

  // Bound sweeps only.
  std::optional<stats::LinearFit> trend;
  double pearson_r = 0.0;
  bool monotone = true;         // median counts nondecreasing along the sweep
  bool saturation_ok = true;    // post-hoc width check
  std::string warning;
};

struct ElmFitOptions {
  std::vector<std::size_t> sizes{50, 100, 200, 1000};
  double bound = 1.0;
  GridMode grid_mode = GridMode::Mesh;
  // numpy.linalg.matrix_rank(H, tol=1e-12): the tolerance is absolute.
  ThresholdPolicy rank_policy = ThresholdPolicy::absolute(1e-12);
  // numpy.linalg.pinv default cutoff, relative to sigma_max.
  double rcond = 1e-15;
  std::string target = "sincos";
  std::size_t eval_factor = 10;
};

/// ELM test: for each N = Ntilde, H on a grid of N points over [0, 1], rank under
/// rank_policy and a pseudo-inverse fit of the target evaluated on a 10N mesh.
SweepResult run_elm_fit(std::span<const SeedSpec> seeds, const ElmFitOptions& options = {},
                       const RunOptions& run = {});

/// NNSV count against width with N = Ntilde and x uniform on [0, 1].
SweepResult run_width_sweep(double bound, std::span<const std::size_t> widths, const ThresholdPolicy& policy,
                            std::span<const SeedSpec> seeds, const RunOptions& run = {});

/// NNSV count against R at fixed width, with a linear trend and a post-hoc saturation check
/// (the largest R is recounted at half width with the first seed; a change above 2 flags it).
SweepResult run_bound_sweep(std::span<const double> bounds, std::size_t width, const ThresholdPolicy& policy,
                            std::span<const SeedSpec> seeds, const RunOptions& run = {});

/// NNSV count of the last hidden layer for depths 1..max_depth. Widths above fullsvd_cap
/// are refused unless the Gram method is selected.
SweepResult run_depth_sweep(std::size_t max_depth, std::size_t width, double bound, const ThresholdPolicy& policy,
                            std::span<const SeedSpec> seeds, const RunOptions& run = {},
                            std::size_t fullsvd_cap = kAutoSvdLimit);

struct RpBpComparison {
  std::size_t width = 0;
  std::vector<double> error_random_columns;  // per seed, RMS on the evaluation mesh
  std::vector<double> train_error_random_columns;
  double error_principal = 0.0;        // RMS on the evaluation mesh
  double train_error_principal = 0.0;  // RMS on the training grid
  std::vector<std::size_t> nrp;        // numerical rank of each random column set
  std::size_t nbp = 0;                 // min(width, nsdim)

  double median_error_random() const;
  std::size_t median_nrp() const;
};

struct RpBpOptions {
  std::size_t grid_n = 500;
  double rcond = 1e-15;
  std::size_t eval_factor = 10;
};

struct RpBpResult {
  std::size_t wide_width = 0;
  std::size_t nsdim = 0;  // NNSV count of the wide matrix
  std::vector<RpBpComparison> rows;
  std::vector<SeedSpec> seeds;
  Json config;
};

/// Random-column fits (Ntilde fresh neurons, pseudo-inverse) against the principal-basis
/// surrogate: the NSdim left singular vectors of a wide matrix, extended to functions
/// through the network, ranked by the magnitude of the target's projection, first
/// min(Ntilde, NSdim) of them kept.
RpBpResult run_rp_vs_bp(const TargetFunction& target, std::span<const std::size_t> widths, std::size_t wide_width,
                        double bound, std::span<const SeedSpec> seeds, const ThresholdPolicy& policy,
                        const RpBpOptions& options = {}, const RunOptions& run = {});

using ExperimentResult = std::variant<SweepResult, RpBpResult>;

/// Re-runs the experiment recorded in a result's config snapshot.
ExperimentResult replay_experiment(const Json& config, unsigned threads = 1);

Json to_json(const NsdimReport& report);
Json to_json(const LeastSquaresFit& fit);
Json to_json(const SweepResult& result);
Json to_json(const RpBpResult& result);

}  // namespace nsdim
