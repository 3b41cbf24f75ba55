#include <nsdim/errors.hpp>
#include <nsdim/experiments.hpp>
#include <nsdim/parallel.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

namespace nsdim {

namespace {

constexpr int kSnapshotVersion = 1;

// Sub-streams of a replicate seed.
constexpr std::uint64_t kNetworkStream = 0;
constexpr std::uint64_t kGridStream = 1;

double sincos_target(std::span<const double> x) {
  const double t = x[0] + 0.05;
  return std::sin(4.0 * std::numbers::pi * t) * std::cos(5.0 * std::numbers::pi * t) + 2.0;
}

void require_seeds(std::span<const SeedSpec> seeds) {
  if (seeds.empty()) throw ArgumentError("at least one seed is required");
}

template <class T>
void require_increasing(std::span<const T> xs, const char* what) {
  if (xs.empty()) throw ArgumentError(std::string(what) + " must not be empty");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw ArgumentError(std::string(what) + " must be strictly increasing");
  }
}

Json seeds_json(std::span<const SeedSpec> seeds) {
  Json arr = Json::array();
  for (const auto& s : seeds) arr.push_back(to_json(s));
  return arr;
}

std::vector<SeedSpec> seeds_from_json(const Json& j) {
  std::vector<SeedSpec> seeds;
  for (const auto& s : j) seeds.push_back(seed_from_json(s));
  return seeds;
}

Json snapshot_base(std::string_view experiment, std::span<const SeedSpec> seeds, const RunOptions& run) {
  return Json{{"snapshot_version", kSnapshotVersion},
              {"experiment", experiment},
              {"prng", kRngAlgorithm},
              {"activation", run.activation.name()},
              {"method", to_string(run.method)},
              {"seeds", seeds_json(seeds)}};
}

RunOptions run_from_json(const Json& j, unsigned threads) {
  RunOptions run;
  run.activation = Activation::from_name(j.at("activation").get<std::string>());
  run.method = spectrum_method_from_name(j.at("method").get<std::string>());
  run.threads = threads;
  return run;
}

// Fills rows[i].cells[r] for every (setting i, replicate r) in parallel.
template <class CellFn>
std::vector<SweepRow> run_cells(std::span<const double> settings, std::span<const SeedSpec> seeds, unsigned threads,
                                CellFn&& cell) {
  std::vector<SweepRow> rows(settings.size());
  for (std::size_t i = 0; i < settings.size(); ++i) {
    rows[i].setting = settings[i];
    rows[i].cells.resize(seeds.size());
  }
  const std::size_t n_seeds = seeds.size();
  parallel_for(settings.size() * n_seeds, threads, [&](std::size_t job) {
    const std::size_t i = job / n_seeds;
    const std::size_t r = job % n_seeds;
    rows[i].cells[r] = cell(i, seeds[r]);
    rows[i].cells[r].seed = seeds[r];
  });
  return rows;
}

InputGrid unit_grid(std::size_t n, GridMode mode, const SeedSpec& replicate) {
  return make_grid(Box::unit(1), n, mode, replicate.child(kGridStream));
}

std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<double> to_doubles(std::span<const std::size_t> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TargetFunction TargetFunction::builtin(std::string_view name) {
  if (name == "sincos") return TargetFunction{"sincos", sincos_target};
  throw ArgumentError("unknown target '" + std::string(name) + "' (builtin: sincos)");
}

std::vector<SeedSpec> replicate_seeds(std::uint64_t master_seed, std::size_t count) {
  std::vector<SeedSpec> seeds;
  for (std::size_t r = 0; r < count; ++r) seeds.push_back(SeedSpec{master_seed, r});
  return seeds;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Width:
      return "width";
    case SweepAxis::Bound:
      return "bound";
    case SweepAxis::Depth:
      return "depth";
  }
  return "width";
}

std::vector<double> SweepRow::counts() const {
  std::vector<double> out;
  for (const auto& c : cells) out.push_back(static_cast<double>(c.report.nnsv_count));
  return out;
}

double SweepRow::median_count() const { return stats::median(counts()); }

double SweepRow::median_l2() const {
  std::vector<double> v;
  for (const auto& c : cells) {
    if (c.fit) v.push_back(c.fit->residual_l2);
  }
  return stats::median(v);
}

double SweepRow::median_linf() const {
  std::vector<double> v;
  for (const auto& c : cells) {
    if (c.fit) v.push_back(c.fit->residual_linf);
  }
  return stats::median(v);
}

SweepResult run_elm_fit(std::span<const SeedSpec> seeds, const ElmFitOptions& options, const RunOptions& run) {
  require_seeds(seeds);
  require_increasing<std::size_t>(options.sizes, "elm-fit sizes");
  const TargetFunction target = TargetFunction::builtin(options.target);
  const NPSpaceSpec space{1, options.bound, Distribution::Uniform};

  SweepResult result;
  result.axis = SweepAxis::Width;
  result.seeds.assign(seeds.begin(), seeds.end());
  result.config = snapshot_base("elm-fit", seeds, run);
  result.config["sizes"] = options.sizes;
  result.config["bound"] = options.bound;
  result.config["grid_mode"] = to_string(options.grid_mode);
  result.config["policy"] = options.rank_policy.to_string();
  result.config["rcond"] = options.rcond;
  result.config["target"] = target.name;
  result.config["eval_factor"] = options.eval_factor;

  const auto settings = to_doubles(options.sizes);
  result.rows = run_cells(settings, seeds, run.threads, [&](std::size_t i, const SeedSpec& seed) {
    const std::size_t n = options.sizes[i];
    const InputGrid grid = unit_grid(n, options.grid_mode, seed);
    const HiddenMatrix h = build_single_layer(grid, space, n, run.activation, seed.child(kNetworkStream));
    SweepCell cell;
    cell.report = measure_nnsv(h.values(), options.rank_policy, run.method);
    cell.fit = solve_least_squares(h, target.eval, options.rcond, options.eval_factor);
    return cell;
  });
  return result;
}

SweepResult run_width_sweep(double bound, std::span<const std::size_t> widths, const ThresholdPolicy& policy,
                            std::span<const SeedSpec> seeds, const RunOptions& run) {
  require_seeds(seeds);
  require_increasing(widths, "widths");
  const NPSpaceSpec space{1, bound, Distribution::Uniform};
  space.validate();

  SweepResult result;
  result.axis = SweepAxis::Width;
  result.seeds.assign(seeds.begin(), seeds.end());
  result.config = snapshot_base("sweep-width", seeds, run);
  result.config["bound"] = bound;
  result.config["widths"] = std::vector<std::size_t>(widths.begin(), widths.end());
  result.config["policy"] = policy.to_string();

  const auto settings = to_doubles(widths);
  result.rows = run_cells(settings, seeds, run.threads, [&](std::size_t i, const SeedSpec& seed) {
    const std::size_t n = widths[i];
    const InputGrid grid = unit_grid(n, GridMode::UniformRandom, seed);
    const HiddenMatrix h = build_single_layer(grid, space, n, run.activation, seed.child(kNetworkStream));
    SweepCell cell;
    cell.report = measure_nnsv(h.values(), policy, run.method);
    return cell;
  });
  return result;
}

SweepResult run_bound_sweep(std::span<const double> bounds, std::size_t width, const ThresholdPolicy& policy,
                            std::span<const SeedSpec> seeds, const RunOptions& run) {
  require_seeds(seeds);
  require_increasing(bounds, "R values");
  if (width < 2) throw ArgumentError("bound sweep width must be >= 2");
  for (double r : bounds) NPSpaceSpec{1, r, Distribution::Uniform}.validate();

  SweepResult result;
  result.axis = SweepAxis::Bound;
  result.seeds.assign(seeds.begin(), seeds.end());
  result.config = snapshot_base("sweep-bound", seeds, run);
  result.config["bounds"] = std::vector<double>(bounds.begin(), bounds.end());
  result.config["width"] = width;
  result.config["policy"] = policy.to_string();

  auto count_at = [&](double r, std::size_t n, const SeedSpec& seed) {
    const InputGrid grid = unit_grid(n, GridMode::UniformRandom, seed);
    const HiddenMatrix h =
        build_single_layer(grid, NPSpaceSpec{1, r, Distribution::Uniform}, n, run.activation, seed.child(kNetworkStream));
    return measure_nnsv(h.values(), policy, run.method);
  };
  result.rows = run_cells(bounds, seeds, run.threads, [&](std::size_t i, const SeedSpec& seed) {
    SweepCell cell;
    cell.report = count_at(bounds[i], width, seed);
    return cell;
  });

  std::vector<double> medians;
  for (const auto& row : result.rows) medians.push_back(row.median_count());
  for (std::size_t i = 1; i < medians.size(); ++i) {
    if (medians[i] < medians[i - 1]) result.monotone = false;
  }
  if (bounds.size() >= 2) {
    result.trend = stats::linear_fit(bounds, medians);
    result.pearson_r = stats::pearson(bounds, medians);
  }

  const double half_count = static_cast<double>(count_at(bounds.back(), width / 2, seeds.front()).nnsv_count);
  const double full_count = static_cast<double>(result.rows.back().cells.front().report.nnsv_count);
  if (std::abs(full_count - half_count) > 2.0) {
    result.saturation_ok = false;
    result.warning = "count at R=" + shortest(bounds.back()) + " changes from " +
                     std::to_string(static_cast<long>(half_count)) + " to " +
                     std::to_string(static_cast<long>(full_count)) + " between width " + std::to_string(width / 2) +
                     " and " + std::to_string(width) + "; width may be too small to saturate";
  }
  return result;
}

SweepResult run_depth_sweep(std::size_t max_depth, std::size_t width, double bound, const ThresholdPolicy& policy,
                            std::span<const SeedSpec> seeds, const RunOptions& run, std::size_t fullsvd_cap) {
  require_seeds(seeds);
  if (max_depth < 1) throw ArgumentError("depth sweep needs max_depth >= 1");
  if (width < 2) throw ArgumentError("depth sweep width must be >= 2");
  if (width > fullsvd_cap && run.method != SpectrumMethod::GramEig) {
    throw ArgumentError("width " + std::to_string(width) + " exceeds the full-SVD cap " + std::to_string(fullsvd_cap) +
                        "; select the gram method");
  }
  NPSpaceSpec{1, bound, Distribution::Uniform}.validate();

  SweepResult result;
  result.axis = SweepAxis::Depth;
  result.seeds.assign(seeds.begin(), seeds.end());
  result.config = snapshot_base("sweep-depth", seeds, run);
  result.config["max_depth"] = max_depth;
  result.config["width"] = width;
  result.config["bound"] = bound;
  result.config["policy"] = policy.to_string();
  result.config["fullsvd_cap"] = fullsvd_cap;

  std::vector<double> depths(max_depth);
  std::iota(depths.begin(), depths.end(), 1.0);
  result.rows = run_cells(depths, seeds, run.threads, [&](std::size_t i, const SeedSpec& seed) {
    const InputGrid grid = unit_grid(width, GridMode::UniformRandom, seed);
    NetworkSpec net{1, std::vector<LayerSpec>(i + 1, LayerSpec{width, bound, run.activation}),
                    seed.child(kNetworkStream)};
    const HiddenMatrix h = build_multi_layer(grid, net);
    SweepCell cell;
    cell.report = measure_nnsv(h.values(), policy, run.method);
    return cell;
  });
  return result;
}

double RpBpComparison::median_error_random() const { return stats::median(error_random_columns); }

std::size_t RpBpComparison::median_nrp() const {
  std::vector<double> v(nrp.begin(), nrp.end());
  return static_cast<std::size_t>(std::lround(stats::median(v)));
}

RpBpResult run_rp_vs_bp(const TargetFunction& target, std::span<const std::size_t> widths, std::size_t wide_width,
                        double bound, std::span<const SeedSpec> seeds, const ThresholdPolicy& policy,
                        const RpBpOptions& options, const RunOptions& run) {
  require_seeds(seeds);
  require_increasing(widths, "widths");
  if (wide_width < 4 * widths.back()) {
    throw ArgumentError("wide_width must be at least 4x the largest width (" + std::to_string(4 * widths.back()) + ")");
  }
  const NPSpaceSpec space{1, bound, Distribution::Uniform};
  space.validate();

  RpBpResult result;
  result.wide_width = wide_width;
  result.seeds.assign(seeds.begin(), seeds.end());
  result.config = snapshot_base("compare-rp-bp", seeds, run);
  result.config["target"] = target.name;
  result.config["widths"] = std::vector<std::size_t>(widths.begin(), widths.end());
  result.config["wide_width"] = wide_width;
  result.config["bound"] = bound;
  result.config["policy"] = policy.to_string();
  result.config["grid_n"] = options.grid_n;
  result.config["rcond"] = options.rcond;
  result.config["eval_factor"] = options.eval_factor;

  const InputGrid grid = make_grid(Box::unit(1), options.grid_n, GridMode::Mesh);
  const InputGrid dense = make_grid(Box::unit(1), options.eval_factor * options.grid_n, GridMode::Mesh);
  auto sample = [&](const InputGrid& g) {
    Eigen::VectorXd y(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double x = g.points(i, 0);
      y(i) = target.eval(std::span<const double>(&x, 1));
    }
    return y;
  };
  const Eigen::VectorXd y = sample(grid);
  const Eigen::VectorXd y_dense = sample(dense);
  auto rms = [](const Eigen::VectorXd& e) { return std::sqrt(e.squaredNorm() / static_cast<double>(e.size())); };

  // Principal side: orthonormal basis of the wide matrix's numerically non-zero directions.
  const HiddenMatrix wide =
      build_single_layer(grid, space, wide_width, run.activation, seeds.front().child(kNetworkStream), {run.threads});
  const ThinSvd svd = thin_svd(wide.values());
  SingularSpectrum spec;
  spec.values.assign(svd.s.data(), svd.s.data() + svd.s.size());
  spec.rows = wide.rows();
  spec.cols = wide.cols();
  const std::size_t d = nnsv_count(spec, policy).nnsv_count;
  result.nsdim = d;
  if (d == 0) throw NumericError("compare-rp-bp: wide matrix has no singular value above the cutoff");

  const Eigen::VectorXd proj = svd.u.leftCols(static_cast<Eigen::Index>(d)).transpose() * y;
  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(proj(a)) > std::abs(proj(b)); });
  const Eigen::MatrixXd wide_dense = evaluate_network(dense.points, wide.network(), wide.params(), {run.threads});

  result.rows.resize(widths.size());
  for (std::size_t i = 0; i < widths.size(); ++i) {
    RpBpComparison& row = result.rows[i];
    row.width = widths[i];
    row.nbp = std::min(widths[i], d);
    Eigen::VectorXd fit_train = Eigen::VectorXd::Zero(grid.size());
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(wide.cols());  // output coefficients on the wide neurons
    for (std::size_t k = 0; k < row.nbp; ++k) {
      const Eigen::Index c = order[k];
      fit_train += proj(c) * svd.u.col(c);
      weights += (proj(c) / svd.s(c)) * svd.vt.row(c).transpose();
    }
    row.train_error_principal = rms(fit_train - y);
    row.error_principal = rms(wide_dense * weights - y_dense);
    row.error_random_columns.resize(seeds.size());
    row.train_error_random_columns.resize(seeds.size());
    row.nrp.resize(seeds.size());
  }

  // Random side: fresh neurons per (width, seed).
  const std::size_t n_seeds = seeds.size();
  parallel_for(widths.size() * n_seeds, run.threads, [&](std::size_t job) {
    const std::size_t i = job / n_seeds;
    const std::size_t r = job % n_seeds;
    const HiddenMatrix h =
        build_single_layer(grid, space, widths[i], run.activation, seeds[r].child(2 + static_cast<std::uint64_t>(i)));
    const LeastSquaresFit fit = solve_least_squares(h.values(), y, options.rcond);
    const Eigen::MatrixXd h_dense = evaluate_network(dense.points, h.network(), h.params());
    RpBpComparison& row = result.rows[i];
    row.train_error_random_columns[r] = fit.residual_l2;
    row.error_random_columns[r] = rms(h_dense * fit.beta - y_dense);
    row.nrp[r] = measure_nnsv(h.values(), policy, SpectrumMethod::FullSVD).nnsv_count;
  });
  return result;
}

ExperimentResult replay_experiment(const Json& config, unsigned threads) {
  if (config.at("snapshot_version").get<int>() != kSnapshotVersion) {
    throw ArgumentError("unsupported snapshot version");
  }
  if (config.at("prng").get<std::string>() != kRngAlgorithm) {
    throw ArgumentError("snapshot uses PRNG '" + config.at("prng").get<std::string>() + "'");
  }
  const std::string experiment = config.at("experiment").get<std::string>();
  const RunOptions run = run_from_json(config, threads);
  const auto seeds = seeds_from_json(config.at("seeds"));
  if (experiment == "elm-fit") {
    ElmFitOptions opt;
    opt.sizes = config.at("sizes").get<std::vector<std::size_t>>();
    opt.bound = config.at("bound").get<double>();
    opt.grid_mode = grid_mode_from_name(config.at("grid_mode").get<std::string>());
    opt.rank_policy = ThresholdPolicy::parse(config.at("policy").get<std::string>());
    opt.rcond = config.at("rcond").get<double>();
    opt.target = config.at("target").get<std::string>();
    opt.eval_factor = config.at("eval_factor").get<std::size_t>();
    return run_elm_fit(seeds, opt, run);
  }
  const ThresholdPolicy policy = ThresholdPolicy::parse(config.at("policy").get<std::string>());
  if (experiment == "sweep-width") {
    const auto widths = config.at("widths").get<std::vector<std::size_t>>();
    return run_width_sweep(config.at("bound").get<double>(), widths, policy, seeds, run);
  }
  if (experiment == "sweep-bound") {
    const auto bounds = config.at("bounds").get<std::vector<double>>();
    return run_bound_sweep(bounds, config.at("width").get<std::size_t>(), policy, seeds, run);
  }
  if (experiment == "sweep-depth") {
    return run_depth_sweep(config.at("max_depth").get<std::size_t>(), config.at("width").get<std::size_t>(),
                           config.at("bound").get<double>(), policy, seeds, run,
                           config.at("fullsvd_cap").get<std::size_t>());
  }
  if (experiment == "compare-rp-bp") {
    RpBpOptions opt;
    opt.grid_n = config.at("grid_n").get<std::size_t>();
    opt.rcond = config.at("rcond").get<double>();
    opt.eval_factor = config.at("eval_factor").get<std::size_t>();
    const auto widths = config.at("widths").get<std::vector<std::size_t>>();
    return run_rp_vs_bp(TargetFunction::builtin(config.at("target").get<std::string>()), widths,
                        config.at("wide_width").get<std::size_t>(), config.at("bound").get<double>(), seeds, policy,
                        opt, run);
  }
  throw ArgumentError("unknown experiment '" + experiment + "' in snapshot");
}

Json to_json(const NsdimReport& report) {
  return Json{{"policy", report.policy.to_string()},
              {"cutoff", report.cutoff_used},
              {"nnsv_count", report.nnsv_count},
              {"rows", report.spectrum.rows},
              {"cols", report.spectrum.cols},
              {"method", to_string(report.spectrum.method)},
              {"requested_method", to_string(report.requested)},
              {"gram_fallback", report.gram_fallback},
              {"sigma_max", report.spectrum.max()},
              {"trust_floor", report.spectrum.trust_floor}};
}

Json to_json(const LeastSquaresFit& fit) {
  return Json{{"residual_l2", fit.residual_l2},
              {"residual_linf", fit.residual_linf},
              {"rcond", fit.rcond_used},
              {"rank_used", fit.rank_used},
              {"evaluation", fit.evaluation},
              {"eval_points", fit.eval_points}};
}

Json to_json(const SweepResult& result) {
  Json rows = Json::array();
  for (const auto& row : result.rows) {
    Json cells = Json::array();
    for (const auto& c : row.cells) {
      Json cell{{"seed", to_json(c.seed)}, {"report", to_json(c.report)}};
      if (c.fit) cell["fit"] = to_json(*c.fit);
      cells.push_back(std::move(cell));
    }
    Json r{{"setting", row.setting}, {"median_count", row.median_count()}};
    if (!row.cells.empty() && row.cells.front().fit) {
      r["median_l2"] = row.median_l2();
      r["median_linf"] = row.median_linf();
    }
    r["cells"] = std::move(cells);
    rows.push_back(std::move(r));
  }
  Json out{{"axis", to_string(result.axis)}, {"config", result.config}, {"rows", rows}};
  if (result.trend) {
    out["trend"] = Json{{"slope", result.trend->slope},
                        {"intercept", result.trend->intercept},
                        {"r2", result.trend->r2},
                        {"pearson_r", result.pearson_r}};
    out["monotone"] = result.monotone;
    out["saturation_ok"] = result.saturation_ok;
    if (!result.warning.empty()) out["warning"] = result.warning;
  }
  return out;
}

Json to_json(const RpBpResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    rows.push_back(Json{{"width", r.width},
                        {"nbp", r.nbp},
                        {"nrp", r.nrp},
                        {"error_principal", r.error_principal},
                        {"train_error_principal", r.train_error_principal},
                        {"median_error_random", r.median_error_random()},
                        {"error_random_columns", r.error_random_columns},
                        {"train_error_random_columns", r.train_error_random_columns}});
  }
  return Json{{"config", result.config}, {"wide_width", result.wide_width}, {"nsdim", result.nsdim}, {"rows", rows}};
}

}  // namespace nsdim
