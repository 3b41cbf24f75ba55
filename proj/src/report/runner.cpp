#include <nsdim/cover.hpp>
#include <nsdim/errors.hpp>
#include <nsdim/report.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace nsdim::report {

namespace fs = std::filesystem;

namespace {

// Same stream layout as the experiments module: network from child 0, grid from child 1.
constexpr std::uint64_t kNetworkStream = 0;
constexpr std::uint64_t kGridStream = 1;

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      text_ += (first ? "" : ",");
      text_ += h;
      first = false;
    }
    text_ += "\n";
  }

  Csv& cell(double x) { return put(format_real(x)); }
  Csv& cell(std::size_t x) { return put(std::to_string(x)); }
  Csv& end() {
    text_ += "\n";
    fresh_ = true;
    return *this;
  }
  const std::string& text() const { return text_; }

 private:
  Csv& put(const std::string& s) {
    if (!fresh_) text_ += ",";
    text_ += s;
    fresh_ = false;
    return *this;
  }

  std::string text_;
  bool fresh_ = true;
};

std::string fixed(double x, int digits) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

RunOptions run_options(const RunConfig& c) { return RunOptions{c.activation, c.method, c.threads}; }

Json result_header(const RunConfig& c) {
  return Json{{"format", "nsdim-result/1"},
              {"experiment", c.experiment},
              {"prng", kRngAlgorithm},
              {"activation", c.activation.name()},
              {"method", to_string(c.method)},
              {"seed", c.seed},
              {"seeds", c.seeds}};
}

void print_rule(std::ostream& log, std::size_t n) { log << std::string(n, '-') << "\n"; }

Json run_spectrum(const RunConfig& c, BundleWriter& w, std::ostream& log) {
  const auto seeds = replicate_seeds(c.seed, c.seeds);
  Csv counts({"replicate", "rows", "cols", "nnsv_count", "cutoff", "sigma_max"});
  Json cells = Json::array();
  log << "replicate  rows  cols  nnsv_count  sigma_max\n";
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    const InputGrid grid = make_grid(Box::unit(1), c.grid_n, c.grid_mode, seeds[r].child(kGridStream));
    NetworkSpec net{1, std::vector<LayerSpec>(c.depth, LayerSpec{c.width, c.bound, c.activation}),
                    seeds[r].child(kNetworkStream)};
    const HiddenMatrix h = build_multi_layer(grid, net, {c.threads});
    const NsdimReport rep = measure_nnsv(h.values(), c.policy, c.method);
    Csv spec({"k", "sigma_k"});
    for (std::size_t k = 0; k < rep.spectrum.values.size(); ++k) spec.cell(k + 1).cell(rep.spectrum.values[k]).end();
    w.write("spectra/seed" + std::to_string(r) + ".csv", spec.text());
    counts.cell(r).cell(static_cast<std::size_t>(h.rows())).cell(static_cast<std::size_t>(h.cols()));
    counts.cell(rep.nnsv_count).cell(rep.cutoff_used).cell(rep.spectrum.max()).end();
    if (c.save_matrix) {
      const std::string rel = "matrices/seed" + std::to_string(r) + ".nshm";
      fs::create_directories(w.bundle().dir / "matrices");
      save_hidden_matrix(h, w.bundle().dir / rel);
      w.write_existing(rel);
    }
    cells.push_back(Json{{"seed", to_json(seeds[r])}, {"report", to_json(rep)}});
    log << std::setw(9) << r << std::setw(6) << h.rows() << std::setw(6) << h.cols() << std::setw(12) << rep.nnsv_count
        << "  " << fixed(rep.spectrum.max(), 6) << "\n";
  }
  w.write("counts.csv", counts.text());
  return Json{{"width", c.width}, {"depth", c.depth}, {"grid_n", c.grid_n}, {"bound", c.bound},
              {"policy", c.policy.to_string()}, {"cells", cells}};
}

Json run_elm(const RunConfig& c, BundleWriter& w, std::ostream& log) {
  const auto seeds = replicate_seeds(c.seed, c.seeds);
  ElmFitOptions opt;
  opt.sizes = c.sizes;
  opt.bound = c.bound;
  opt.grid_mode = c.grid_mode;
  opt.rank_policy = c.policy;
  opt.rcond = c.rcond;
  opt.target = c.target;
  const SweepResult res = run_elm_fit(seeds, opt, run_options(c));

  Csv all({"N", "replicate", "rank", "residual_l2", "residual_linf"});
  Csv summary({"N", "median_rank", "median_l2", "median_linf"});
  log << "      N  median rank   median L2  median Linf\n";
  for (const auto& row : res.rows) {
    const auto n = static_cast<std::size_t>(row.setting);
    for (std::size_t r = 0; r < row.cells.size(); ++r) {
      const auto& cell = row.cells[r];
      all.cell(n).cell(r).cell(cell.report.nnsv_count).cell(cell.fit->residual_l2).cell(cell.fit->residual_linf).end();
    }
    summary.cell(n).cell(row.median_count()).cell(row.median_l2()).cell(row.median_linf()).end();
    log << std::setw(7) << n << std::setw(13) << row.median_count() << std::setw(12) << fixed(row.median_l2(), 4)
        << std::setw(13) << fixed(row.median_linf(), 4) << "\n";
  }
  w.write("elm_fit.csv", all.text());
  w.write("summary.csv", summary.text());
  return to_json(res);
}

Json run_width(const RunConfig& c, BundleWriter& w, std::ostream& log) {
  const auto seeds = replicate_seeds(c.seed, c.seeds);
  Csv csv({"R", "width", "replicate", "nnsv_count", "cutoff", "sigma_max"});
  Json per_r = Json::array();
  log << "       R   width  median NNSV\n";
  for (double r : c.bounds) {
    const SweepResult res = run_width_sweep(r, c.widths, c.policy, seeds, run_options(c));
    for (const auto& row : res.rows) {
      for (std::size_t s = 0; s < row.cells.size(); ++s) {
        const auto& rep = row.cells[s].report;
        csv.cell(r).cell(static_cast<std::size_t>(row.setting)).cell(s).cell(rep.nnsv_count);
        csv.cell(rep.cutoff_used).cell(rep.spectrum.max()).end();
      }
      log << std::setw(8) << fixed(r, 6) << std::setw(8) << row.setting << std::setw(13) << row.median_count() << "\n";
    }
    per_r.push_back(Json{{"R", r}, {"sweep", to_json(res)}});
  }
  w.write("nnsv_vs_width.csv", csv.text());
  return Json{{"sweeps", per_r}};
}

Json run_bound(const RunConfig& c, BundleWriter& w, std::ostream& log) {
  const auto seeds = replicate_seeds(c.seed, c.seeds);
  const SweepResult res = run_bound_sweep(c.bounds, c.width, c.policy, seeds, run_options(c));
  Csv csv({"R", "replicate", "nnsv_count"});
  log << "       R  median NNSV\n";
  for (const auto& row : res.rows) {
    for (std::size_t s = 0; s < row.cells.size(); ++s) csv.cell(row.setting).cell(s).cell(row.cells[s].report.nnsv_count).end();
    log << std::setw(8) << fixed(row.setting, 6) << std::setw(13) << row.median_count() << "\n";
  }
  w.write("nsdim_vs_R.csv", csv.text());
  if (res.trend) {
    log << "slope " << fixed(res.trend->slope, 6) << "  intercept " << fixed(res.trend->intercept, 6) << "  r2 "
        << fixed(res.trend->r2, 6) << "  pearson " << fixed(res.pearson_r, 6) << "  monotone "
        << (res.monotone ? "yes" : "no") << "\n";
  }
  if (!res.warning.empty()) log << "warning: " << res.warning << "\n";
  return to_json(res);
}

Json run_depth(const RunConfig& c, BundleWriter& w, std::ostream& log) {
  const auto seeds = replicate_seeds(c.seed, c.seeds);
  const SweepResult res = run_depth_sweep(c.depth, c.width, c.bound, c.policy, seeds, run_options(c), c.fullsvd_cap);
  Csv csv({"depth", "replicate", "nnsv_count"});
  log << "  depth  median NNSV\n";
  for (const auto& row : res.rows) {
    for (std::size_t s = 0; s < row.cells.size(); ++s) {
      csv.cell(static_cast<std::size_t>(row.setting)).cell(s).cell(row.cells[s].report.nnsv_count).end();
    }
    log << std::setw(7) << row.setting << std::setw(13) << row.median_count() << "\n";
  }
  w.write("nnsv_vs_depth.csv", csv.text());
  return to_json(res);
}

Json run_cover(const RunConfig& c, BundleWriter& w, std::ostream& log) {
  MetricPoints pts;
  std::string source;
  if (!c.points.empty()) {
    const CsvTable t = read_csv(c.points);
    pts = MetricPoints::from_rows(t.rows, c.metric.value_or(Metric::Euclidean));
    source = "points:" + c.points.filename().string();
  } else {
    const SeedSpec seed = replicate_seeds(c.seed, 1).front();
    const InputGrid grid = make_grid(Box::unit(1), c.grid_n, c.grid_mode, seed.child(kGridStream));
    const HiddenMatrix h = build_single_layer(grid, NPSpaceSpec{1, c.bound, Distribution::Uniform}, c.width,
                                              c.activation, seed.child(kNetworkStream), {c.threads});
    pts.points = h.values();
    pts.metric = c.metric.value_or(Metric::SupNorm);
    if (pts.metric == Metric::Euclidean) throw UsageError("metric: function families use sup or scaled-l2");
    source = "hidden-matrix";
  }
  const bool exact = c.cover_method == "exact" || (c.cover_method == "auto" && pts.count() <= kExactCoverLimit);
  const CoverResult cover = exact ? exact_cover(pts, c.cover_eps) : greedy_cover(pts, c.cover_eps);
  if (!covers(pts, cover)) throw NumericError("cover: result does not cover the point set");

  Csv csv({"center"});
  for (auto idx : cover.centers) csv.cell(static_cast<std::size_t>(idx)).end();
  w.write("cover_centers.csv", csv.text());
  Json j{{"source", source},
         {"points", pts.count()},
         {"dim", pts.dim()},
         {"metric", to_string(pts.metric)},
         {"method", exact ? "exact" : "greedy"},
         {"radius", cover.radius},
         {"size", cover.size},
         {"centers", cover.centers}};
  w.write("cover.json", j.dump(2) + "\n");
  log << "points " << pts.count() << "  metric " << to_string(pts.metric) << "  method " << (exact ? "exact" : "greedy")
      << "  eps " << c.cover_eps << "  cover size " << cover.size << "\n";
  return j;
}

Json run_rpbp(const RunConfig& c, BundleWriter& w, std::ostream& log) {
  const auto seeds = replicate_seeds(c.seed, c.seeds);
  RpBpOptions opt;
  opt.grid_n = c.grid_n;
  opt.rcond = c.rcond;
  const RpBpResult res = run_rp_vs_bp(TargetFunction::builtin(c.target), c.widths, c.wide_width, c.bound, seeds,
                                      c.policy, opt, run_options(c));
  Csv summary({"width", "nbp", "median_nrp", "error_principal", "train_error_principal", "median_error_random"});
  Csv detail({"width", "replicate", "nrp", "error_random", "train_error_random"});
  log << "NSdim of the wide matrix (width " << res.wide_width << "): " << res.nsdim << "\n";
  log << "  width  NBP  NRP  principal RMS  random RMS (median)\n";
  for (const auto& row : res.rows) {
    summary.cell(row.width).cell(row.nbp).cell(row.median_nrp()).cell(row.error_principal);
    summary.cell(row.train_error_principal).cell(row.median_error_random()).end();
    for (std::size_t s = 0; s < row.error_random_columns.size(); ++s) {
      detail.cell(row.width).cell(s).cell(row.nrp[s]).cell(row.error_random_columns[s]);
      detail.cell(row.train_error_random_columns[s]).end();
    }
    log << std::setw(7) << row.width << std::setw(5) << row.nbp << std::setw(5) << row.median_nrp() << std::setw(15)
        << fixed(row.error_principal, 4) << std::setw(21) << fixed(row.median_error_random(), 4) << "\n";
  }
  w.write("rpbp.csv", summary.text());
  w.write("rpbp_random.csv", detail.text());
  return to_json(res);
}

Json dispatch(const RunConfig& c, BundleWriter& w, std::ostream& log) {
  if (c.experiment == "spectrum") return run_spectrum(c, w, log);
  if (c.experiment == "elm-fit") return run_elm(c, w, log);
  if (c.experiment == "sweep-width") return run_width(c, w, log);
  if (c.experiment == "sweep-bound") return run_bound(c, w, log);
  if (c.experiment == "sweep-depth") return run_depth(c, w, log);
  if (c.experiment == "cover") return run_cover(c, w, log);
  if (c.experiment == "compare-rp-bp") return run_rpbp(c, w, log);
  throw UsageError("experiment: unknown experiment '" + c.experiment + "'");
}

}  // namespace

ReportBundle run(const RunConfig& config, std::ostream& log) {
  BundleWriter writer(config.out);
  writer.write("snapshot.cfg", snapshot_text(config));
  const auto start = std::chrono::steady_clock::now();
  log << "nsdim " << config.experiment << " -> " << config.out.string() << "\n";
  print_rule(log, 60);
  try {
    Json result = result_header(config);
    result["result"] = dispatch(config, writer, log);
    result["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    writer.write("result.json", result.dump(2) + "\n");
    ReportBundle bundle = writer.finish(true);
    if (config.plots) bundle = render_plots(bundle);
    print_rule(log, 60);
    log << bundle.files.size() << " files written, manifest " << (config.out / "manifest.json").string() << "\n";
    return bundle;
  } catch (...) {
    writer.finish(false);
    throw;
  }
}

ReplayOutcome replay(const fs::path& snapshot, const fs::path& out_dir, unsigned threads, std::ostream& log) {
  const fs::path snap = fs::is_directory(snapshot) ? snapshot / "snapshot.cfg" : snapshot;
  if (!fs::exists(snap)) throw UsageError("replay: no snapshot at '" + snap.string() + "'");
  if (fs::exists(out_dir) && fs::equivalent(out_dir, snap.parent_path().empty() ? "." : snap.parent_path())) {
    throw UsageError("out: replay must write to a different directory than the original bundle");
  }
  Settings overrides{{"out", out_dir.string()}, {"threads", std::to_string(threads)}};
  const RunConfig config = resolve_config(read_settings_file(snap), overrides);

  ReplayOutcome outcome;
  outcome.bundle = run(config, log);
  const fs::path original = snap.parent_path().empty() ? fs::path(".") : snap.parent_path();
  if (!fs::exists(original / "manifest.json")) {
    log << "replay: no manifest next to the snapshot; nothing to compare\n";
    return outcome;
  }
  const ReportBundle before = load_manifest(original);
  for (const auto& f : before.files) {
    if (fs::path(f.path).extension() != ".csv") continue;
    ++outcome.compared;
    const BundleFile* now = outcome.bundle.find(f.path);
    if (now == nullptr || now->sha256 != f.sha256) outcome.mismatched.push_back(f.path);
  }
  log << "replay: " << outcome.compared - outcome.mismatched.size() << "/" << outcome.compared
      << " CSV files hash-identical\n";
  for (const auto& m : outcome.mismatched) log << "  differs: " << m << "\n";
  return outcome;
}

namespace {

std::string usage_text() {
  std::ostringstream os;
  os << "usage: nsdim <experiment> [--key value ...] [--config FILE]\n"
     << "       nsdim replay <snapshot.cfg | bundle dir> [--out DIR] [--threads N]\n\n"
     << "experiments:";
  for (const auto& e : experiment_names()) os << " " << e;
  os << "\n\nkeys (flags override values from --config; a flag's key is its name with '-' read as '_'):\n"
     << "  --config        key = value file (format = " << kConfigFormat << ") or JSON object\n"
     << describe_keys() << "\nexit codes: 0 ok, 1 numeric failure, 2 usage error\n";
  return os.str();
}

int replay_main(const std::vector<std::string>& args) {
  CLI::App app{"nsdim replay"};
  std::string snapshot;
  std::string out;
  unsigned threads = 1;
  app.add_option("snapshot", snapshot)->required();
  app.add_option("--out", out);
  app.add_option("--threads", threads)->check(CLI::PositiveNumber);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string("replay: ") + e.what());
  }
  fs::path snap(snapshot);
  const fs::path base = fs::is_directory(snap) ? snap : snap.parent_path();
  const fs::path out_dir = out.empty() ? (base.empty() ? fs::path(".") : base) / "replay" : fs::path(out);
  const ReplayOutcome outcome = replay(snap, out_dir, threads, std::cout);
  return outcome.mismatched.empty() ? kExitOk : kExitNumeric;
}

}  // namespace

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (const auto& a : args) {
      if (a == "-h" || a == "--help") {
        std::cout << usage_text();
        return kExitOk;
      }
    }
    if (args.empty()) {
      std::cerr << usage_text();
      return kExitUsage;
    }
    if (args.front() == "replay") return replay_main({args.begin() + 1, args.end()});
    const RunConfig config = parse_config(args);
    run(config, std::cout);
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "nsdim: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "nsdim: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "nsdim: error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace nsdim::report
