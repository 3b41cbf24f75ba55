// Acceptance suite: one PASS/FAIL line per criterion, indented detail lines below it.
// Exit status is nonzero when a criterion fails that is not listed in kKnownRed.

#include <nsdim/cover.hpp>
#include <nsdim/experiments.hpp>
#include <nsdim/report.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

using namespace nsdim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

// Criteria whose failure is understood and documented (README, "Known deviations").
const std::map<int, std::string> kKnownRed = {
    {1, "rank at a relative 1e-12 cutoff undercounts at N=1000; the reference ranks use an absolute 1e-12 cutoff"},
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> counts_under(const SweepRow& row, const ThresholdPolicy& policy) {
  std::vector<double> out;
  for (const auto& c : row.cells) out.push_back(static_cast<double>(nnsv_count(c.report.spectrum, policy).nnsv_count));
  return out;
}

// ---------------------------------------------------------------- criteria 1 and 2

struct ElmRun {
  SweepResult result;
  double seconds = 0.0;
};

const ElmRun& elm_run() {
  static const ElmRun run = [] {
    ElmFitOptions opt;
    opt.sizes = {50, 100, 200, 1000};
    opt.bound = 1.0;
    opt.grid_mode = GridMode::Mesh;
    opt.rank_policy = ThresholdPolicy::relative(1e-12);
    opt.target = "sincos";
    const auto t0 = std::chrono::steady_clock::now();
    ElmRun r;
    r.result = run_elm_fit(replicate_seeds(42, 20), opt, {Activation{}, SpectrumMethod::Auto, 1});
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome criterion_elm_fit() {
  const ElmRun& run = elm_run();
  const auto& rows = run.result.rows;
  const ThresholdPolicy rel = ThresholdPolicy::relative(1e-12);
  const ThresholdPolicy abs = ThresholdPolicy::absolute(1e-12);
  const double r50 = median_of(counts_under(rows[0], rel));
  const double r1000 = median_of(counts_under(rows[3], rel));
  const double linf100 = rows[1].median_linf();
  const bool ok_rank = std::abs(r50 - 14) <= 2 && std::abs(r1000 - 16) <= 2;
  const bool ok_err = linf100 >= 0.02 && linf100 <= 0.12;
  const bool ok_time = run.seconds < 60.0;
  Outcome o;
  o.pass = ok_rank && ok_err && ok_time;
  o.summary = "ELM fit: median rank (rel 1e-12) N=50 " + fmt(r50) + " [12,16], N=1000 " + fmt(r1000) +
              " [14,18]; median Linf N=100 " + fmt(linf100) + " [0.02,0.12]; " + fmt(run.seconds, 3) + " s < 60 s";
  std::string ranks_rel, ranks_abs;
  for (const auto& row : rows) {
    ranks_rel += " " + fmt(median_of(counts_under(row, rel)));
    ranks_abs += " " + fmt(median_of(counts_under(row, abs)));
  }
  o.details.push_back("median ranks for N = 50 100 200 1000: relative 1e-12 ->" + ranks_rel + "; absolute 1e-12 ->" +
                      ranks_abs);
  std::string errs;
  for (const auto& row : rows) errs += " (" + fmt(row.median_l2()) + ", " + fmt(row.median_linf()) + ")";
  o.details.push_back("median (L2, Linf) on the 10N mesh:" + errs);
  return o;
}

Outcome criterion_rank_saturation() {
  const auto& rows = elm_run().result.rows;
  const ThresholdPolicy rel = ThresholdPolicy::relative(1e-12);
  const double r50 = median_of(counts_under(rows[0], rel));
  const double r1000 = median_of(counts_under(rows[3], rel));
  const ThresholdPolicy abs = ThresholdPolicy::absolute(1e-12);
  const double a50 = median_of(counts_under(rows[0], abs));
  const double a1000 = median_of(counts_under(rows[3], abs));
  Outcome o;
  o.pass = r1000 - r50 <= 4;
  o.summary = "rank saturation: median rank(N=1000) - rank(N=50) = " + fmt(r1000 - r50) + " <= 4 (rel 1e-12)";
  o.details.push_back("same difference at an absolute 1e-12 cutoff: " + fmt(a1000 - a50));
  return o;
}

// ---------------------------------------------------------------- criteria 3 and 4

struct DepthRun {
  SweepResult result;
  double seconds = 0.0;
};

const DepthRun& depth_run() {
  static const DepthRun run = [] {
    const auto t0 = std::chrono::steady_clock::now();
    DepthRun r;
    r.result = run_depth_sweep(3, 2000, 1.0, ThresholdPolicy::absolute(1e-7), replicate_seeds(42, 1),
                               {Activation{}, SpectrumMethod::GramEig, 1});
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome criterion_depth1() {
  const DepthRun& run = depth_run();
  const auto& rep = run.result.rows[0].cells[0].report;
  const double c = static_cast<double>(rep.nnsv_count);
  Outcome o;
  o.pass = c >= 9 && c <= 14 && run.seconds < 300.0;
  o.summary = "depth-1 NSdim: width 2000, R=1, abs 1e-7 -> " + fmt(c) + " in [9,14]; depth sweep " +
              fmt(run.seconds, 3) + " s < 300 s";
  o.details.push_back("requested gram; spectrum computed by " + to_string(rep.spectrum.method) +
                      (rep.gram_fallback ? " (the Gram route cannot resolve 1e-7 at sigma_max " +
                                               fmt(rep.spectrum.max()) + ", so the full SVD ran)"
                                         : ""));
  return o;
}

Outcome criterion_depth_effect() {
  const auto& rows = depth_run().result.rows;
  const double c1 = rows[0].median_count();
  const double c2 = rows[1].median_count();
  const double c3 = rows[2].median_count();
  Outcome o;
  o.pass = c2 / c1 >= 5.0 && c3 > c2;
  o.summary = "depth effect: NNSV 1/2/3 layers = " + fmt(c1) + "/" + fmt(c2) + "/" + fmt(c3) + ", ratio(2/1) " +
              fmt(c2 / c1, 3) + " >= 5, NNSV(3) > NNSV(2)";
  return o;
}

// ---------------------------------------------------------------- criterion 5

double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Outcome criterion_linear_in_r() {
  std::vector<double> bounds(20);
  std::iota(bounds.begin(), bounds.end(), 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult res = run_bound_sweep(bounds, 2000, ThresholdPolicy::absolute(1e-7), replicate_seeds(42, 3));
  const double secs = seconds_since(t0);
  std::vector<double> medians;
  for (const auto& row : res.rows) medians.push_back(row.median_count());
  const double r = pearson_oracle(bounds, medians);
  // Each step R -> R+1 must be nondecreasing for at least 2 of the 3 seeds.
  int bad_steps = 0;
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    int ok = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      ok += res.rows[i].cells[s].report.nnsv_count >= res.rows[i - 1].cells[s].report.nnsv_count;
    }
    bad_steps += ok < 2;
  }
  Outcome o;
  o.pass = r >= 0.97 && bad_steps == 0;
  o.summary = "NSdim vs R: Pearson r " + fmt(r, 5) + " >= 0.97; steps failing the 3-seed majority " +
              std::to_string(bad_steps) + " == 0";
  std::string m;
  for (double v : medians) m += " " + fmt(v);
  o.details.push_back("median counts R=1..20:" + m);
  o.details.push_back("slope " + fmt(res.trend->slope) + " per unit R, library pearson " + fmt(res.pearson_r, 5) +
                      ", saturation check " + (res.saturation_ok ? "ok" : res.warning) + ", " + fmt(secs, 3) + " s");
  return o;
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion_spectrum_decay() {
  const std::vector<std::size_t> widths{500};
  const SweepResult res = run_width_sweep(1.0, widths, ThresholdPolicy::absolute(1e-7), replicate_seeds(42, 1));
  const NsdimReport& rep = res.rows[0].cells[0].report;
  const auto& sv = rep.spectrum.values;
  const double below = static_cast<double>(std::count_if(sv.begin(), sv.end(), [](double s) { return s < 1e-7; }));
  const double frac = below / static_cast<double>(sv.size());
  // Least-squares line through (k, log sigma_k), k = 1..count.
  const std::size_t m = rep.nnsv_count;
  double sk = 0, sy = 0, skk = 0, sky = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    const double y = std::log(sv[k - 1]);
    sk += k;
    sy += y;
    skk += double(k) * k;
    sky += k * y;
  }
  const double slope = (m * sky - sk * sy) / (m * skk - sk * sk);
  const double icpt = (sy - slope * sk) / m;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    const double y = std::log(sv[k - 1]);
    ss_res += std::pow(y - (icpt + slope * k), 2);
    ss_tot += std::pow(y - sy / m, 2);
  }
  const double r2 = 1.0 - ss_res / ss_tot;
  Outcome o;
  o.pass = frac >= 0.95 && r2 >= 0.9;
  o.summary = "spectrum decay N=500: " + fmt(100 * frac, 4) + "% of sigma below 1e-7 (>= 95%); log-linear R^2 " +
              fmt(r2, 5) + " >= 0.9 over k <= " + std::to_string(m);
  o.details.push_back("decay rate " + fmt(-slope) + " in log sigma per index, sigma_1 " + fmt(sv[0]));
  return o;
}

// ---------------------------------------------------------------- criterion 7

// Smallest ambient-centred cover of every subset, by enumerating center sets C: C covers S
// exactly when C <= S' and S <= reach(C), so each C is a candidate for all such S.
std::vector<int> all_subset_measures(const MetricPoints& pts, double eps) {
  const int n = static_cast<int>(pts.count());
  std::vector<std::uint32_t> reach(n, 0);
  for (int c = 0; c < n; ++c)
    for (int p = 0; p < n; ++p)
      if (pts.distance(c, p) <= eps) reach[c] |= 1u << p;
  const std::uint32_t total = 1u << n;
  std::vector<int> best(total, n + 1);
  best[0] = 0;
  for (std::uint32_t c = 1; c < total; ++c) {
    std::uint32_t cov = 0;
    for (int i = 0; i < n; ++i)
      if (c >> i & 1u) cov |= reach[i];
    const int size = std::popcount(c);
    // Every nonempty subset of cov.
    for (std::uint32_t s = cov; s; s = (s - 1) & cov) best[s] = std::min(best[s], size);
  }
  return best;
}

std::vector<Eigen::Index> members_of(std::uint32_t mask) {
  std::vector<Eigen::Index> out;
  for (int i = 0; mask >> i; ++i)
    if (mask >> i & 1u) out.push_back(i);
  return out;
}

Outcome criterion_measure_axioms() {
  std::mt19937_64 gen(20240501);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<std::string, int> failures;
  std::size_t checks = 0;
  int literal_monotone_violations = 0;
  const Metric metrics[] = {Metric::Euclidean, Metric::SupNorm, Metric::ScaledL2};
  for (int trial = 0; trial < 500; ++trial) {
    const int n = trial % 11;  // 0..10 points, so the empty set is included
    const int dim = 1 + trial % 3;
    std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
    for (auto& r : rows)
      for (auto& v : r) v = u(gen);
    MetricPoints pts = MetricPoints::from_rows(rows, metrics[trial % 3]);
    if (n == 0) pts.points.resize(dim, 0);
    const double eps = 0.05 + 0.45 * u(gen);
    auto fail = [&](const std::string& what, bool ok) {
      ++checks;
      if (!ok) ++failures[what];
    };

    const std::vector<int> oracle = all_subset_measures(pts, eps);
    const std::uint32_t total = 1u << n;
    std::vector<int> mu(total);
    for (std::uint32_t s = 0; s < total; ++s) {
      mu[s] = static_cast<int>(exact_subset_cover(pts, members_of(s), eps).size);
      fail("exact value vs brute-force oracle", mu[s] == oracle[s]);
      fail("zero law", (mu[s] == 0) == (s == 0));
      for (int i = 0; i < n; ++i) {
        if (s >> i & 1u) fail("monotonicity", mu[s & ~(1u << i)] <= mu[s]);
      }
    }
    for (std::uint32_t a = 0; a < total; ++a)
      for (std::uint32_t b = a; b < total; ++b) fail("finite subadditivity", mu[a | b] <= mu[a] + mu[b]);

    const CoverResult g = greedy_cover(pts, eps);
    const CoverResult e = exact_cover(pts, eps);
    fail("greedy covers", covers(pts, g));
    fail("exact <= greedy", e.size <= g.size);
    fail("zero law (whole set)", (g.size == 0) == (n == 0) && (e.size == 0) == (n == 0));
    for (std::size_t i = 0; i < g.centers.size(); ++i)
      for (std::size_t j = i + 1; j < g.centers.size(); ++j)
        fail("greedy centers pairwise > eps", pts.distance(g.centers[i], g.centers[j]) > eps);
    if (n > 0) fail("greedy(eps) <= exact(eps/2)", g.size <= exact_cover(pts, eps / 2).size);
    std::size_t prev_e = std::numeric_limits<std::size_t>::max(), prev_g = prev_e;
    for (double f : {0.25, 0.5, 1.0, 1.5, 3.0}) {
      const std::size_t se = exact_cover(pts, eps * f).size;
      const std::size_t sg = greedy_cover(pts, eps * f).size;
      fail("eps-antitonicity (exact)", se <= prev_e);
      fail("eps-antitonicity (greedy)", sg <= prev_g);
      prev_e = se;
      prev_g = sg;
    }
    // Covers of a subset restricted to its own points are not monotone; count for the record.
    std::vector<int> own(total);
    for (std::uint32_t s = 0; s < total; ++s) {
      own[s] = static_cast<int>(
          exact_cover(MetricPoints{pts.points(Eigen::all, members_of(s)), pts.metric}, eps).size);
    }
    for (std::uint32_t s = 0; s < total; ++s)
      for (int i = 0; i < n; ++i)
        if (s >> i & 1u) literal_monotone_violations += own[s & ~(1u << i)] > own[s];
  }
  int total_failures = 0;
  for (const auto& [k, v] : failures) total_failures += v;
  Outcome o;
  o.pass = total_failures == 0;
  o.summary = "measure axioms on 500 point sets (0..10 points): " + std::to_string(checks - total_failures) + "/" +
              std::to_string(checks) + " checks pass";
  for (const auto& [k, v] : failures) o.details.push_back(k + ": " + std::to_string(v) + " failures");
  o.details.push_back("subset measures use the whole sample as the metric space; covering a subset with only its own "
                      "points as centers breaks monotonicity in " +
                      std::to_string(literal_monotone_violations) + " subset pairs");
  return o;
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion_cross_method() {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<int> size(10, 500);
  std::uniform_real_distribution<double> bound(0.5, 4.0);
  int bad_matrices = 0;
  double worst_ratio = 0.0;
  std::size_t compared = 0;
  for (int t = 0; t < 50; ++t) {
    const auto n = static_cast<std::size_t>(size(gen));
    const auto w = static_cast<std::size_t>(size(gen));
    const double r = bound(gen);
    const SeedSpec seed{gen(), static_cast<std::uint64_t>(t)};
    const InputGrid grid = make_grid(Box::unit(1), n, GridMode::UniformRandom, seed.child(1));
    const HiddenMatrix h = build_single_layer(grid, {1, r, Distribution::Uniform}, w, Activation{}, seed.child(0));
    const SingularSpectrum full = singular_spectrum(h.values(), SpectrumMethod::FullSVD);
    const SingularSpectrum gram = singular_spectrum(h.values(), SpectrumMethod::GramEig);
    const double tol = std::max(1e-9, 1e-8 * full.max());
    bool ok = full.values.size() == gram.values.size();
    for (std::size_t k = 0; ok && k < full.values.size() && full.values[k] > 1e-7; ++k) {
      const double diff = std::abs(full.values[k] - gram.values[k]);
      worst_ratio = std::max(worst_ratio, diff / tol);
      ok = diff <= tol;
      ++compared;
    }
    bad_matrices += !ok;
  }
  Outcome o;
  o.pass = bad_matrices == 0;
  o.summary = "FullSVD vs GramEig on 50 Tanh matrices: " + std::to_string(50 - bad_matrices) +
              "/50 agree within max(1e-9, 1e-8 sigma_max) for sigma > 1e-7";
  o.details.push_back(std::to_string(compared) + " singular values compared; worst |diff|/tol " + fmt(worst_ratio, 3));
  return o;
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion_rp_vs_bp() {
  const std::vector<std::size_t> widths{2, 4, 8, 12, 16, 24, 32, 64};
  RpBpOptions opt;
  opt.grid_n = 500;
  const ThresholdPolicy eps = ThresholdPolicy::absolute(1e-7);
  const RpBpResult res =
      run_rp_vs_bp(TargetFunction::builtin("sincos"), widths, 256, 1.0, replicate_seeds(42, 20), eps, opt);
  const std::size_t d = res.nsdim;

  bool nested = true;
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    nested = nested && res.rows[i].train_error_principal <= res.rows[i - 1].train_error_principal;
  }
  const auto& first = res.rows.front();
  const bool small_ok = first.error_principal <= first.median_error_random();
  bool large_ok = true;
  std::size_t large_rows = 0;
  for (const auto& row : res.rows) {
    if (row.width < d) continue;
    ++large_rows;
    large_ok = large_ok && row.median_error_random() <= 2.0 * row.error_principal;
  }
  // Saturation of d: the same count at half the wide width.
  const InputGrid grid = make_grid(Box::unit(1), 500, GridMode::Mesh);
  const HiddenMatrix half = build_single_layer(grid, {1, 1.0, Distribution::Uniform}, 128, Activation{},
                                               replicate_seeds(42, 1).front().child(0));
  const std::size_t d_half = measure_nnsv(half.values(), eps).nnsv_count;

  Outcome o;
  o.pass = nested && small_ok && large_ok && large_rows > 0;
  o.summary = "RP vs BP (d=" + std::to_string(d) + "): principal residual nonincreasing " + (nested ? "yes" : "no") +
              "; Ntilde=2 principal " + fmt(first.error_principal) + " <= random median " +
              fmt(first.median_error_random()) + "; Ntilde>=d random <= 2x principal on " +
              std::to_string(large_rows) + " widths " + (large_ok ? "yes" : "no");
  for (const auto& row : res.rows) {
    o.details.push_back("Ntilde " + std::to_string(row.width) + ": principal " + fmt(row.error_principal) +
                        " (train " + fmt(row.train_error_principal) + "), random median " +
                        fmt(row.median_error_random()) + ", NRP " + std::to_string(row.median_nrp()));
  }
  o.details.push_back("NSdim at wide width 128: " + std::to_string(d_half) + ", at 256: " + std::to_string(d));
  return o;
}

// ---------------------------------------------------------------- criterion 10

Outcome criterion_replay() {
  const fs::path root = fs::path(NSDIM_TEST_TMP) / "acceptance_replay";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::FILE* f = std::fopen((root / "points.csv").c_str(), "w");
    std::fputs("x,y\n0.1,0.2\n0.5,0.5\n0.9,0.1\n0.3,0.8\n", f);
    std::fclose(f);
  }
  const std::vector<std::vector<std::string>> runs{
      {"spectrum", "--width", "300", "--seeds", "2", "--method", "svd"},
      {"spectrum", "--width", "200", "--depth", "2", "--method", "gram", "--policy", "rel:1e-6"},
      {"elm-fit", "--seeds", "3", "--sizes", "50,100"},
      {"sweep-width", "--Rs", "1,3", "--widths", "50,100,200", "--seeds", "2"},
      {"sweep-bound", "--Rs", "1,2,4", "--width", "200", "--seeds", "2"},
      {"sweep-depth", "--width", "200", "--depth", "3", "--seeds", "2"},
      {"cover", "--width", "100", "--grid-n", "100", "--cover-eps", "0.1"},
      {"cover", "--points", (root / "points.csv").string(), "--cover-eps", "0.3"},
      {"compare-rp-bp", "--widths", "2,4,8", "--grid-n", "200", "--seeds", "4"},
  };
  std::size_t compared = 0, mismatched = 0;
  Outcome o;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<std::string> args = runs[i];
    const fs::path orig = root / ("run" + std::to_string(i));
    args.insert(args.end(), {"--out", orig.string(), "--threads", "1"});
    std::ostringstream log;
    report::run(report::parse_config(args), log);
    const report::ReplayOutcome r = report::replay(orig / "snapshot.cfg", root / ("replay" + std::to_string(i)), 3, log);
    compared += r.compared;
    mismatched += r.mismatched.size();
    for (const auto& m : r.mismatched) o.details.push_back(runs[i][0] + ": " + m + " differs");
    if (r.compared == 0) o.details.push_back(runs[i][0] + ": no CSV compared");
  }
  o.pass = mismatched == 0 && compared >= runs.size();
  o.summary = "replay determinism: " + std::to_string(compared - mismatched) + "/" + std::to_string(compared) +
              " CSV files hash-identical across " + std::to_string(runs.size()) +
              " bundles (replayed with 3 threads, recorded with 1)";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion_elm_fit},        {2, criterion_rank_saturation}, {3, criterion_depth1},
      {4, criterion_depth_effect},  {5, criterion_linear_in_r},     {6, criterion_spectrum_decay},
      {7, criterion_measure_axioms}, {8, criterion_cross_method},    {9, criterion_rp_vs_bp},
      {10, criterion_replay},
  };
  int unexpected = 0;
  int passed = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("threw: ") + e.what();
    }
    const bool known = kKnownRed.contains(id);
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << o.summary << "\n";
    for (const auto& d : o.details) std::cout << "       " << d << "\n";
    if (!o.pass && known) std::cout << "       known deviation: " << kKnownRed.at(id) << "\n";
    std::cout.flush();
    passed += o.pass;
    unexpected += !o.pass && !known;
  }
  std::cout << passed << "/" << criteria.size() << " criteria pass";
  if (unexpected > 0) std::cout << ", " << unexpected << " unexpected failure(s)";
  std::cout << "\n";
  return unexpected == 0 ? 0 : 1;
}
