#pragma once

#include <nsdim/cover.hpp>
#include <nsdim/experiments.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsdim::report {

inline constexpr std::string_view kConfigFormat = "nsdim-config/1";
inline constexpr std::string_view kBundleFormat = "nsdim-bundle/1";

// Bad command line or config value. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitUsage = 2;

using Settings = std::map<std::string, std::string>;

/// Fully validated run description. `snapshot` holds every setting that influences the
/// numbers (defaults resolved), which is what replay reads back.
struct RunConfig {
  std::string experiment;
  Activation activation;
  double bound = 1.0;
  std::vector<double> bounds;
  std::size_t width = 0;
  std::vector<std::size_t> widths;
  std::vector<std::size_t> sizes;
  std::size_t depth = 1;
  std::size_t grid_n = 0;
  GridMode grid_mode = GridMode::Mesh;
  ThresholdPolicy policy;
  SpectrumMethod method = SpectrumMethod::Auto;
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  double rcond = 1e-15;
  std::string target;
  std::size_t wide_width = 0;
  double cover_eps = 0.05;
  std::optional<Metric> metric;
  std::string cover_method = "auto";
  std::filesystem::path points;
  std::size_t fullsvd_cap = kAutoSvdLimit;
  bool save_matrix = false;

  // Output-only settings; not part of the snapshot.
  std::filesystem::path out = "nsdim-out";
  unsigned threads = 1;
  bool plots = true;

  Settings snapshot;
};

/// Experiments accepted by parse_config and `nsdim <experiment>`.
const std::vector<std::string>& experiment_names();

/// Recognised keys with their defaults and help text, for --help.
std::string describe_keys();

/// Reads "key = value" lines ('#' comments), or a JSON object when the file starts with '{'.
Settings read_settings_file(const std::filesystem::path& path);

/// Merges file settings with overrides (overrides win), applies per-experiment defaults
/// and validates every value. Unknown keys and out-of-range values throw UsageError
/// naming the field.
RunConfig resolve_config(const Settings& file, const Settings& overrides);

/// Parses command-line arguments (argv[0] excluded) into a config.
RunConfig parse_config(const std::vector<std::string>& args);

std::string snapshot_text(const RunConfig& config);

struct BundleFile {
  std::string path;  // relative to the bundle directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct ReportBundle {
  std::filesystem::path dir;
  std::vector<BundleFile> files;
  bool complete = false;

  const BundleFile* find(std::string_view path) const;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Serialises all writes of one run into a bundle directory and tracks the manifest.
class BundleWriter {
 public:
  explicit BundleWriter(std::filesystem::path dir);
  /// Continues an existing bundle; finish() rewrites its manifest.
  explicit BundleWriter(ReportBundle existing);

  void write(const std::string& relative_path, const std::string& content);
  /// Registers a file already written under the bundle directory.
  void write_existing(const std::string& relative_path);
  /// Writes manifest.json and returns the bundle description.
  ReportBundle finish(bool complete);

  const ReportBundle& bundle() const { return bundle_; }

 private:
  ReportBundle bundle_;
};

ReportBundle load_manifest(const std::filesystem::path& dir);

/// Scientific notation with 17 significant digits.
std::string format_real(double x);

/// Minimal CSV reader: header row plus numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a column; throws std::runtime_error naming `source` when absent.
  std::size_t column(std::string_view name, std::string_view source) const;
};
CsvTable read_csv(const std::filesystem::path& path);

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::optional<double> y_min;  // forced lower end of the y axis
  std::vector<ChartSeries> series;
};

/// Standalone SVG line chart. The root element carries data-y-min / data-y-max with the
/// plotted axis range.
std::string render_svg_chart(const ChartSpec& spec);

/// Adds SVG charts for the CSV data in the bundle: log singular-value charts for
/// spectra/*.csv, NNSV-vs-width (one per R plus combined), NSdim-vs-R, NNSV-vs-depth.
ReportBundle render_plots(const ReportBundle& bundle);

/// Runs the configured experiment into config.out and writes the manifest. A summary
/// table goes to `log`.
ReportBundle run(const RunConfig& config, std::ostream& log);

struct ReplayOutcome {
  ReportBundle bundle;
  std::vector<std::string> mismatched;  // CSV files whose hash differs from the original
  std::size_t compared = 0;
};

/// Re-runs a snapshot into out_dir and compares CSV hashes against the manifest next to
/// the snapshot, when one exists.
ReplayOutcome replay(const std::filesystem::path& snapshot, const std::filesystem::path& out_dir, unsigned threads,
                     std::ostream& log);

/// Entry point of the nsdim tool; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace nsdim::report
