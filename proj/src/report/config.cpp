#include <nsdim/errors.hpp>
#include <nsdim/report.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nsdim::report {

namespace {

struct KeyInfo {
  std::string name;
  std::string help;
};

// Every key a config file or flag may set. Flags use dashes in place of underscores.
const std::vector<KeyInfo>& key_table() {
  static const std::vector<KeyInfo> keys{
      {"format", "config format tag (nsdim-config/1)"},
      {"experiment", "spectrum | elm-fit | sweep-width | sweep-bound | sweep-depth | cover | compare-rp-bp"},
      {"activation", "tanh | sigmoid | sin (default tanh)"},
      {"R", "parameter bound R, w and b drawn from [-R, R] (default 1)"},
      {"Rs", "comma-separated R values (sweep-bound default 1..20; sweep-width default R)"},
      {"width", "hidden width (spectrum 500, sweep-bound/sweep-depth 2000, cover 200)"},
      {"widths", "comma-separated widths (sweep-width 100,200,500,1000,2000; compare-rp-bp 2,4,8,16,32,64)"},
      {"sizes", "elm-fit sizes N = width (default 50,100,200,1000)"},
      {"depth", "hidden layers (spectrum 1; sweep-depth sweeps 1..depth, default 3)"},
      {"grid_n", "number of grid points (spectrum: width; cover 200; compare-rp-bp 500)"},
      {"grid_mode", "mesh | random (default mesh)"},
      {"policy", "abs:<eps> | rel:<eps> | machine (default abs:1e-07; elm-fit abs:1e-12)"},
      {"eps", "shorthand for policy abs:<eps>"},
      {"method", "svd | gram | auto (default auto)"},
      {"seed", "master seed, decimal 64-bit (default 42)"},
      {"seeds", "number of replicate streams (spectrum/cover 1, sweeps 3, elm-fit and compare-rp-bp 20)"},
      {"rcond", "pseudo-inverse cutoff relative to sigma_max (default 1e-15)"},
      {"target", "target function for fits (default sincos)"},
      {"wide_width", "width of the wide matrix in compare-rp-bp (default 4 x max width, at least 256)"},
      {"cover_eps", "cover radius (default 0.05)"},
      {"metric", "euclidean | sup | scaled-l2 (default euclidean for points, sup for function families)"},
      {"cover_method", "greedy | exact | auto (default auto: exact up to 16 points)"},
      {"points", "CSV of points to cover, one point per row (default: cover the columns of H)"},
      {"fullsvd_cap", "largest width sweep-depth accepts without the gram method (default 4096)"},
      {"save_matrix", "spectrum: also write the hidden matrix container (default false)"},
      {"out", "output directory (default nsdim-out)"},
      {"threads", "worker threads (default 1)"},
      {"plots", "write SVG charts (default true)"},
  };
  return keys;
}

const std::map<std::string, std::vector<std::string>>& relevant_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"spectrum", {"activation", "R", "width", "depth", "grid_n", "grid_mode", "policy", "method", "seed", "seeds",
                    "save_matrix"}},
      {"elm-fit", {"activation", "R", "sizes", "grid_mode", "policy", "method", "seed", "seeds", "rcond", "target"}},
      {"sweep-width", {"activation", "Rs", "widths", "policy", "method", "seed", "seeds"}},
      {"sweep-bound", {"activation", "Rs", "width", "policy", "method", "seed", "seeds"}},
      {"sweep-depth", {"activation", "R", "width", "depth", "policy", "method", "seed", "seeds", "fullsvd_cap"}},
      {"cover", {"activation", "R", "width", "grid_n", "grid_mode", "seed", "cover_eps", "metric", "cover_method",
                 "points"}},
      {"compare-rp-bp", {"activation", "R", "widths", "wide_width", "grid_n", "rcond", "target", "policy", "method",
                         "seed", "seeds"}},
  };
  return keys;
}

Settings defaults_for(const std::string& experiment) {
  Settings d{{"activation", "tanh"}, {"R", "1"},          {"method", "auto"},   {"seed", "42"},
             {"grid_mode", "mesh"},  {"policy", "abs:1e-07"}, {"rcond", "1e-15"}, {"target", "sincos"},
             {"cover_eps", "0.05"},  {"cover_method", "auto"}, {"points", ""},     {"fullsvd_cap", "4096"},
             {"save_matrix", "false"}};
  if (experiment == "spectrum") {
    d["width"] = "500";
    d["depth"] = "1";
    d["seeds"] = "1";
  } else if (experiment == "elm-fit") {
    d["sizes"] = "50,100,200,1000";
    d["policy"] = "abs:1e-12";
    d["seeds"] = "20";
  } else if (experiment == "sweep-width") {
    d["widths"] = "100,200,500,1000,2000";
    d["seeds"] = "3";
  } else if (experiment == "sweep-bound") {
    std::string rs;
    for (int r = 1; r <= 20; ++r) rs += (r > 1 ? "," : "") + std::to_string(r);
    d["Rs"] = rs;
    d["width"] = "2000";
    d["seeds"] = "3";
  } else if (experiment == "sweep-depth") {
    d["width"] = "2000";
    d["depth"] = "3";
    d["seeds"] = "3";
  } else if (experiment == "cover") {
    d["width"] = "200";
    d["grid_n"] = "200";
    d["seeds"] = "1";
  } else if (experiment == "compare-rp-bp") {
    d["widths"] = "2,4,8,16,32,64";
    d["grid_n"] = "500";
    d["seeds"] = "20";
  }
  return d;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& key, const std::string& why) { throw UsageError(key + ": " + why); }

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) fail(key, "'" + text + "' is not a number");
  if (!std::isfinite(v)) fail(key, "must be finite");
  return v;
}

double parse_positive(const std::string& key, const std::string& text) {
  const double v = parse_real(key, text);
  if (!(v > 0.0)) fail(key, "must be > 0 (got " + trim(text) + ")");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    fail(key, "'" + text + "' is not a nonnegative integer");
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text, std::size_t min) {
  const auto v = static_cast<std::size_t>(parse_u64(key, text));
  if (v < min) fail(key, "must be >= " + std::to_string(min));
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<std::size_t> parse_count_list(const std::string& key, const std::string& text, std::size_t min) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) out.push_back(parse_count(key, item, min));
  if (out.empty()) fail(key, "must list at least one value");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) fail(key, "values must be strictly increasing");
  }
  return out;
}

std::vector<double> parse_positive_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_positive(key, item));
  if (out.empty()) fail(key, "must list at least one value");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) fail(key, "values must be strictly increasing");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  fail(key, "'" + text + "' is not a boolean");
}

template <class F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ArgumentError& e) {
    fail(key, e.what());
  }
}

std::string json_scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& item : v) s += (s.empty() ? "" : ",") + json_scalar_text(item);
    return s;
  }
  return v.dump();
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"spectrum", "elm-fit",   "sweep-width", "sweep-bound",
                                              "sweep-depth", "cover", "compare-rp-bp"};
  return names;
}

std::string describe_keys() {
  std::ostringstream os;
  for (const auto& k : key_table()) {
    std::string flag = k.name;
    std::replace(flag.begin(), flag.end(), '_', '-');
    os << "  --" << flag << std::string(flag.size() < 14 ? 14 - flag.size() : 1, ' ') << k.help << "\n";
  }
  return os.str();
}

Settings read_settings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  Settings out;
  if (trim(text).starts_with("{")) {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const std::exception& e) {
      throw UsageError("config: invalid JSON in '" + path.string() + "': " + e.what());
    }
    if (!j.is_object()) throw UsageError("config: JSON config must be an object");
    for (const auto& [k, v] : j.items()) out[k] = json_scalar_text(v);
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config: line " + std::to_string(lineno) + " of '" + path.string() + "' is not key = value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig resolve_config(const Settings& file, const Settings& overrides) {
  Settings given = file;
  for (const auto& [k, v] : overrides) given[k] = v;

  std::set<std::string> known;
  for (const auto& k : key_table()) known.insert(k.name);
  for (const auto& [k, v] : given) {
    if (!known.contains(k)) throw UsageError(k + ": unknown key");
  }
  if (given.contains("format") && given["format"] != kConfigFormat) {
    fail("format", "expected " + std::string(kConfigFormat) + ", got '" + given["format"] + "'");
  }
  if (!given.contains("experiment") || given["experiment"].empty()) fail("experiment", "required");

  RunConfig cfg;
  cfg.experiment = given["experiment"];
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
    fail("experiment", "unknown experiment '" + cfg.experiment + "'");
  }

  // Aliases.
  if (given.contains("eps") && !given.contains("policy")) given["policy"] = "abs:" + trim(given["eps"]);
  if (given.contains("eps")) parse_positive("eps", given["eps"]);
  if ((cfg.experiment == "sweep-width" || cfg.experiment == "sweep-bound") && given.contains("R") &&
      !given.contains("Rs")) {
    given["Rs"] = given["R"];
  }

  Settings values = defaults_for(cfg.experiment);
  if (cfg.experiment == "sweep-width" && !given.contains("Rs")) values["Rs"] = given.contains("R") ? given["R"] : "1";
  for (const auto& [k, v] : given) values[k] = v;
  if (cfg.experiment == "spectrum" && !given.contains("grid_n")) values["grid_n"] = values["width"];

  cfg.activation = wrap("activation", [&] { return Activation::from_name(trim(values["activation"])); });
  cfg.bound = parse_positive("R", values["R"]);
  cfg.method = wrap("method", [&] { return spectrum_method_from_name(trim(values["method"])); });
  cfg.seed = parse_u64("seed", values["seed"]);
  cfg.seeds = parse_count("seeds", values["seeds"], 1);
  cfg.grid_mode = wrap("grid_mode", [&] { return grid_mode_from_name(trim(values["grid_mode"])); });
  cfg.policy = wrap("policy", [&] { return ThresholdPolicy::parse(trim(values["policy"])); });
  cfg.rcond = parse_positive("rcond", values["rcond"]);
  cfg.target = trim(values["target"]);
  wrap("target", [&] { return TargetFunction::builtin(cfg.target); });
  cfg.cover_eps = parse_positive("cover_eps", values["cover_eps"]);
  if (values.contains("metric") && !trim(values["metric"]).empty()) {
    cfg.metric = wrap("metric", [&] { return metric_from_name(trim(values["metric"])); });
  }
  cfg.cover_method = trim(values["cover_method"]);
  if (cfg.cover_method != "auto" && cfg.cover_method != "greedy" && cfg.cover_method != "exact") {
    fail("cover_method", "expected greedy, exact or auto");
  }
  cfg.points = trim(values["points"]);
  cfg.fullsvd_cap = parse_count("fullsvd_cap", values["fullsvd_cap"], 1);
  cfg.save_matrix = parse_bool("save_matrix", values["save_matrix"]);
  if (values.contains("width")) cfg.width = parse_count("width", values["width"], 1);
  if (values.contains("depth")) cfg.depth = parse_count("depth", values["depth"], 1);
  if (values.contains("grid_n")) cfg.grid_n = parse_count("grid_n", values["grid_n"], 1);
  if (values.contains("widths")) cfg.widths = parse_count_list("widths", values["widths"], 1);
  if (values.contains("sizes")) cfg.sizes = parse_count_list("sizes", values["sizes"], 2);
  if (values.contains("Rs")) cfg.bounds = parse_positive_list("Rs", values["Rs"]);

  if (cfg.experiment == "compare-rp-bp") {
    const std::size_t min_wide = 4 * cfg.widths.back();
    if (!values.contains("wide_width")) values["wide_width"] = std::to_string(std::max<std::size_t>(min_wide, 256));
    cfg.wide_width = parse_count("wide_width", values["wide_width"], 1);
    if (cfg.wide_width < min_wide) fail("wide_width", "must be >= 4 x max(widths) = " + std::to_string(min_wide));
  }
  if ((cfg.grid_mode == GridMode::Mesh) && values.contains("grid_n") && cfg.grid_n < 2) {
    fail("grid_n", "mesh needs at least 2 points");
  }
  if (cfg.experiment == "sweep-depth" && cfg.width > cfg.fullsvd_cap && cfg.method != SpectrumMethod::GramEig) {
    fail("width", "exceeds fullsvd_cap " + std::to_string(cfg.fullsvd_cap) + "; use --method gram");
  }

  cfg.out = values.contains("out") ? trim(values["out"]) : "nsdim-out";
  cfg.threads = values.contains("threads") ? static_cast<unsigned>(parse_count("threads", values["threads"], 1)) : 1u;
  cfg.plots = values.contains("plots") ? parse_bool("plots", values["plots"]) : true;

  cfg.snapshot["experiment"] = cfg.experiment;
  for (const auto& key : relevant_keys().at(cfg.experiment)) cfg.snapshot[key] = trim(values[key]);
  if (cfg.experiment == "compare-rp-bp") cfg.snapshot["wide_width"] = std::to_string(cfg.wide_width);
  if (cfg.experiment == "cover" && cfg.metric) cfg.snapshot["metric"] = to_string(*cfg.metric);
  return cfg;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"nsdim"};
  std::vector<std::string> positional;
  std::string config_path;
  app.add_option("command", positional, "experiment name");
  app.add_option("--config", config_path, "key = value or JSON config file");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_opts;
  for (const auto& k : key_table()) {
    std::string flag = k.name;
    std::replace(flag.begin(), flag.end(), '_', '-');
    flag_opts[k.name] = app.add_option("--" + flag, flag_values[k.name], k.help);
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string("command line: ") + e.what());
  }

  Settings overrides;
  for (const auto& [key, opt] : flag_opts) {
    if (opt->count() > 0) overrides[key] = flag_values[key];
  }
  if (!positional.empty()) {
    if (positional.size() > 1) throw UsageError("command line: unexpected argument '" + positional[1] + "'");
    if (overrides.contains("experiment") && overrides["experiment"] != positional[0]) {
      throw UsageError("experiment: given twice ('" + positional[0] + "' and '" + overrides["experiment"] + "')");
    }
    overrides["experiment"] = positional[0];
  }
  const Settings file = config_path.empty() ? Settings{} : read_settings_file(config_path);
  return resolve_config(file, overrides);
}

std::string snapshot_text(const RunConfig& config) {
  std::ostringstream os;
  os << "# nsdim run snapshot: replay with `nsdim replay <this file>`\n";
  os << "format = " << kConfigFormat << "\n";
  os << "experiment = " << config.experiment << "\n";
  for (const auto& [k, v] : config.snapshot) {
    if (k != "experiment") os << k << " = " << v << "\n";
  }
  return os.str();
}

}  // namespace nsdim::report
