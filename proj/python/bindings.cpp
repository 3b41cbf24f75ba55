#include <nsdim/cover.hpp>
#include <nsdim/errors.hpp>
#include <nsdim/experiments.hpp>
#include <nsdim/report.hpp>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace nsdim;

namespace {

MetricPoints points_from_rows(const Eigen::MatrixXd& rows, const std::string& metric) {
  return MetricPoints{rows.transpose(), metric_from_name(metric)};
}

py::dict cover_dict(const CoverResult& c) {
  py::dict d;
  d["size"] = c.size;
  d["centers"] = c.centers;
  d["radius"] = c.radius;
  d["method"] = c.method == CoverMethod::Exact ? "exact" : "greedy";
  d["metric"] = to_string(c.metric);
  return d;
}

InputGrid grid_from(std::size_t n, const std::string& mode, std::uint64_t seed, int dim) {
  return make_grid(Box::unit(dim), n, grid_mode_from_name(mode), SeedSpec{seed, 1});
}

}  // namespace

PYBIND11_MODULE(_nsdim, m) {
  m.doc() = "Hidden-layer spectra, NNSV counts and epsilon covers";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);
  py::register_exception<report::UsageError>(m, "UsageError", PyExc_ValueError);

  m.def("activation_names", &activation_names);
  m.def(
      "activation_eval",
      [](const std::string& name, const std::vector<double>& xs) { return eval_batch(Activation::from_name(name), xs); },
      py::arg("name"), py::arg("xs"));

  m.def(
      "sample_neurons",
      [](std::size_t count, double bound, int input_dim, std::uint64_t seed, std::uint64_t stream) {
        const auto neurons = sample_neurons({input_dim, bound, Distribution::Uniform}, count, {seed, stream});
        Eigen::MatrixXd w(static_cast<Eigen::Index>(count), input_dim);
        Eigen::VectorXd b(static_cast<Eigen::Index>(count));
        for (std::size_t j = 0; j < count; ++j) {
          for (int k = 0; k < input_dim; ++k) w(j, k) = neurons[j].w[k];
          b(j) = neurons[j].b;
        }
        return py::make_tuple(w, b);
      },
      py::arg("count"), py::arg("bound") = 1.0, py::arg("input_dim") = 1, py::arg("seed") = 0, py::arg("stream") = 0,
      "Draws (w, b) uniformly from [-bound, bound]; returns (W of shape count x input_dim, b).");

  m.def(
      "make_grid",
      [](std::size_t n, const std::string& mode, std::uint64_t seed, int dim) { return grid_from(n, mode, seed, dim).points; },
      py::arg("n"), py::arg("mode") = "mesh", py::arg("seed") = 0, py::arg("dim") = 1,
      "Grid on the unit box; rows are points.");

  m.def(
      "hidden_matrix",
      [](std::size_t width, std::size_t n, double bound, const std::string& activation, std::uint64_t seed,
         std::size_t depth, const std::string& grid_mode, unsigned threads) {
        const InputGrid grid = make_grid(Box::unit(1), n, grid_mode_from_name(grid_mode), SeedSpec{seed, 0}.child(1));
        NetworkSpec net{1, std::vector<LayerSpec>(depth, LayerSpec{width, bound, Activation::from_name(activation)}),
                        SeedSpec{seed, 0}.child(0)};
        py::gil_scoped_release release;
        return build_multi_layer(grid, net, {threads}).values();
      },
      py::arg("width"), py::arg("n"), py::arg("bound") = 1.0, py::arg("activation") = "tanh", py::arg("seed") = 42,
      py::arg("depth") = 1, py::arg("grid_mode") = "mesh", py::arg("threads") = 1,
      "H on n points of [0, 1]; same seeding as the CLI spectrum experiment (replicate 0).");

  m.def(
      "singular_values",
      [](const Eigen::MatrixXd& h, const std::string& method) {
        return singular_spectrum(h, spectrum_method_from_name(method)).values;
      },
      py::arg("h"), py::arg("method") = "auto");

  m.def(
      "nnsv_count",
      [](const Eigen::MatrixXd& h, const std::string& policy, const std::string& method) {
        const NsdimReport r = measure_nnsv(h, ThresholdPolicy::parse(policy), spectrum_method_from_name(method));
        return py::module_::import("json").attr("loads")(to_json(r).dump());
      },
      py::arg("h"), py::arg("policy") = "abs:1e-7", py::arg("method") = "auto",
      "Count of singular values above the policy cutoff, with the spectrum metadata.");

  m.def(
      "least_squares",
      [](const Eigen::MatrixXd& h, const Eigen::VectorXd& y, double rcond) {
        const LeastSquaresFit f = solve_least_squares(h, y, rcond);
        py::dict d;
        d["beta"] = f.beta;
        d["residual_l2"] = f.residual_l2;
        d["residual_linf"] = f.residual_linf;
        d["rank_used"] = f.rank_used;
        return d;
      },
      py::arg("h"), py::arg("y"), py::arg("rcond") = 1e-15);

  m.def(
      "principal_basis", [](const Eigen::MatrixXd& h, Eigen::Index k) { return principal_basis(h, k); }, py::arg("h"),
      py::arg("k"));

  m.def(
      "sparsity",
      [](const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2, const std::string& metric) {
        return sparsity(points_from_rows(s1, metric), points_from_rows(s2, metric));
      },
      py::arg("s1"), py::arg("s2"), py::arg("metric") = "euclidean", "Rows are points.");

  m.def(
      "greedy_cover",
      [](const Eigen::MatrixXd& pts, double eps, const std::string& metric) {
        return cover_dict(greedy_cover(points_from_rows(pts, metric), eps));
      },
      py::arg("points"), py::arg("eps"), py::arg("metric") = "euclidean");
  m.def(
      "exact_cover",
      [](const Eigen::MatrixXd& pts, double eps, const std::string& metric) {
        return cover_dict(exact_cover(points_from_rows(pts, metric), eps));
      },
      py::arg("points"), py::arg("eps"), py::arg("metric") = "euclidean");

  m.def(
      "cli_main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "nsdim");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return report::cli_main(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the nsdim command line in-process; returns the exit code.");

  m.def("_run_experiment_json", [](const report::Settings& settings) {
    const report::RunConfig cfg = report::resolve_config({}, settings);
    std::ostringstream log;
    report::run(cfg, log);
    std::ifstream in(cfg.out / "result.json");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  });
}
