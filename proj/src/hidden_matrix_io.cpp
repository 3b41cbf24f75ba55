#include <stdexcept>
#include <nsdim/errors.hpp>
#include <nsdim/json_io.hpp>
#include <nsdim/netmatrix.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace nsdim {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'N', 'S', 'D', 'I', 'M', 'H', 'M', '1'};
constexpr int kFormatVersion = 1;

void write_row_major(std::ofstream& out, const Eigen::MatrixXd& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

Eigen::MatrixXd read_row_major(std::ifstream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (!in) throw ArgumentError("hidden matrix file truncated");
  return rm;
}

}  // namespace

void save_hidden_matrix(const HiddenMatrix& m, const std::filesystem::path& path) {
  Json header{{"format", "nsdim-hidden-matrix"},
              {"version", kFormatVersion},
              {"rows", m.rows()},
              {"cols", m.cols()},
              {"dtype", "f64le"},
              {"order", "row-major"},
              {"prng", kRngAlgorithm},
              {"params", m.param_source() == ParamSource::Seeded ? "seeded" : "explicit"},
              {"network", to_json(m.network())},
              {"grid", grid_header_json(m.grid())}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_row_major(out, m.grid().points);
  write_row_major(out, m.values());
  if (m.param_source() == ParamSource::Explicit) {
    for (const auto& p : m.params()) {
      write_row_major(out, p.weights);
      write_row_major(out, p.bias);
    }
  }
  if (!out) throw ArgumentError("write to '" + path.string() + "' failed");
}

HiddenMatrix load_hidden_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path.string() + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ArgumentError("'" + path.string() + "' is not a hidden matrix container");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ArgumentError("hidden matrix header truncated");
  const Json header = Json::parse(text);
  if (header.at("version").get<int>() != kFormatVersion) throw ArgumentError("unsupported container version");

  const auto rows = header.at("rows").get<Eigen::Index>();
  const auto cols = header.at("cols").get<Eigen::Index>();
  NetworkSpec network = network_from_json(header.at("network"));
  const Json& gh = header.at("grid");

  InputGrid grid;
  grid.mode = grid_mode_from_name(gh.at("mode").get<std::string>());
  grid.domain = box_from_json(gh.at("domain"));
  grid.seed = seed_from_json(gh.at("seed"));
  grid.points = read_row_major(in, rows, gh.at("dim").get<Eigen::Index>());
  Eigen::MatrixXd values = read_row_major(in, rows, cols);

  const bool seeded = header.at("params").get<std::string>() == "seeded";
  std::vector<LayerParams> params;
  if (seeded) {
    params = sample_network(network);
  } else {
    for (std::size_t l = 0; l < network.layers.size(); ++l) {
      LayerParams p;
      const auto w = static_cast<Eigen::Index>(network.layers[l].width);
      p.weights = read_row_major(in, w, static_cast<Eigen::Index>(network.fan_in(l)));
      p.bias = read_row_major(in, w, 1);
      params.push_back(std::move(p));
    }
  }
  return HiddenMatrix(std::move(values), std::move(grid), std::move(network), std::move(params),
                      seeded ? ParamSource::Seeded : ParamSource::Explicit);
}

}  // namespace nsdim
