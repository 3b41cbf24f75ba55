#include <nsdim/errors.hpp>
#include <nsdim/netmatrix.hpp>
#include <nsdim/parallel.hpp>

#include <cmath>
#include <string>

namespace nsdim {

void NetworkSpec::validate() const {
  if (input_dim < 1) throw ArgumentError("network: input_dim must be >= 1");
  if (layers.empty()) throw ArgumentError("network: at least one layer is required");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].width < 1) throw ArgumentError("network: layer " + std::to_string(l + 1) + " width must be >= 1");
    if (!(layers[l].bound > 0.0) || !std::isfinite(layers[l].bound)) {
      throw ArgumentError("network: layer " + std::to_string(l + 1) + " R must be a positive finite number");
    }
  }
}

std::size_t NetworkSpec::fan_in(std::size_t layer) const {
  return layer == 0 ? static_cast<std::size_t>(input_dim) : layers[layer - 1].width;
}

HiddenMatrix::HiddenMatrix(Eigen::MatrixXd values, InputGrid grid, NetworkSpec network, std::vector<LayerParams> params,
                           ParamSource source)
    : values_(std::move(values)),
      grid_(std::move(grid)),
      network_(std::move(network)),
      params_(std::move(params)),
      source_(source) {}

std::vector<NeuronParams> HiddenMatrix::column_params() const {
  const LayerParams& last = params_.back();
  std::vector<NeuronParams> out(static_cast<std::size_t>(last.weights.rows()));
  for (Eigen::Index j = 0; j < last.weights.rows(); ++j) {
    auto& p = out[static_cast<std::size_t>(j)];
    p.w.resize(static_cast<std::size_t>(last.weights.cols()));
    for (Eigen::Index k = 0; k < last.weights.cols(); ++k) p.w[static_cast<std::size_t>(k)] = last.weights(j, k);
    p.b = last.bias(j);
  }
  return out;
}

std::vector<LayerParams> sample_network(const NetworkSpec& network) {
  network.validate();
  std::vector<LayerParams> params;
  params.reserve(network.layers.size());
  for (std::size_t l = 0; l < network.layers.size(); ++l) {
    const auto& layer = network.layers[l];
    const auto fan_in = network.fan_in(l);
    NPSpaceSpec space{static_cast<int>(fan_in), layer.bound, Distribution::Uniform};
    const auto neurons = sample_neurons(space, layer.width, network.seed.child(l));
    LayerParams p;
    p.weights.resize(static_cast<Eigen::Index>(layer.width), static_cast<Eigen::Index>(fan_in));
    p.bias.resize(static_cast<Eigen::Index>(layer.width));
    for (std::size_t j = 0; j < neurons.size(); ++j) {
      for (std::size_t k = 0; k < fan_in; ++k) {
        p.weights(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = neurons[j].w[k];
      }
      p.bias(static_cast<Eigen::Index>(j)) = neurons[j].b;
    }
    params.push_back(std::move(p));
  }
  return params;
}

namespace {

void check_shapes(const NetworkSpec& network, const std::vector<LayerParams>& params) {
  network.validate();
  if (params.size() != network.layers.size()) throw ArgumentError("network: parameter/layer count mismatch");
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(network.layers[l].width);
    const auto cols = static_cast<Eigen::Index>(network.fan_in(l));
    if (params[l].weights.rows() != rows || params[l].weights.cols() != cols || params[l].bias.size() != rows) {
      throw ArgumentError("network: layer " + std::to_string(l + 1) + " parameter shape mismatch");
    }
  }
}

// g(w_j . x_i + b_j) for one neuron of the first layer; the dot product runs in input order.
void first_layer_column(const Eigen::MatrixXd& x, const LayerParams& p, Eigen::Index j, const Activation& g,
                        double* out) {
  const Eigen::Index n = x.cols();
  const double b = p.bias(j);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) acc += x(i, k) * p.weights(j, k);
    out[i] = g.apply(acc + b);
  }
}

Eigen::MatrixXd first_layer(const Eigen::MatrixXd& x, const LayerParams& p, const Activation& g, unsigned threads) {
  Eigen::MatrixXd out(x.rows(), p.weights.rows());
  const auto width = p.weights.rows();
  const auto blocks = static_cast<std::size_t>((width + kColumnBlock - 1) / kColumnBlock);
  parallel_for(blocks, threads, [&](std::size_t blk) {
    const Eigen::Index start = static_cast<Eigen::Index>(blk) * kColumnBlock;
    const Eigen::Index stop = std::min(width, start + kColumnBlock);
    for (Eigen::Index j = start; j < stop; ++j) first_layer_column(x, p, j, g, out.col(j).data());
  });
  return out;
}

// Columns [start, start + len) of g(A W^T + b). Always called with the same partition.
Eigen::MatrixXd layer_block(const Eigen::MatrixXd& a, const LayerParams& p, const Activation& g, Eigen::Index start,
                            Eigen::Index len) {
  const Eigen::MatrixXd w_block = p.weights.middleRows(start, len).transpose();
  Eigen::MatrixXd z = a * w_block;
  for (Eigen::Index j = 0; j < len; ++j) {
    const double b = p.bias(start + j);
    double* col = z.col(j).data();
    for (Eigen::Index i = 0; i < z.rows(); ++i) col[i] = g.apply(col[i] + b);
  }
  return z;
}

Eigen::MatrixXd deep_layer(const Eigen::MatrixXd& a, const LayerParams& p, const Activation& g, unsigned threads) {
  const auto width = p.weights.rows();
  Eigen::MatrixXd out(a.rows(), width);
  const auto blocks = static_cast<std::size_t>((width + kColumnBlock - 1) / kColumnBlock);
  parallel_for(blocks, threads, [&](std::size_t blk) {
    const Eigen::Index start = static_cast<Eigen::Index>(blk) * kColumnBlock;
    const Eigen::Index len = std::min(kColumnBlock, width - start);
    out.middleCols(start, len) = layer_block(a, p, g, start, len);
  });
  return out;
}

void check_finite(const Eigen::MatrixXd& m, std::size_t layer) {
  if (!m.allFinite()) {
    throw NumericError("layer " + std::to_string(layer + 1) + ": non-finite activation value");
  }
}

Eigen::MatrixXd forward(const Eigen::MatrixXd& points, const NetworkSpec& network,
                        const std::vector<LayerParams>& params, std::size_t depth, unsigned threads) {
  Eigen::MatrixXd a = first_layer(points, params[0], network.layers[0].activation, threads);
  check_finite(a, 0);
  for (std::size_t l = 1; l < depth; ++l) {
    a = deep_layer(a, params[l], network.layers[l].activation, threads);
    check_finite(a, l);
  }
  return a;
}

void check_grid(const Eigen::MatrixXd& points, const NetworkSpec& network) {
  if (points.rows() == 0) throw ArgumentError("grid is empty");
  if (points.cols() != network.input_dim) {
    throw ArgumentError("grid dimension " + std::to_string(points.cols()) + " does not match input_dim " +
                        std::to_string(network.input_dim));
  }
  if (!points.allFinite()) throw ArgumentError("grid contains non-finite points");
}

}  // namespace

Eigen::MatrixXd evaluate_network(const Eigen::MatrixXd& points, const NetworkSpec& network,
                                 const std::vector<LayerParams>& params, const BuildOptions& options) {
  check_shapes(network, params);
  check_grid(points, network);
  return forward(points, network, params, params.size(), options.threads);
}

HiddenMatrix build_from_params(const InputGrid& grid, const NetworkSpec& network, std::vector<LayerParams> params,
                               const BuildOptions& options) {
  Eigen::MatrixXd values = evaluate_network(grid.points, network, params, options);
  return HiddenMatrix(std::move(values), grid, network, std::move(params), ParamSource::Explicit);
}

HiddenMatrix build_multi_layer(const InputGrid& grid, const NetworkSpec& network, const BuildOptions& options) {
  check_grid(grid.points, network);
  auto params = sample_network(network);
  Eigen::MatrixXd values = forward(grid.points, network, params, params.size(), options.threads);
  return HiddenMatrix(std::move(values), grid, network, std::move(params), ParamSource::Seeded);
}

HiddenMatrix build_single_layer(const InputGrid& grid, const NPSpaceSpec& np_space, std::size_t width,
                                const Activation& activation, const SeedSpec& seed, const BuildOptions& options) {
  np_space.validate();
  if (width < 1) throw ArgumentError("width must be >= 1");
  NetworkSpec network{np_space.input_dim, {LayerSpec{width, np_space.bound, activation}}, seed};
  return build_multi_layer(grid, network, options);
}

Eigen::VectorXd recompute_column(const HiddenMatrix& m, Eigen::Index j) {
  if (j < 0 || j >= m.cols()) {
    throw ArgumentError("recompute_column: index " + std::to_string(j) + " out of range [0, " +
                        std::to_string(m.cols()) + ")");
  }
  const auto& network = m.network();
  const auto& params = m.params();
  const std::size_t depth = params.size();
  Eigen::VectorXd col(m.rows());
  if (depth == 1) {
    first_layer_column(m.grid().points, params[0], j, network.layers[0].activation, col.data());
    return col;
  }
  const Eigen::MatrixXd a = forward(m.grid().points, network, params, depth - 1, 1);
  const Eigen::Index width = params.back().weights.rows();
  const Eigen::Index start = (j / kColumnBlock) * kColumnBlock;
  const Eigen::Index len = std::min(kColumnBlock, width - start);
  col = layer_block(a, params.back(), network.layers.back().activation, start, len).col(j - start);
  return col;
}

}  // namespace nsdim
