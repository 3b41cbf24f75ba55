#pragma once

#include <nsdim/activation.hpp>
#include <nsdim/sampling.hpp>

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

namespace nsdim {

struct LayerSpec {
  std::size_t width = 1;
  double bound = 1.0;
  Activation activation;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Layered architecture sigma_L o ... o sigma_1 with sigma_l = g o (W^l x + b^l).
/// Layer l reads width(l-1) inputs; layer 1 reads input_dim inputs.
struct NetworkSpec {
  int input_dim = 1;
  std::vector<LayerSpec> layers;
  SeedSpec seed;

  void validate() const;
  std::size_t fan_in(std::size_t layer) const;
  std::size_t output_width() const { return layers.back().width; }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct LayerParams {
  Eigen::MatrixXd weights;  // width x fan_in, row j holds w_j
  Eigen::VectorXd bias;     // width
};

enum class ParamSource { Seeded, Explicit };

struct BuildOptions {
  unsigned threads = 1;
};

// Output columns of layers >= 2 are computed in fixed-size blocks. The partition is
// independent of the thread count, so values are bitwise reproducible.
inline constexpr Eigen::Index kColumnBlock = 128;

/// Hidden Layer Output Matrix: values(i, j) is the j-th last-layer neuron evaluated at
/// grid point i. Column-major, immutable after construction.
class HiddenMatrix {
 public:
  HiddenMatrix(Eigen::MatrixXd values, InputGrid grid, NetworkSpec network, std::vector<LayerParams> params,
               ParamSource source);

  const Eigen::MatrixXd& values() const { return values_; }
  const InputGrid& grid() const { return grid_; }
  const NetworkSpec& network() const { return network_; }
  const std::vector<LayerParams>& params() const { return params_; }
  ParamSource param_source() const { return source_; }

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

  /// (w_j, b_j) of the last layer, one entry per column.
  std::vector<NeuronParams> column_params() const;

 private:
  Eigen::MatrixXd values_;
  InputGrid grid_;
  NetworkSpec network_;
  std::vector<LayerParams> params_;
  ParamSource source_;
};

/// Layer l draws its neurons with sample_neurons(fan_in, bound, width, network.seed.child(l)).
std::vector<LayerParams> sample_network(const NetworkSpec& network);

/// H(i, j) = g(w_j . x_i + b_j) with (w_j, b_j) drawn from [-R, R]^(n+1).
HiddenMatrix build_single_layer(const InputGrid& grid, const NPSpaceSpec& np_space, std::size_t width,
                                const Activation& activation, const SeedSpec& seed, const BuildOptions& options = {});

HiddenMatrix build_multi_layer(const InputGrid& grid, const NetworkSpec& network, const BuildOptions& options = {});

/// Builds H from caller-supplied parameters (shapes must match the spec).
HiddenMatrix build_from_params(const InputGrid& grid, const NetworkSpec& network, std::vector<LayerParams> params,
                               const BuildOptions& options = {});

/// Evaluates the last hidden layer of (network, params) at arbitrary points (rows of `points`).
Eigen::MatrixXd evaluate_network(const Eigen::MatrixXd& points, const NetworkSpec& network,
                                 const std::vector<LayerParams>& params, const BuildOptions& options = {});

/// Re-evaluates column j from the stored parameters. Bitwise equal to values().col(j).
Eigen::VectorXd recompute_column(const HiddenMatrix& m, Eigen::Index j);

// Binary container; layout documented in docs/hidden_matrix_format.md.
void save_hidden_matrix(const HiddenMatrix& m, const std::filesystem::path& path);
HiddenMatrix load_hidden_matrix(const std::filesystem::path& path);

}  // namespace nsdim
