#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsdim {

/// Identifier of the generator and stream-derivation rule below. Written into every
/// report so a run can be replayed bit-for-bit by a later release.
inline constexpr std::string_view kRngAlgorithm = "splitmix64-ctr/v1";

/// Reproducible random stream selector. (master_seed, stream_index) fully determines
/// every value drawn from it.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  /// Independent sub-stream: {derive_key(stream_key(*this), index), 0}.
  SeedSpec child(std::uint64_t index) const;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// SplitMix64 finalizer (Stafford variant 13).
std::uint64_t mix64(std::uint64_t z) noexcept;

/// key = mix64(mix64(master_seed) ^ mix64(stream_index + golden)).
std::uint64_t stream_key(const SeedSpec& seed) noexcept;

/// key' = mix64(key ^ mix64(index + 2 * golden)).
std::uint64_t derive_key(std::uint64_t key, std::uint64_t index) noexcept;

// Counter-based generator: the i-th output (i = 1, 2, ...) is mix64(key + i * golden).
// Random access by counter makes streams cheap to create and split.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
  explicit CounterRng(const SeedSpec& seed) noexcept : key_(stream_key(seed)) {}

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept;
  /// Uniform on [lo, hi]; the result never leaves the closed interval.
  double uniform(double lo, double hi) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

enum class Distribution { Uniform };

/// Bounded nonlinear parameter space S = [-R, R]^(n+1) for (w, b).
struct NPSpaceSpec {
  int input_dim = 1;
  double bound = 1.0;
  Distribution distribution = Distribution::Uniform;

  /// Throws ArgumentError when input_dim < 1 or bound is not a positive finite number.
  void validate() const;
};

struct NeuronParams {
  std::vector<double> w;
  double b = 0.0;
};

/// Draws `count` i.i.d. neurons. Neuron j reads its own stream derive_key(stream_key(seed), j):
/// first the n weights, then the bias. A prefix of a longer draw equals a shorter draw.
std::vector<NeuronParams> sample_neurons(const NPSpaceSpec& spec, std::size_t count, const SeedSpec& seed);

/// Axis-aligned box [lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box unit(int dim);
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> x) const;
  void validate() const;
};

enum class GridMode { Mesh, UniformRandom };

std::string to_string(GridMode mode);
GridMode grid_mode_from_name(std::string_view name);

struct InputGrid {
  Eigen::MatrixXd points;  // N x n, row i is x_i
  Box domain;
  GridMode mode = GridMode::Mesh;
  SeedSpec seed;

  Eigen::Index size() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// Mesh: per axis k = ceil(count^(1/n)) equispaced points including both endpoints, Cartesian
/// product with the last axis varying fastest (so k^n >= count points in total).
/// UniformRandom: `count` i.i.d. uniform points drawn sequentially from one stream.
InputGrid make_grid(const Box& domain, std::size_t count, GridMode mode, const SeedSpec& seed = {});

/// Mesh of `count` points on [lo, hi] with exact endpoints.
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace nsdim
