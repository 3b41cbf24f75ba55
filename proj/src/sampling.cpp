#include <nsdim/errors.hpp>
#include <nsdim/sampling.hpp>

#include <cmath>
#include <limits>

namespace nsdim {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_key(const SeedSpec& seed) noexcept {
  return mix64(mix64(seed.master_seed) ^ mix64(seed.stream_index + kGolden));
}

std::uint64_t derive_key(std::uint64_t key, std::uint64_t index) noexcept {
  return mix64(key ^ mix64(index + 2 * kGolden));
}

SeedSpec SeedSpec::child(std::uint64_t index) const {
  return SeedSpec{derive_key(stream_key(*this), index), 0};
}

std::uint64_t CounterRng::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform01() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) noexcept {
  const double x = lo + (hi - lo) * uniform01();
  return x > hi ? hi : x;
}

void NPSpaceSpec::validate() const {
  if (input_dim < 1) throw ArgumentError("input_dim must be >= 1");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw ArgumentError("R must be a positive finite number");
}

std::vector<NeuronParams> sample_neurons(const NPSpaceSpec& spec, std::size_t count, const SeedSpec& seed) {
  spec.validate();
  if (count == 0) throw ArgumentError("sample_neurons: count must be >= 1");
  const std::uint64_t key = stream_key(seed);
  const double r = spec.bound;
  std::vector<NeuronParams> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    CounterRng rng(derive_key(key, j));
    out[j].w.resize(static_cast<std::size_t>(spec.input_dim));
    for (double& wk : out[j].w) wk = rng.uniform(-r, r);
    out[j].b = rng.uniform(-r, r);
  }
  return out;
}

Box Box::unit(int dim) {
  return Box{std::vector<double>(static_cast<std::size_t>(dim), 0.0),
             std::vector<double>(static_cast<std::size_t>(dim), 1.0)};
}

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size()) throw ArgumentError("box: lo/hi must be nonempty and of equal length");
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]) || !(lo[k] < hi[k])) {
      throw ArgumentError("box: degenerate axis " + std::to_string(k) + " (need lo < hi)");
    }
  }
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] >= lo[k] && x[k] <= hi[k])) return false;
  }
  return true;
}

std::string to_string(GridMode mode) {
  return mode == GridMode::Mesh ? "mesh" : "random";
}

GridMode grid_mode_from_name(std::string_view name) {
  if (name == "mesh") return GridMode::Mesh;
  if (name == "random" || name == "uniform") return GridMode::UniformRandom;
  throw ArgumentError("unknown grid mode '" + std::string(name) + "' (expected mesh or random)");
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 2) throw ArgumentError("mesh needs at least 2 points per axis");
  std::vector<double> xs(count);
  const double span = hi - lo;
  const double denom = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) xs[i] = lo + static_cast<double>(i) * span / denom;
  xs.front() = lo;
  xs.back() = hi;
  return xs;
}

InputGrid make_grid(const Box& domain, std::size_t count, GridMode mode, const SeedSpec& seed) {
  domain.validate();
  if (count == 0) throw ArgumentError("make_grid: count must be >= 1");
  const int n = domain.dim();
  InputGrid grid;
  grid.domain = domain;
  grid.mode = mode;
  grid.seed = seed;

  if (mode == GridMode::UniformRandom) {
    CounterRng rng(seed);
    grid.points.resize(static_cast<Eigen::Index>(count), n);
    for (Eigen::Index i = 0; i < grid.points.rows(); ++i) {
      for (int k = 0; k < n; ++k) grid.points(i, k) = rng.uniform(domain.lo[k], domain.hi[k]);
    }
    return grid;
  }

  // Smallest per-axis count k with k^n >= count, in integers.
  std::size_t per_axis = 1;
  auto power = [n](std::size_t k) {
    double p = 1.0;
    for (int d = 0; d < n; ++d) p *= static_cast<double>(k);
    return p;
  };
  while (power(per_axis) < static_cast<double>(count)) ++per_axis;
  if (per_axis < 2) throw ArgumentError("make_grid: mesh needs count >= 2 per axis");

  std::vector<std::vector<double>> axes;
  for (int k = 0; k < n; ++k) axes.push_back(linspace(domain.lo[k], domain.hi[k], per_axis));

  const auto total = static_cast<Eigen::Index>(power(per_axis));
  grid.points.resize(total, n);
  for (Eigen::Index i = 0; i < total; ++i) {
    auto rem = static_cast<std::size_t>(i);
    for (int k = n - 1; k >= 0; --k) {
      grid.points(i, k) = axes[k][rem % per_axis];
      rem /= per_axis;
    }
  }
  return grid;
}

}  // namespace nsdim
