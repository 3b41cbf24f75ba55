#include <nsdim/activation.hpp>
#include <nsdim/errors.hpp>

#include <array>
#include <cmath>
#include <utility>

namespace nsdim {

namespace {

constexpr std::array<std::pair<std::string_view, ActivationKind>, 3> kRegistry{{
    {"tanh", ActivationKind::Tanh},
    {"sigmoid", ActivationKind::Sigmoid},
    {"sin", ActivationKind::Sin},
}};

}  // namespace

Activation Activation::from_name(std::string_view name) {
  for (const auto& [key, kind] : kRegistry) {
    if (key == name) return Activation(kind);
  }
  throw ArgumentError("unknown activation '" + std::string(name) + "' (expected tanh, sigmoid or sin)");
}

std::string Activation::name() const {
  for (const auto& [key, kind] : kRegistry) {
    if (kind == kind_) return std::string(key);
  }
  return "unknown";
}

double Activation::apply(double x) const noexcept {
  switch (kind_) {
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::Sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::Sin:
      return std::sin(x);
  }
  return x;
}

double Activation::eval(double x) const {
  if (!std::isfinite(x)) throw DomainError(name() + ": non-finite input");
  return apply(x);
}

std::vector<double> eval_batch(const Activation& a, std::span<const double> xs) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) {
      throw DomainError(a.name() + ": non-finite input at index " + std::to_string(i));
    }
    out[i] = a.apply(xs[i]);
  }
  return out;
}

std::vector<std::string> activation_names() {
  std::vector<std::string> names;
  for (const auto& entry : kRegistry) names.emplace_back(entry.first);
  return names;
}

}  // namespace nsdim
