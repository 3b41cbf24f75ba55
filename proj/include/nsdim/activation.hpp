#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsdim {

enum class ActivationKind { Tanh, Sigmoid, Sin };

/// Analytic scalar activation g(.) applied to pre-activations w.x + b.
class Activation {
 public:
  constexpr Activation() = default;
  constexpr explicit Activation(ActivationKind kind) : kind_(kind) {}

  /// Looks up "tanh", "sigmoid" or "sin". Throws ArgumentError for unknown names.
  static Activation from_name(std::string_view name);

  ActivationKind kind() const { return kind_; }
  std::string name() const;

  /// Checked evaluation; non-finite input throws DomainError.
  double eval(double x) const;

  /// Unchecked evaluation for inner loops whose inputs are finite by construction.
  double apply(double x) const noexcept;

  friend bool operator==(const Activation&, const Activation&) = default;

 private:
  ActivationKind kind_ = ActivationKind::Tanh;
};

/// Elementwise eval. A non-finite entry throws DomainError naming its index.
std::vector<double> eval_batch(const Activation& a, std::span<const double> xs);

/// Names accepted by Activation::from_name, in registry order.
std::vector<std::string> activation_names();

}  // namespace nsdim
