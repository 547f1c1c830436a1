#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace lego::nn {

enum class Activation { leaky_relu, identity };

std::string_view to_string(Activation a) noexcept;
/// Throws Errc::malformed_bundle on an unknown name.
Activation activation_from_string(std::string_view name);

/// Affine map followed by an activation. Weights are out_dim x in_dim,
/// row-major.
struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::leaky_relu;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

using LayerStack = std::vector<DenseLayer>;

inline constexpr double kDefaultLeakySlope = 0.01;

/// Sequential affine-then-activation. Throws Errc::malformed_bundle when x
/// or an intermediate width does not match the next layer.
std::vector<double> forward_mlp(std::span<const DenseLayer> layers, std::span<const double> x,
                                double leaky_slope = kDefaultLeakySlope);

/// rho(concat(mean_e phi(e), extra)). `elements` holds the set flattened,
/// each element `element_dim` values long. Throws Errc::invalid_scan_input
/// on an empty set.
std::vector<double> forward_deepsets(std::span<const DenseLayer> phi,
                                     std::span<const DenseLayer> rho,
                                     std::span<const double> elements, std::size_t element_dim,
                                     double extra, double leaky_slope = kDefaultLeakySlope);

}  // namespace lego::nn
