#include "lego/nn.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "lego/error.hpp"

namespace lego::nn {
namespace {

void apply_layer(const DenseLayer& layer, std::span<const double> x, std::vector<double>& y,
                 double leaky_slope) {
  y.resize(layer.out_dim);
  for (std::size_t o = 0; o < layer.out_dim; ++o) {
    const double* w = layer.weights.data() + o * layer.in_dim;
    double z = layer.bias[o];
    for (std::size_t i = 0; i < layer.in_dim; ++i) z += w[i] * x[i];
    if (layer.activation == Activation::leaky_relu && z < 0.0) z *= leaky_slope;
    y[o] = z;
  }
}

void check_shape(const DenseLayer& layer, std::size_t index, std::size_t input) {
  if (layer.weights.size() != layer.in_dim * layer.out_dim ||
      layer.bias.size() != layer.out_dim) {
    std::ostringstream msg;
    msg << "layer " << index << " has inconsistent weight/bias sizes";
    throw Error(Errc::malformed_bundle, msg.str());
  }
  if (input != layer.in_dim) {
    std::ostringstream msg;
    msg << "layer " << index << " expects input width " << layer.in_dim << ", got " << input;
    throw Error(Errc::malformed_bundle, msg.str());
  }
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  return a == Activation::leaky_relu ? "leaky_relu" : "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "leaky_relu") return Activation::leaky_relu;
  if (name == "identity") return Activation::identity;
  throw Error(Errc::malformed_bundle, "unknown activation '" + std::string(name) + "'");
}

std::vector<double> forward_mlp(std::span<const DenseLayer> layers, std::span<const double> x,
                                double leaky_slope) {
  std::vector<double> current(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    check_shape(layers[i], i, current.size());
    apply_layer(layers[i], current, next, leaky_slope);
    current.swap(next);
  }
  return current;
}

std::vector<double> forward_deepsets(std::span<const DenseLayer> phi,
                                     std::span<const DenseLayer> rho,
                                     std::span<const double> elements, std::size_t element_dim,
                                     double extra, double leaky_slope) {
  if (element_dim == 0 || elements.empty() || elements.size() % element_dim != 0) {
    throw Error(Errc::invalid_scan_input, "deepsets input must be a non-empty set");
  }
  const std::size_t count = elements.size() / element_dim;

  // Elements are visited in lexicographic order so the floating-point sum,
  // and therefore the output, is bit-identical under any permutation.
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto element = [&](std::size_t e) { return elements.subspan(e * element_dim, element_dim); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ea = element(a);
    auto eb = element(b);
    return std::lexicographical_compare(ea.begin(), ea.end(), eb.begin(), eb.end());
  });

  std::vector<double> pooled;
  for (std::size_t e : order) {
    auto encoded = forward_mlp(phi, element(e), leaky_slope);
    if (pooled.empty()) pooled.assign(encoded.size(), 0.0);
    for (std::size_t j = 0; j < encoded.size(); ++j) pooled[j] += encoded[j];
  }
  for (double& p : pooled) p /= static_cast<double>(count);
  pooled.push_back(extra);
  return forward_mlp(rho, pooled, leaky_slope);
}

}  // namespace lego::nn
