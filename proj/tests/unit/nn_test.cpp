#include <algorithm>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "lego/bundle.hpp"
#include "lego/error.hpp"
#include "lego/nn.hpp"
#include "lego/streams.hpp"
#include "test_support.hpp"

namespace {

using lego::nn::Activation;
using lego::nn::DenseLayer;

DenseLayer random_layer(lego::StreamRng& rng, std::size_t in, std::size_t out, Activation act) {
  DenseLayer l{in, out, std::vector<double>(in * out), std::vector<double>(out), act};
  for (double& w : l.weights) w = rng.uniform(-1.0, 1.0);
  for (double& b : l.bias) b = rng.uniform(-0.5, 0.5);
  return l;
}

// From-scratch oracle: column-vector matrix product with explicit indices.
std::vector<double> oracle_forward(const std::vector<DenseLayer>& layers, std::vector<double> x,
                                   double slope) {
  for (const auto& l : layers) {
    std::vector<double> y(l.out_dim);
    for (std::size_t r = 0; r < l.out_dim; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < l.in_dim; ++c) acc += l.weights[r * l.in_dim + c] * x[c];
      acc += l.bias[r];
      y[r] = (l.activation == Activation::leaky_relu && acc < 0) ? slope * acc : acc;
    }
    x = y;
  }
  return x;
}

TEST(ForwardMlp, LeakySlope) {
  const std::vector<DenseLayer> layers = {
      {2, 2, {1.0, 0.0, 0.0, 1.0}, {0.0, 0.0}, Activation::leaky_relu}};
  const std::vector<double> x = {-1.0, 2.0};
  const auto y = lego::nn::forward_mlp(layers, x);
  EXPECT_DOUBLE_EQ(y[0], -0.01);
  EXPECT_DOUBLE_EQ(y[1], 2.0);
}

TEST(ForwardMlp, ZeroWeightsGiveActivatedBias) {
  const std::vector<DenseLayer> layers = {
      {3, 2, std::vector<double>(6, 0.0), {0.7, -2.0}, Activation::leaky_relu}};
  const std::vector<double> x = {5.0, 6.0, 7.0};
  const auto y = lego::nn::forward_mlp(layers, x);
  EXPECT_DOUBLE_EQ(y[0], 0.7);
  EXPECT_DOUBLE_EQ(y[1], -0.02);
}

TEST(ForwardMlp, MatchesMatrixOracle) {
  lego::StreamRng rng(5);
  const std::vector<DenseLayer> layers = {random_layer(rng, 4, 7, Activation::leaky_relu),
                                          random_layer(rng, 7, 5, Activation::leaky_relu),
                                          random_layer(rng, 5, 3, Activation::identity)};
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(4);
    for (double& v : x) v = rng.uniform(-3.0, 3.0);
    const auto got = lego::nn::forward_mlp(layers, x);
    const auto want = oracle_forward(layers, x, 0.01);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], want[i], 1e-6);
  }
}

TEST(ForwardMlp, DimensionMismatch) {
  lego::StreamRng rng(5);
  const std::vector<DenseLayer> layers = {random_layer(rng, 4, 3, Activation::identity)};
  const std::vector<double> x(5, 1.0);
  try {
    (void)lego::nn::forward_mlp(layers, x);
    FAIL();
  } catch (const lego::Error& e) {
    EXPECT_EQ(e.code(), lego::Errc::malformed_bundle);
  }
}

class DeepsetsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    lego::StreamRng rng(8);
    phi = {random_layer(rng, 3, 6, Activation::leaky_relu),
           random_layer(rng, 6, 4, Activation::leaky_relu)};
    rho = {random_layer(rng, 5, 6, Activation::leaky_relu),
           random_layer(rng, 6, 2, Activation::identity)};
    for (int i = 0; i < 30; ++i) elements.push_back(rng.uniform(0.0, 10.0));
  }
  std::vector<DenseLayer> phi, rho;
  std::vector<double> elements;  // 10 elements of width 3
};

TEST_F(DeepsetsTest, PermutationInvariantBitForBit) {
  const auto base = lego::nn::forward_deepsets(phi, rho, elements, 3, 1.25);
  lego::StreamRng rng(2);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::size_t> order(10);
    for (std::size_t i = 0; i < 10; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<double> permuted;
    for (std::size_t e : order) {
      permuted.insert(permuted.end(), elements.begin() + 3 * e, elements.begin() + 3 * e + 3);
    }
    EXPECT_EQ(lego::nn::forward_deepsets(phi, rho, permuted, 3, 1.25), base);
  }
}

TEST_F(DeepsetsTest, SingleElementPoolingIdentity) {
  const std::vector<double> one(elements.begin(), elements.begin() + 3);
  auto encoded = lego::nn::forward_mlp(phi, one);
  encoded.push_back(0.5);
  EXPECT_EQ(lego::nn::forward_deepsets(phi, rho, one, 3, 0.5), lego::nn::forward_mlp(rho, encoded));
}

TEST_F(DeepsetsTest, DuplicatedElementsMatchSingleCopy) {
  const std::vector<double> one(elements.begin(), elements.begin() + 3);
  std::vector<double> two = one;
  two.insert(two.end(), one.begin(), one.end());
  const auto a = lego::nn::forward_deepsets(phi, rho, one, 3, 0.5);
  const auto b = lego::nn::forward_deepsets(phi, rho, two, 3, 0.5);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(a[i], b[i]);
}

TEST_F(DeepsetsTest, EmptySetRejected) {
  try {
    (void)lego::nn::forward_deepsets(phi, rho, {}, 3, 0.5);
    FAIL();
  } catch (const lego::Error& e) {
    EXPECT_EQ(e.code(), lego::Errc::invalid_scan_input);
  }
}

TEST(GoldenNetworks, ReproduceReferenceOutputs) {
  const auto bundle = lego::load_bundle(lego::test::data_path("golden_bundle.json"));
  const auto golden = nlohmann::json::parse(lego::test::read_file(lego::test::data_path("golden_nn.json")));
  for (const auto& c : golden["dec"]) {
    const auto x = c["input"].get<std::vector<double>>();
    const auto want = c["output"].get<std::vector<double>>();
    const auto got = lego::nn::forward_mlp(bundle.dec, x, bundle.leaky_slope);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-6);
  }
  for (const auto& c : golden["deepsets"]) {
    std::vector<double> flat;
    for (const auto& e : c["elements"]) {
      for (double x : e.get<std::vector<double>>()) flat.push_back(x);
    }
    const auto want = c["output"].get<std::vector<double>>();
    const auto got = lego::nn::forward_deepsets(bundle.scan_phi, bundle.scan_rho, flat, bundle.d1,
                                                c["extra"].get<double>(), bundle.leaky_slope);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-6);
  }
}

TEST(Activation, NamesRoundTrip) {
  EXPECT_EQ(lego::nn::activation_from_string("leaky_relu"), Activation::leaky_relu);
  EXPECT_EQ(lego::nn::activation_from_string(lego::nn::to_string(Activation::identity)),
            Activation::identity);
  EXPECT_THROW(lego::nn::activation_from_string("relu"), lego::Error);
}

}  // namespace
