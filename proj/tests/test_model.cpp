#include <doctest.h>

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "ctbayes/bnua.hpp"
#include "ctbayes/model.hpp"
#include "test_util.hpp"

using namespace ctbayes;

namespace {

at::Generator gen(uint64_t seed) { return at::make_generator<at::CPUGeneratorImpl>(seed); }

ReconstructionNet make_net(int64_t channels = 8, int64_t layers = 4, uint64_t seed = 1) {
  auto init = gen(seed);
  ModelConfig cfg;
  cfg.channels = channels;
  cfg.encoder_layers = layers;
  return ReconstructionNet(cfg, init);
}

}  // namespace

TEST_CASE("ModelConfig validation") {
  ModelConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.channels = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.encoder_layers = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("shape closure") {
  auto net = make_net(32, 4);
  auto g = gen(2);
  const auto x = torch::rand({2, 1, 64, 64}, g);
  const auto enc = net->encode(x, g);
  CHECK(enc.z.sizes() == torch::IntArrayRef({2, 32, 64, 64}));
  CHECK(enc.skips.size() == 3);
  CHECK(net->decode(enc, g).sizes() == x.sizes());
  const auto odd = torch::rand({1, 1, 13, 21}, g);
  CHECK(net->forward(odd, g).sizes() == odd.sizes());
  CHECK_THROWS_AS(net->forward(torch::rand({1, 2, 8, 8}), g), ShapeError);
  CHECK_THROWS_AS(net->forward(torch::rand({1, 8, 8}), g), ShapeError);
}

TEST_CASE("encode") {
  auto net = make_net();
  const auto x = torch::rand({1, 1, 16, 16});
  SUBCASE("zero input, zero biases and sigmas give a zero embedding") {
    torch::NoGradGuard no_grad;
    for (auto& item : net->named_parameters())
      if (item.key().find("bias") != std::string::npos) item.value().zero_();
    net->zero_sigma();
    auto g = gen(0);
    CHECK(net->encode(torch::zeros({1, 1, 12, 12}), g).z.abs().max().item<float>() == 0.0f);
  }
  SUBCASE("same seed, same embedding") {
    auto g1 = gen(5), g2 = gen(5);
    CHECK(torch::equal(net->encode(x, g1).z, net->encode(x, g2).z));
  }
  SUBCASE("different seeds differ when sigma > 0") {
    auto g1 = gen(5), g2 = gen(6);
    CHECK_FALSE(torch::equal(net->encode(x, g1).z, net->encode(x, g2).z));
  }
}

TEST_CASE("decode is deterministic with zero sigma") {
  auto net = make_net();
  net->zero_sigma();
  const auto x = torch::rand({2, 1, 16, 16});
  auto g1 = gen(1), g2 = gen(2);
  CHECK(torch::equal(net->forward(x, g1), net->forward(x, g2)));
}

TEST_CASE("zero-sigma model equals its deterministic twin bitwise") {
  auto net = make_net();
  const auto x = torch::rand({2, 1, 16, 16});
  net->zero_sigma();
  auto g = gen(3);
  const auto sampled = net->forward(x, g);
  net->set_mean_only(true);
  CHECK(torch::equal(sampled, net->forward(x, g)));
}

TEST_CASE("gradients reach every variational parameter") {
  auto net = make_net();
  auto g = gen(4);
  const auto x = torch::rand({2, 1, 16, 16}, g), y = torch::rand({2, 1, 16, 16}, g);
  (net->forward(x, g) - y).abs().mean().backward();
  for (const auto& p : net->encoder_variational_parameters()) {
    REQUIRE(p.grad().defined());
    CHECK(torch::isfinite(p.grad()).all().item<bool>());
    CHECK(p.grad().abs().sum().item<double>() > 0.0);
  }
  for (const auto& p : net->sigma_parameters()) {
    REQUIRE(p.grad().defined());
    CHECK(p.grad().abs().sum().item<double>() > 0.0);
  }
}

TEST_CASE("mc_forward") {
  auto net = make_net();
  const auto x = torch::rand({3, 1, 16, 16});
  SUBCASE("default M gives ten embeddings") {
    auto g = gen(0);
    const auto out = net->mc_forward(x, 10, g);
    CHECK(out.z_samples.sizes() == torch::IntArrayRef({3, 10, 8, 16, 16}));
    CHECK(out.y_hat.sizes() == x.sizes());
    CHECK(torch::allclose(out.residual, x - out.y_hat));
  }
  SUBCASE("M < 2 rejected") {
    auto g = gen(0);
    CHECK_THROWS_AS(net->mc_forward(x, 1, g), std::invalid_argument);
  }
  SUBCASE("sigma > 0: embeddings vary across samples") {
    auto g = gen(0);
    const auto out = net->mc_forward(x, 4, g);
    CHECK(out.z_samples.var(1).max().item<double>() > 0.0);
  }
  SUBCASE("sigma = 0: every sample equals the deterministic encoding") {
    net->zero_sigma();
    auto g = gen(0);
    const auto out = net->mc_forward(x, 5, g);
    auto g2 = gen(1);
    const auto z = net->encode(x, g2).z;
    for (int64_t m = 0; m < 5; ++m) CHECK(torch::equal(out.z_samples.select(1, m), z));
  }
}

TEST_CASE("variance of the mean embedding decays as 1/M") {
  torch::NoGradGuard no_grad;
  auto net = make_net(4, 2);
  const auto x = torch::rand({1, 1, 8, 8}, gen(11));
  std::vector<double> xs, ys;
  for (int64_t m : {2, 4, 8, 16, 32}) {
    const int reps = 300;
    std::vector<torch::Tensor> means;
    for (int r = 0; r < reps; ++r) {
      auto g = gen(static_cast<uint64_t>(1000 * m + r));
      means.push_back(net->mc_forward(x, m, g).z_samples.mean(1));
    }
    const double v = torch::stack(means).var(0).mean().item<double>();
    xs.push_back(std::log(static_cast<double>(m)));
    ys.push_back(std::log(v));
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) mx += xs[i] / xs.size(), my += ys[i] / ys.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
  CHECK(sxy / sxx == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("MOPED re-initialization zeroes both KL terms") {
  auto net = make_net();
  {
    torch::NoGradGuard no_grad;
    for (auto& p : net->sigma_parameters()) p.add_(0.5);
  }
  CHECK(net->kl_encoder().item<double>() > 0.0);
  net->moped(0.1);
  CHECK(net->kl_encoder().item<double>() == 0.0);
  CHECK(net->kl_decoder().item<double>() == 0.0);
}

TEST_CASE("parameter partition") {
  auto net = make_net();
  const auto all = net->parameters();
  CHECK(net->sigma_parameters().size() + net->non_sigma_parameters().size() == all.size());
  CHECK(net->sigma_parameters().size() == 4);  // weight and bias sigma, encoder and decoder
}
