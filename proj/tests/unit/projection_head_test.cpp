#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "modalign/projection_head.hpp"
#include "test_support.hpp"

using namespace modalign;
using testing_support::TempDir;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no modalign::Error thrown";
  return ErrorCode::Internal;
}

ProjectionHead<double> random_head(std::uint64_t seed, HeadConfig cfg) {
  auto head = init_head(cfg);
  SplitMix64 rng(seed);
  for (auto& l : head.layers()) {
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = 0.1 * rng.normal();
  }
  return head;
}

}  // namespace

TEST(InitHead, GlorotUniformFromSeededStream) {
  const HeadConfig cfg{3, 4, {5}, 11};
  const auto head = init_head(cfg);
  SplitMix64 rng(11);
  const std::vector<std::pair<int, int>> shapes{{5, 3}, {4, 5}};
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const auto [rows, cols] = shapes[k];
    const double a = std::sqrt(6.0 / (rows + cols));
    const auto& l = head.layers()[k];
    ASSERT_EQ(l.weight.rows(), rows);
    ASSERT_EQ(l.weight.cols(), cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double expected = -a + 2 * a * (static_cast<double>(rng.next() >> 11) * 0x1.0p-53);
        EXPECT_EQ(l.weight(r, c), expected);
      }
    }
    EXPECT_TRUE(l.bias.isZero(0.0));
  }
  EXPECT_EQ(head.parameter_count(), 5u * 3 + 5 + 4 * 5 + 4);
}

TEST(InitHead, ConfigValidation) {
  EXPECT_EQ(code_of([] { init_head(HeadConfig{3, 4, {5, 6, 7}, 0}); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { init_head(HeadConfig{0, 4, {}, 0}); }), ErrorCode::InvalidConfig);
  EXPECT_TRUE(init_head(HeadConfig{3, 4, {}, 9}) == init_head(HeadConfig{3, 4, {}, 9}));
  EXPECT_FALSE(init_head(HeadConfig{3, 4, {}, 9}) == init_head(HeadConfig{3, 4, {}, 10}));
}

TEST(Forward, MatchesManualComputation) {
  const auto head = random_head(3, HeadConfig{4, 3, {6, 5}, 21});
  Eigen::VectorXd x(4);
  x << 0.3, -1.2, 2.0, 0.7;
  Eigen::VectorXd h = x;
  for (std::size_t k = 0; k < head.layers().size(); ++k) {
    h = head.layers()[k].weight * h + head.layers()[k].bias;
    if (k + 1 < head.layers().size()) h = h.cwiseMax(0.0);
  }
  const Eigen::VectorXd expected = h / h.norm();
  const Eigen::VectorXd got = forward(head, x);
  EXPECT_NEAR((got - expected).norm(), 0.0, 1e-14);
  EXPECT_NEAR(got.norm(), 1.0, 1e-15);
}

TEST(Forward, HandCases) {
  const ProjectionHead<double> identity(HeadConfig{2, 2, {}, 0},
                                        {{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)}});
  Eigen::VectorXd x(2);
  x << 3, 4;
  const Eigen::VectorXd y = forward(identity, x);
  EXPECT_NEAR(y(0), 0.6, 1e-16);
  EXPECT_NEAR(y(1), 0.8, 1e-16);

  Eigen::MatrixXd w1(2, 2);
  w1 << 1, 0, 0, -1;
  const ProjectionHead<double> two(HeadConfig{2, 2, {2}, 0},
                                   {{w1, Eigen::VectorXd::Zero(2)}, {Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)}});
  x << 1, 1;
  const Eigen::VectorXd z = forward(two, x);
  EXPECT_EQ(z(0), 1.0);
  EXPECT_EQ(z(1), 0.0);
}

TEST(InitHead, GlorotBound) {
  const auto head = init_head(HeadConfig{4, 4, {}, 123});
  EXPECT_LT(head.layers()[0].weight.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 8.0));
}

TEST(Backward, ZeroAndLinearUpstream) {
  const auto head = random_head(9, HeadConfig{3, 4, {5}, 6});
  SplitMix64 rng(10);
  Eigen::MatrixXd x(3, 4), up(4, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < up.size(); ++i) up.data()[i] = rng.normal();
  const auto zero = backward(head, x, Eigen::MatrixXd::Zero(4, 4));
  for (const auto& l : zero.layers) {
    EXPECT_TRUE(l.weight.isZero(0.0));
    EXPECT_TRUE(l.bias.isZero(0.0));
  }
  const auto once = backward(head, x, up);
  const auto twice = backward(head, x, (2.0 * up).eval());
  for (std::size_t k = 0; k < once.layers.size(); ++k) {
    EXPECT_EQ(twice.layers[k].weight, (2.0 * once.layers[k].weight).eval());
    EXPECT_EQ(twice.layers[k].bias, (2.0 * once.layers[k].bias).eval());
  }
  EXPECT_THROW(backward(head, x, Eigen::MatrixXd::Zero(4, 3)), Error);
}

TEST(Forward, BatchEqualsColumnwise) {
  const auto head = random_head(5, HeadConfig{6, 4, {8}, 2});
  SplitMix64 rng(8);
  Eigen::MatrixXd x(6, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const auto batch = forward_batch(head, x);
  for (Eigen::Index c = 0; c < x.cols(); ++c) EXPECT_EQ(batch.col(c), forward(head, x.col(c)));
}

TEST(Forward, FloatScalarWorks) {
  const auto head = init_head<float>(HeadConfig{3, 2, {}, 1});
  Eigen::VectorXf x(3);
  x << 1, 2, 3;
  EXPECT_NEAR(forward(head, x).norm(), 1.0f, 1e-6f);
}

TEST(Forward, Errors) {
  const auto head = init_head(HeadConfig{3, 2, {}, 1});
  EXPECT_EQ(code_of([&] { forward(head, Eigen::VectorXd::Ones(4)); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { forward(head, Eigen::VectorXd::Zero(3)); }), ErrorCode::DegenerateOutput);
}

TEST(Backward, MatchesFiniteDifferencesOfLinearFunctional) {
  // L = c . f(x) summed over a batch; checks every parameter.
  auto head = random_head(17, HeadConfig{5, 4, {7, 6}, 4});
  SplitMix64 rng(23);
  Eigen::MatrixXd x(5, 3), c(4, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.normal();
  auto loss = [&] {
    const auto y = forward_batch(head, x);
    return (y.array() * c.array()).sum();
  };
  const auto grads = backward(head, x, c);
  const double h = 1e-6;
  double worst = 0;
  for (std::size_t k = 0; k < head.layers().size(); ++k) {
    auto& l = head.layers()[k];
    auto check = [&](double& p, double analytic) {
      const double saved = p;
      p = saved + h;
      const double up = loss();
      p = saved - h;
      const double down = loss();
      p = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::fabs(numeric - analytic) / std::max({std::fabs(numeric), std::fabs(analytic), 1e-6}));
    };
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) check(l.weight.data()[i], grads.layers[k].weight.data()[i]);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) check(l.bias.data()[i], grads.layers[k].bias.data()[i]);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Presets, DimensionsForEveryPair) {
  ASSERT_EQ(structure_models().size(), 4u);
  ASSERT_EQ(language_models().size(), 3u);
  for (const auto& s : structure_models()) {
    for (const auto& l : language_models()) {
      for (int layers = 1; layers <= 3; ++layers) {
        const auto cfg = preset_config(s.name, l.name, layers);
        EXPECT_EQ(cfg.input_dim, s.dim);
        EXPECT_EQ(cfg.output_dim, l.dim);
        EXPECT_EQ(cfg.layer_count(), static_cast<std::size_t>(layers));
      }
    }
  }
  EXPECT_EQ(preset_config("gearnet", "llama3.1-70b", 3).chain(), (std::vector<Eigen::Index>{3072, 4096, 6144, 8192}));
  EXPECT_EQ(preset_config("GAT", "Gemma2-2B", 2).chain(), (std::vector<Eigen::Index>{64, 1024, 2304}));
  EXPECT_EQ(preset_config("ScanNet", "LLaMa3.1-8B", 3).chain(), (std::vector<Eigen::Index>{128, 512, 2048, 4096}));
  EXPECT_EQ(code_of([] { preset_config("AlphaFold", "Gemma2-2B", 1); }), ErrorCode::UnknownPreset);
  EXPECT_EQ(code_of([] { preset_config("GAT", "Gemma2-2B", 4); }), ErrorCode::UnknownPreset);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  TempDir dir;
  const auto head = random_head(1, HeadConfig{6, 3, {4, 5}, 77});
  const auto path = dir.file("h.phd");
  save_head(head, path);
  const auto back = load_head(path);
  EXPECT_TRUE(back == head);
  EXPECT_EQ(back.config().chain(), head.config().chain());
}

TEST(Checkpoint, ByteLayout) {
  Layer<double> l{Eigen::MatrixXd(2, 1), Eigen::VectorXd(2)};
  l.weight << 1.5, -2.0;
  l.bias << 0.25, 4.0;
  const ProjectionHead<double> head(HeadConfig{1, 2, {}, 0}, {l});
  const auto bytes = encode_head(head);
  std::string expected = "PHD1";
  auto put = [&](auto v) {
    char buf[sizeof(v)];
    std::memcpy(buf, &v, sizeof(v));
    expected.append(buf, sizeof(v));
  };
  put(std::uint16_t{1});
  put(std::uint8_t{1});
  put(std::uint32_t{2});
  put(std::uint32_t{1});
  put(1.5);
  put(-2.0);
  put(0.25);
  put(4.0);
  EXPECT_EQ(bytes, expected);
  EXPECT_TRUE(decode_head(expected) == head);
}

TEST(Checkpoint, Errors) {
  const auto head = init_head(HeadConfig{2, 3, {4}, 5});
  const auto bytes = encode_head(head);
  EXPECT_EQ(code_of([&] { decode_head("XHD1" + bytes.substr(4)); }), ErrorCode::BadMagic);
  std::string v2 = bytes;
  v2[4] = 2;
  EXPECT_EQ(code_of([&] { decode_head(v2); }), ErrorCode::VersionUnsupported);
  EXPECT_EQ(code_of([&] { decode_head(bytes.substr(0, bytes.size() - 1)); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { decode_head(bytes + "x"); }), ErrorCode::ShapeMismatch);
  std::string zero_layers = bytes;
  zero_layers[6] = 0;
  EXPECT_EQ(code_of([&] { decode_head(zero_layers.substr(0, 7)); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([] { load_head("/nonexistent/head.phd"); }), ErrorCode::FileNotFound);
}
