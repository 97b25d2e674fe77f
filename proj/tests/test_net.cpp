#include "gadv/model_io.hpp"
#include "gadv/net.hpp"
#include "gadv/train.hpp"
#include "toy_fixture.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gadv;

namespace {

Net identity_net(int dim) {
  DenseLayer<double> l{Matrix::Identity(dim, dim), Vector::Zero(dim), Activation::identity};
  std::vector<std::string> names;
  for (int i = 0; i < dim; ++i) names.push_back("c" + std::to_string(i));
  return Net(dim, {l}, names);
}

Net zero_net(int dim, int classes) {
  DenseLayer<double> l{Matrix::Zero(classes, dim), Vector::Zero(classes),
                       Activation::identity};
  std::vector<std::string> names(std::size_t(classes), "c");
  return Net(dim, {l}, names);
}

Net random_net(Rng& rng, int dim, int depth, int width, int classes) {
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  std::vector<DenseLayer<double>> layers;
  int in = dim;
  for (int k = 0; k < depth; ++k) {
    const int out = k + 1 == depth ? classes : width;
    DenseLayer<double> l;
    l.weights = Matrix::NullaryExpr(out, in, [&] { return w(rng); });
    l.bias = Vector::NullaryExpr(out, [&] { return 0.3 * w(rng); });
    l.activation = k + 1 == depth ? Activation::identity : Activation::relu;
    layers.push_back(std::move(l));
    in = out;
  }
  return Net(dim, std::move(layers), std::vector<std::string>(std::size_t(classes), "c"));
}

// Softmax CE written out directly, used as an oracle for the linear case.
Vector softmax_ref(const Vector& z) {
  Vector e(z.size());
  double s = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += e[i] = std::exp(z[i]);
  return e / s;
}

}  // namespace

TEST(Forward, IdentityLayerPassesInputThrough) {
  const Net net = identity_net(2);
  const Vector z = logits(net, Vector{{0.3, 0.7}});
  EXPECT_DOUBLE_EQ(z[0], 0.3);
  EXPECT_DOUBLE_EQ(z[1], 0.7);
}

TEST(Forward, ZeroWeightsGiveUniformProbabilities) {
  const Net net = zero_net(3, 5);
  const auto t = forward(net, Vector{{0.2, 0.9, 0.4}});
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(t.probabilities[i], 0.2, 1e-15);
}

TEST(Forward, TwoLayerReluByHand) {
  DenseLayer<double> l1;
  l1.weights = Matrix{{1.0, -1.0}, {2.0, 0.5}, {-1.0, 1.0}};
  l1.bias = Vector{{0.1, -0.2, 0.3}};
  l1.activation = Activation::relu;
  DenseLayer<double> l2;
  l2.weights = Matrix{{1.0, 0.0, 2.0}, {-1.0, 1.0, 1.0}};
  l2.bias = Vector{{0.0, 0.5}};
  const Net net(2, {l1, l2}, {"a", "b"});
  // hidden pre-activation (1.1, 1.8, -0.7) -> relu (1.1, 1.8, 0)
  // logits (1.1, -1.1 + 1.8 + 0.5) = (1.1, 1.2)
  const Vector z = logits(net, Vector{{1.0, 0.0}});
  EXPECT_NEAR(z[0], 1.1, 1e-15);
  EXPECT_NEAR(z[1], 1.2, 1e-15);
  EXPECT_EQ(predict_class(net, Vector{{1.0, 0.0}}), 1);
}

TEST(Forward, RejectsBadInput) {
  const Net net = identity_net(2);
  try {
    logits(net, Vector{{0.1, 0.2, 0.3}});
    FAIL() << "expected a shape error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "shape");
  }
  try {
    logits(net, Vector{{0.1, std::nan("")}});
    FAIL() << "expected a non-finite error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "non_finite");
  }
}

TEST(PredictClass, TiesGoToLowestIndex) {
  EXPECT_EQ(predict_class(zero_net(2, 4), Vector{{0.5, 0.5}}), 0);
  EXPECT_EQ(predict_class(identity_net(2), Vector{{0.1, 0.9}}), 1);
}

TEST(PredictClass, DeepInsideUpperMoon) {
  const auto& t = fixture::toy();
  // (0, 1) in canonical moon coordinates is the apex of the class-0 arc.
  const Vector apex{{0.1 + 0.8 * (0.0 + 1.0) / 3.0, 0.1 + 0.8 * (1.0 + 0.5) / 1.5}};
  EXPECT_EQ(predict_class(t.natural, apex), 0);
  EXPECT_GE(accuracy(t.natural, t.split.train), 0.95);
}

TEST(PairLoss, ZeroWeightsGiveLogC) {
  const Net net = zero_net(2, 11);
  EXPECT_NEAR(pair_loss(net, Vector{{0.1, 0.2}}, Vector{{0.9, 0.4}}), std::log(11.0), 1e-12);
}

TEST(PairLoss, AgreementOnSaturatedNet) {
  DenseLayer<double> l{Matrix{{40.0, 0.0}, {0.0, 0.0}}, Vector{{0.0, 0.0}},
                       Activation::identity};
  const Net net(2, {l}, {"a", "b"});
  const Vector x{{0.9, 0.3}};
  ASSERT_GE(forward(net, x).probabilities[0], 1 - 1e-9);
  EXPECT_LE(pair_loss(net, x, x), 1e-8);
}

TEST(PairLoss, LinearClosedForm) {
  // Logits (2 x_a, 2 x_b): x1 = (1, 0) gives (2, 0); x2 = (0, 1) predicts 1.
  DenseLayer<double> l{Matrix{{2.0, 0.0}, {0.0, 2.0}}, Vector::Zero(2), Activation::identity};
  const Net net(2, {l}, {"a", "b"});
  const double loss = pair_loss(net, Vector{{1.0, 0.0}}, Vector{{0.0, 1.0}});
  EXPECT_NEAR(loss, std::log(1 + std::exp(2.0)), 1e-12);
  EXPECT_NEAR(loss, 2.1269280110429727, 1e-12);
}

TEST(PairLoss, CappedAtFloor) {
  DenseLayer<double> l{Matrix{{100.0, 0.0}, {0.0, 100.0}}, Vector::Zero(2),
                       Activation::identity};
  const Net net(2, {l}, {"a", "b"});
  const Vector x1{{1.0, 0.0}}, x2{{0.0, 1.0}};
  EXPECT_NEAR(pair_loss(net, x1, x2), -std::log(1e-12), 1e-12);
  EXPECT_TRUE(pair_loss_grad(net, x1, x2, PairArg::first).isZero(0));
}

TEST(PairLossGrad, ZeroWeightsGiveZeroGradient) {
  const Net net = zero_net(3, 4);
  const Vector a{{0.1, 0.5, 0.7}}, b{{0.3, 0.2, 0.9}};
  EXPECT_TRUE(pair_loss_grad(net, a, b, PairArg::first).isZero(0));
  EXPECT_TRUE(pair_loss_grad(net, a, b, PairArg::second).isZero(0));
}

TEST(PairLossGrad, MatchesFiniteDifferencesOnRandomNets) {
  Rng rng(2024);
  std::uniform_int_distribution<int> dim_d(1, 8), depth_d(1, 3), width_d(2, 16), cls_d(2, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = dim_d(rng);
    const Net net = random_net(rng, dim, depth_d(rng), width_d(rng), cls_d(rng));
    const Vector x1 = uniform_vector(dim, 0, 1, rng), x2 = uniform_vector(dim, 0, 1, rng);
    for (PairArg which : {PairArg::first, PairArg::second}) {
      const Vector g = pair_loss_grad(net, x1, x2, which);
      const Vector fd = finite_diff_grad(net, x1, x2, which, 1e-4);
      const double scale = std::max(fd.lpNorm<Eigen::Infinity>(), 1e-8);
      EXPECT_LT((g - fd).lpNorm<Eigen::Infinity>() / scale, 1e-4) << "trial " << trial;
    }
  }
}

TEST(PairLossGrad, LinearNetClosedForm) {
  const Matrix W{{0.5, -1.0, 2.0}, {1.5, 0.2, -0.3}, {-0.7, 0.9, 0.1}};
  const Vector b{{0.1, -0.2, 0.05}};
  const Net net(3, {{W, b, Activation::identity}}, {"a", "b", "c"});
  const Vector x1{{0.2, 0.4, 0.6}}, x2{{0.9, 0.1, 0.3}};
  const int y = predict_class(net, x2);
  Vector delta = softmax_ref(W * x1 + b);
  delta[y] -= 1;
  const Vector expected = W.transpose() * delta;
  EXPECT_LT((pair_loss_grad(net, x1, x2, PairArg::first) - expected).lpNorm<Eigen::Infinity>(),
            1e-6);
}

TEST(PairLossGrad, SecondArgumentSwapsRoles) {
  Rng rng(5);
  const Net net = random_net(rng, 4, 2, 8, 3);
  const Vector a = uniform_vector(4, 0, 1, rng), b = uniform_vector(4, 0, 1, rng);
  EXPECT_EQ(pair_loss_grad(net, a, b, PairArg::second),
            pair_loss_grad(net, b, a, PairArg::first));
}

TEST(ModelIo, RoundTripKeepsLogitsExact) {
  const auto& t = fixture::toy();
  const Net back = model_from_string(model_to_string(t.natural));
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vector x = uniform_vector(2, 0, 1, rng);
    EXPECT_EQ(logits(back, x), logits(t.natural, x));
  }
}

TEST(ModelIo, MismatchedWidthsNameTheLayer) {
  const std::string text = R"({"format_version": 1, "input_dim": 2, "class_names": ["a", "b"],
    "layers": [
      {"activation": "relu", "rows": 3, "cols": 2, "weights": [1,2,3,4,5,6], "bias": [0,0,0]},
      {"activation": "identity", "rows": 2, "cols": 4, "weights": [1,2,3,4,5,6,7,8], "bias": [0,0]}
    ]})";
  try {
    model_from_string(text);
    FAIL() << "expected a shape error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "shape");
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
  }
}

TEST(ModelIo, NanWeightIsRejected) {
  const std::string text = R"({"format_version": 1, "input_dim": 2, "class_names": ["a", "b"],
    "layers": [
      {"activation": "identity", "rows": 2, "cols": 2, "weights": [1, NaN, 0, 1], "bias": [0, 0]}
    ]})";
  EXPECT_THROW(model_from_string(text), Error);
  const std::string null_text = R"({"format_version": 1, "input_dim": 2, "class_names": ["a", "b"],
    "layers": [
      {"activation": "identity", "rows": 2, "cols": 2, "weights": [1, null, 0, 1], "bias": [0, 0]}
    ]})";
  EXPECT_THROW(model_from_string(null_text), Error);
}

TEST(Network, ConstructorValidates) {
  DenseLayer<double> l{Matrix::Identity(2, 2), Vector::Zero(3), Activation::identity};
  EXPECT_THROW(Net(2, {l}, {"a", "b"}), Error);
  DenseLayer<double> bad{Matrix::Identity(2, 2), Vector::Zero(2), Activation::identity};
  bad.weights(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Net(2, {bad}, {"a", "b"}), Error);
}

TEST(Network, FloatScalarForward) {
  DenseLayer<float> l{MatrixX<float>::Identity(2, 2), VectorX<float>::Zero(2),
                      Activation::identity};
  const Network<float> net(2, {l}, {"a", "b"});
  EXPECT_EQ(predict_class(net, VectorX<float>{{0.8f, 0.2f}}), 0);
}

TEST(Train, SeparableBlobs) {
  DataConfig dc;
  dc.kind = DataKind::blobs;
  dc.n_per_class = 100;
  dc.noise_scale = 0.05;
  dc.rng_seed = 3;
  const Dataset ds = generate(dc);
  TrainConfig tc;
  tc.epochs = 50;
  tc.rng_seed = 4;
  const Net net = train(make_mlp(2, {16}, ds.class_names, 1), ds, tc);
  EXPECT_GE(accuracy(net, ds), 0.99);
}

TEST(Train, ZeroEpochsLeavesNetworkUnchanged) {
  const auto& t = fixture::toy();
  TrainConfig tc;
  tc.epochs = 0;
  const Net out = train(t.natural, t.split.train, tc);
  for (std::size_t k = 0; k < out.layers().size(); ++k) {
    EXPECT_EQ(out.layers()[k].weights, t.natural.layers()[k].weights);
    EXPECT_EQ(out.layers()[k].bias, t.natural.layers()[k].bias);
  }
}

TEST(Train, MoonsWithMeaninglessClass) {
  const auto& t = fixture::toy();
  ASSERT_EQ(t.natural.num_classes(), 3);
  EXPECT_GE(accuracy(t.natural, t.split.train), 0.95);
}

TEST(Train, SameSeedSameWeights) {
  const auto& t = fixture::toy();
  TrainConfig tc = fixture::natural_train_config();
  tc.epochs = 20;
  const Net init = make_mlp(2, {32, 32}, t.data.class_names, 0);
  const Net a = train(init, t.split.train, tc);
  const Net b = train(init, t.split.train, tc);
  EXPECT_EQ(model_to_string(a), model_to_string(b));
}

TEST(Train, DivergenceIsReported) {
  const auto& t = fixture::toy();
  TrainConfig tc;
  tc.epochs = 50;
  tc.learning_rate = 1e300;
  try {
    train(t.natural, t.split.train, tc);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "divergence");
  }
}
