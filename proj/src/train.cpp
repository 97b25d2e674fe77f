#include "gadv/train.hpp"

#include "gadv/local_attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gadv {

namespace {

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> bias;

  explicit Gradients(const Net& net) {
    for (const auto& l : net.layers()) {
      weights.push_back(Matrix::Zero(l.out(), l.in()));
      bias.push_back(Vector::Zero(l.out()));
    }
  }
};

// Accumulates scale * d CE(x, y) / d params into g and returns the loss.
double accumulate(const Net& net, const Vector& x, int y, double scale,
                  Gradients& g) {
  const auto t = forward(net, x);
  const double loss = label_loss(net, x, y);
  Vector delta = t.probabilities;
  delta[y] = 0.0;
  delta[y] = -delta.sum();
  const auto& layers = net.layers();
  for (std::size_t k = layers.size(); k-- > 0;) {
    if (layers[k].activation == Activation::relu)
      delta = (t.pre_activations[k].array() > 0.0).select(delta, 0.0);
    const Vector& input = k == 0 ? x : t.post_activations[k - 1];
    g.weights[k].noalias() += scale * delta * input.transpose();
    g.bias[k] += scale * delta;
    if (k > 0) delta = layers[k].weights.transpose() * delta;
  }
  return loss;
}

}  // namespace

void TrainConfig::validate() const {
  require(epochs >= 0, "config", "epochs must be >= 0");
  require(batch_size >= 1, "config", "batch_size must be >= 1");
  require(learning_rate > 0, "config", "learning_rate must be > 0");
  if (adversarial) {
    require(adversarial->pgd_steps >= 1, "config", "pgd_steps must be >= 1");
    require(adversarial->step_size > 0, "config", "adversarial step_size must be > 0");
    require(adversarial->epsilon >= 0, "config", "adversarial epsilon must be >= 0");
    require(adversarial->mix_ratio > 0 && std::isfinite(adversarial->mix_ratio),
            "config", "mix_ratio must be in (0, inf)");
  }
}

Net make_mlp(Eigen::Index input_dim, const std::vector<int>& hidden,
             std::vector<std::string> class_names, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DenseLayer<double>> layers;
  Eigen::Index in = input_dim;
  std::vector<Eigen::Index> widths(hidden.begin(), hidden.end());
  widths.push_back(Eigen::Index(class_names.size()));
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const double bound = std::sqrt(6.0 / double(in));
    DenseLayer<double> l;
    l.weights.resize(widths[i], in);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index k = 0; k < l.weights.size(); ++k) l.weights.data()[k] = u(rng);
    l.bias = Vector::Zero(widths[i]);
    l.activation = i + 1 < widths.size() ? Activation::relu : Activation::identity;
    layers.push_back(std::move(l));
    in = widths[i];
  }
  return Net(input_dim, std::move(layers), std::move(class_names));
}

Net train(Net net, const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.epochs == 0) return net;
  require(ds.size() > 0, "data", "training set is empty");
  require(ds.dim() == net.input_dim(), "shape", "dataset dimension does not match network");
  for (int y : ds.labels)
    require(y >= 0 && y < net.num_classes(), "label", "label exceeds class count");

  Rng rng(cfg.rng_seed);
  const auto n = std::size_t(ds.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t(0));

  std::vector<Vector> clean(n), adv;
  for (std::size_t i = 0; i < n; ++i) clean[i] = ds.input(Eigen::Index(i));

  double w_clean = 1.0, w_adv = 0.0;
  if (cfg.adversarial) {
    w_clean = 1.0 / (1.0 + cfg.adversarial->mix_ratio);
    w_adv = cfg.adversarial->mix_ratio / (1.0 + cfg.adversarial->mix_ratio);
    adv.resize(n);
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.adversarial) {
      // Adversarial rows come from the model as it stood after last epoch.
      LocalAttackConfig pgd;
      pgd.method = LocalMethod::pgd;
      pgd.epsilon = cfg.adversarial->epsilon;
      pgd.steps = cfg.adversarial->pgd_steps;
      pgd.step_size = cfg.adversarial->step_size;
      for (std::size_t i = 0; i < n; ++i)
        adv[i] = local_attack(net, clean[i], ds.labels[i], pgd, rng);
    }
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += std::size_t(cfg.batch_size)) {
      const std::size_t stop = std::min(n, start + std::size_t(cfg.batch_size));
      const double scale = 1.0 / double(stop - start);
      Gradients g(net);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        epoch_loss += w_clean * accumulate(net, clean[i], ds.labels[i], w_clean * scale, g);
        if (cfg.adversarial)
          epoch_loss += w_adv * accumulate(net, adv[i], ds.labels[i], w_adv * scale, g);
      }
      auto& layers = net.mutable_layers();
      for (std::size_t k = 0; k < layers.size(); ++k) {
        layers[k].weights -= cfg.learning_rate * g.weights[k];
        layers[k].bias -= cfg.learning_rate * g.bias[k];
      }
    }
    require(std::isfinite(epoch_loss), "divergence",
            "training diverged at epoch " + std::to_string(epoch) +
                ": loss is not finite (lower the learning rate)");
  }
  net.validate();
  return net;
}

double accuracy(const Net& net, const Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < ds.size(); ++i)
    hits += predict_class(net, ds.input(i)) == ds.labels[std::size_t(i)];
  return double(hits) / double(ds.size());
}

}  // namespace gadv
