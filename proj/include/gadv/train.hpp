#pragma once

#include "gadv/data.hpp"
#include "gadv/net.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gadv {

/// Local PGD adversarial training settings. `mix_ratio` is the weight of the
/// adversarial loss relative to the clean loss (1 means 1:1).
struct AdversarialTraining {
  int pgd_steps = 30;
  double step_size = 0.01;
  double epsilon = 0.1;
  double mix_ratio = 1.0;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t rng_seed = 0;
  std::optional<AdversarialTraining> adversarial;

  void validate() const;
};

/// Fully connected relu network `input_dim -> hidden... -> classes` with
/// seeded He-uniform weights and zero biases. The last layer is linear.
Net make_mlp(Eigen::Index input_dim, const std::vector<int>& hidden,
             std::vector<std::string> class_names, std::uint64_t seed);

/// Minibatch SGD on softmax cross-entropy. With `cfg.adversarial` set, each
/// epoch first attacks every training row with PGD against the current
/// model and then trains on clean and adversarial batches together.
Net train(Net net, const Dataset& ds, const TrainConfig& cfg);

double accuracy(const Net& net, const Dataset& ds);

}  // namespace gadv
