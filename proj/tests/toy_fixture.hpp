#pragma once

// Seeded two-moons + meaningless fixture shared by the unit and acceptance
// tests. Settings are pinned; changing any of them changes every number the
// tests compare against.

#include "gadv/data.hpp"
#include "gadv/train.hpp"

namespace gadv::fixture {

inline DataConfig toy_data_config() {
  DataConfig c;
  c.kind = DataKind::two_moons;
  c.n_per_class = 250;
  c.noise_scale = 0.05;
  c.meaningless_fraction = 0.1;
  c.rng_seed = 1;
  c.dim = 2;
  return c;
}

inline constexpr double kTestFraction = 0.2;
inline constexpr std::uint64_t kSplitSeed = 7;

inline TrainConfig natural_train_config() {
  TrainConfig t;
  t.epochs = 300;
  t.batch_size = 16;
  t.learning_rate = 0.3;
  t.rng_seed = 1;
  return t;
}

// Fine-tunes the natural model with 30-step PGD at eps = 0.1.
inline TrainConfig adversarial_train_config() {
  TrainConfig t;
  t.epochs = 200;
  t.batch_size = 16;
  t.learning_rate = 0.1;
  t.rng_seed = 2;
  t.adversarial = AdversarialTraining{};
  return t;
}

struct Toy {
  Dataset data;
  Split split;
  Net natural;
  Net adversarial;
};

inline Toy build_toy() {
  Dataset data = generate(toy_data_config());
  Split split = train_test_split(data, kTestFraction, kSplitSeed);
  Net nat = train(make_mlp(2, {32, 32}, data.class_names, 0), split.train,
                  natural_train_config());
  Net adv = train(nat, split.train, adversarial_train_config());
  return {std::move(data), std::move(split), std::move(nat), std::move(adv)};
}

// Built once per process.
inline const Toy& toy() {
  static const Toy t = build_toy();
  return t;
}

}  // namespace gadv::fixture
