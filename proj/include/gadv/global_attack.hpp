#pragma once

#include "gadv/local_attack.hpp"
#include "gadv/net.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gadv {

/// One generated pair with its predictions and pair loss.
struct ExamplePair {
  Vector x1, x2;
  double loss = 0.0;
  int class1 = 0, class2 = 0;
  int round_index = 0;

  bool success() const { return class1 != class2; }
};

ExamplePair make_pair(const Net& net, Vector x1, Vector x2, int round_index);

/// The set T of pairs produced by a global attack, one entry per round.
struct AttackTrace {
  std::vector<ExamplePair> pairs;
  // GEVMCMC bookkeeping, one entry per MCMC round (empty for other methods).
  std::vector<bool> accepted;
  std::vector<bool> gev_fit_failed;
  std::vector<bool> acceptance_fallback;

  std::vector<double> losses() const;
  double max_loss() const;
};

enum class GlobalMethod { g_fgsm, g_ifgsm, g_pgd };

struct GlobalAltConfig {
  GlobalMethod method = GlobalMethod::g_pgd;
  double epsilon = 0.1;
  int rounds = 100;
  int sub_steps = 30;
  double step_size = 0.01;
  std::uint64_t rng_seed = 0;
  // Multiplies the per-round uniform noise of g_pgd.
  double noise_scale = 1.0;

  void validate() const;
};

/// Alternating-gradient global attack. Each round attacks x1 inside the
/// epsilon ball around x2 using x2's predicted class as the label, then
/// attacks x2 inside the ball around the updated x1, and records the pair.
AttackTrace g_attack(const Net& net, const Vector& x1, const Vector& x2,
                     const GlobalAltConfig& cfg);
AttackTrace g_attack(const Net& net, const Vector& x1, const Vector& x2,
                     const GlobalAltConfig& cfg, Rng& rng);

/// Partner for a single start image: clip(x + U[-eps, eps]^D) into the box.
Vector noisy_partner(const Vector& x, double epsilon, Rng& rng);

GlobalMethod parse_global_method(const std::string& s);
std::string to_string(GlobalMethod m);

}  // namespace gadv
