#include "gadv/global_attack.hpp"

#include <algorithm>

namespace gadv {

ExamplePair make_pair(const Net& net, Vector x1, Vector x2, int round_index) {
  ExamplePair p;
  p.class1 = predict_class(net, x1);
  p.class2 = predict_class(net, x2);
  p.loss = label_loss(net, x1, p.class2);
  p.x1 = std::move(x1);
  p.x2 = std::move(x2);
  p.round_index = round_index;
  return p;
}

std::vector<double> AttackTrace::losses() const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.loss);
  return out;
}

double AttackTrace::max_loss() const {
  double m = 0.0;
  for (const auto& p : pairs) m = std::max(m, p.loss);
  return m;
}

void GlobalAltConfig::validate() const {
  require(epsilon >= 0, "config", "epsilon must be >= 0");
  require(rounds >= 1, "config", "rounds must be >= 1");
  require(sub_steps >= 1, "config", "sub_steps must be >= 1");
  require(step_size > 0, "config", "step_size must be > 0");
  require(noise_scale >= 0, "config", "noise_scale must be >= 0");
}

Vector noisy_partner(const Vector& x, double epsilon, Rng& rng) {
  return (x + uniform_vector(x.size(), -epsilon, epsilon, rng)).cwiseMax(0.0).cwiseMin(1.0);
}

AttackTrace g_attack(const Net& net, const Vector& x1, const Vector& x2,
                     const GlobalAltConfig& cfg) {
  Rng rng(cfg.rng_seed);
  return g_attack(net, x1, x2, cfg, rng);
}

AttackTrace g_attack(const Net& net, const Vector& x1_start,
                     const Vector& x2_start, const GlobalAltConfig& cfg,
                     Rng& rng) {
  cfg.validate();
  require(x1_start.size() == net.input_dim() && x2_start.size() == net.input_dim(),
          "shape", "g_attack: start pair dimension mismatch");
  require(in_unit_box(x1_start) && in_unit_box(x2_start), "domain",
          "g_attack: start pair outside [0,1]^D");
  require((x1_start - x2_start).lpNorm<Eigen::Infinity>() <= cfg.epsilon + 1e-12,
          "domain", "g_attack: start pair is farther apart than epsilon");

  int steps = cfg.sub_steps;
  double a = cfg.step_size;
  if (cfg.method == GlobalMethod::g_fgsm) {
    steps = 1;
    a = cfg.epsilon;
  }
  const bool noisy = cfg.method == GlobalMethod::g_pgd;
  const double r = cfg.noise_scale * cfg.epsilon;

  // Moves `x` against `partner`'s predicted class inside the ball around it.
  auto sub_attack = [&](Vector x, const Vector& partner) {
    const Region region{partner, cfg.epsilon};
    const int label = predict_class(net, partner);
    if (noisy) x = clip(x + uniform_vector(x.size(), -r, r, rng), region);
    for (int s = 0; s < steps; ++s)
      x = clip(x + a * sign(label_loss_grad(net, x, label)), region);
    return x;
  };

  AttackTrace trace;
  trace.pairs.reserve(std::size_t(cfg.rounds));
  Vector x1 = x1_start, x2 = x2_start;
  for (int i = 1; i <= cfg.rounds; ++i) {
    x1 = sub_attack(std::move(x1), x2);
    x2 = sub_attack(std::move(x2), x1);
    trace.pairs.push_back(make_pair(net, x1, x2, i));
  }
  return trace;
}

GlobalMethod parse_global_method(const std::string& s) {
  if (s == "g_fgsm") return GlobalMethod::g_fgsm;
  if (s == "g_ifgsm") return GlobalMethod::g_ifgsm;
  if (s == "g_pgd") return GlobalMethod::g_pgd;
  throw Error("config", "unknown global method '" + s + "'");
}

std::string to_string(GlobalMethod m) {
  switch (m) {
    case GlobalMethod::g_fgsm: return "g_fgsm";
    case GlobalMethod::g_ifgsm: return "g_ifgsm";
    case GlobalMethod::g_pgd: return "g_pgd";
  }
  return "?";
}

}  // namespace gadv
