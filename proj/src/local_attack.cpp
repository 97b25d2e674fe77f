#include "gadv/local_attack.hpp"

namespace gadv {

void LocalAttackConfig::validate() const {
  require(epsilon >= 0, "config", "epsilon must be >= 0");
  require(steps >= 1, "config", "steps must be >= 1");
  require(step_size > 0, "config", "step_size must be > 0");
  require(noise_scale >= 0, "config", "noise_scale must be >= 0");
}

Vector local_attack(const Net& net, const Vector& x, int label,
                    const LocalAttackConfig& cfg) {
  Rng rng(cfg.rng_seed);
  return local_attack(net, x, label, cfg, rng);
}

Vector local_attack(const Net& net, const Vector& x, int label,
                    const LocalAttackConfig& cfg, Rng& rng) {
  cfg.validate();
  require(x.size() == net.input_dim(), "shape", "local_attack: dimension mismatch");
  const Region region{x, cfg.epsilon};

  int steps = cfg.steps;
  double a = cfg.step_size;
  if (cfg.method == LocalMethod::fgsm) {
    steps = 1;
    a = cfg.epsilon;
  }

  Vector adv = x;
  if (cfg.method == LocalMethod::pgd) {
    const double r = cfg.noise_scale * cfg.epsilon;
    adv = clip(x + uniform_vector(x.size(), -r, r, rng), region);
  }
  for (int s = 0; s < steps; ++s)
    adv = clip(adv + a * sign(label_loss_grad(net, adv, label)), region);
  return adv;
}

LocalMethod parse_local_method(const std::string& s) {
  if (s == "fgsm" || s == "l_fgsm") return LocalMethod::fgsm;
  if (s == "ifgsm" || s == "l_ifgsm") return LocalMethod::ifgsm;
  if (s == "pgd" || s == "l_pgd") return LocalMethod::pgd;
  throw Error("config", "unknown local method '" + s + "'");
}

std::string to_string(LocalMethod m) {
  switch (m) {
    case LocalMethod::fgsm: return "l_fgsm";
    case LocalMethod::ifgsm: return "l_ifgsm";
    case LocalMethod::pgd: return "l_pgd";
  }
  return "?";
}

}  // namespace gadv
