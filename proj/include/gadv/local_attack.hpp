#pragma once

#include "gadv/net.hpp"

#include <cstdint>
#include <string>

namespace gadv {

/// l-infinity ball of radius `epsilon` around `center`.
struct Region {
  Vector center;
  double epsilon = 0.0;
};

/// Per-coordinate clamp into [max(0, c_i - eps), min(1, c_i + eps)], i.e. onto
/// the region intersected with the unit box. Idempotent.
template <typename D>
Vector clip(const Eigen::MatrixBase<D>& x, const Region& r) {
  require(x.size() == r.center.size(), "shape", "clip: dimension mismatch");
  const Vector lo = (r.center.array() - r.epsilon).cwiseMax(0.0);
  const Vector hi = (r.center.array() + r.epsilon).cwiseMin(1.0);
  return x.cwiseMax(lo).cwiseMin(hi);
}

enum class LocalMethod { fgsm, ifgsm, pgd };

struct LocalAttackConfig {
  LocalMethod method = LocalMethod::pgd;
  double epsilon = 0.1;
  int steps = 30;
  double step_size = 0.01;
  std::uint64_t rng_seed = 0;
  // Multiplies the PGD random start; 0 turns PGD into IFGSM.
  double noise_scale = 1.0;

  void validate() const;
};

/// Signed-gradient ascent on label_loss(x', y) inside the epsilon ball around
/// x. fgsm ignores steps/step_size and takes one step of size epsilon.
Vector local_attack(const Net& net, const Vector& x, int label,
                    const LocalAttackConfig& cfg);

/// Same as above with a caller-owned random stream.
Vector local_attack(const Net& net, const Vector& x, int label,
                    const LocalAttackConfig& cfg, Rng& rng);

LocalMethod parse_local_method(const std::string& s);
std::string to_string(LocalMethod m);

}  // namespace gadv
