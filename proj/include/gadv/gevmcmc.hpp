#pragma once

#include "gadv/gev.hpp"
#include "gadv/global_attack.hpp"
#include "gadv/net.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace gadv {

/// Example pair stored as center and half-difference: x1 = center + delta,
/// x2 = center - delta. Proposed pairs have |delta_i| = epsilon / 2.
struct PairCD {
  Vector center;
  Vector delta;

  static PairCD from_pair(const Vector& x1, const Vector& x2);
  /// (x1, x2) clamped into the unit box.
  std::pair<Vector, Vector> materialize() const;
};

struct McmcConfig {
  int rounds = 100;
  int warmup_rounds = 10;
  int block_size = 59;
  int top_k = 50;
  double epsilon = 0.1;
  double lambda_m = 0.12;
  double lambda_0 = 0.03;
  double p_b = 0.95;
  // G-PGD settings used for the warm-up rounds.
  int warmup_sub_steps = 30;
  double warmup_step_size = 0.01;
  std::uint64_t rng_seed = 0;

  // When false the proposal ignores the gradient (g = 0).
  bool use_gradient = true;
  // Replaces the fitted GEV log-density as the target when set.
  std::function<double(double)> log_target;

  /// Scales the proposal by epsilon: lambda_m = 1.2 eps, lambda_0 = 0.3 eps,
  /// p_b = 0.95, B = 59, warm-up step eps / 10.
  static McmcConfig scaled_defaults(double epsilon);

  void validate() const;
};

/// Unit-norm gradient of pair_loss(center + delta, center - delta) in the
/// center, or zero when the raw gradient norm is below 1e-12. The hard label
/// taken from x2 carries no gradient, and coordinates pinned by the box clamp
/// contribute nothing.
Vector normalized_gradient(const Net& net, const PairCD& pair);

/// Draws prev + lambda_0 z + (lambda_m - lambda_0) (g.z) g with z standard
/// normal, i.e. covariance lambda_0^2 I + (lambda_m^2 - lambda_0^2) g g^T,
/// then clamps into the unit box.
Vector sample_center(const Vector& prev, const Vector& g, double lambda_m,
                     double lambda_0, Rng& rng);

/// delta_i = +-(eps/2) sign(g_i), agreeing with sign(g_i) with probability
/// p_b. Where g_i = 0 the sign is a fair coin.
Vector sample_difference(const Vector& g, double epsilon, double p_b, Rng& rng);

/// log q(to | from): Gaussian center term around from.center with gradient
/// g_from plus the Bernoulli sign term for to.delta.
double proposal_logdensity(const PairCD& to, const PairCD& from,
                           const Vector& g_from, const McmcConfig& cfg);

struct McmcState {
  PairCD current;
  Vector x1, x2;  // materialized current pair
  double current_loss = 0.0;
  Vector gradient;  // normalized gradient at current
  std::vector<double> loss_history;
  std::vector<double> top_k_losses;  // descending
  GevParams gev;
  bool gev_fitted = false;
  int accept_count = 0;
  int round = 0;
};

struct Acceptance {
  double probability = 0.0;
  // Both target densities were zero; decided by comparing losses instead.
  bool fallback = false;
};

/// min{1, exp(log p(cand) + log q(prev | cand) - log p(prev) - log q(cand | prev))}
/// evaluated in log space. `candidate_gradient` is the normalized gradient at
/// the candidate, used for the reverse proposal.
Acceptance acceptance_ratio(const McmcState& state, const PairCD& candidate,
                            double candidate_loss, const Vector& candidate_gradient,
                            const McmcConfig& cfg);

/// Extreme-value-guided Metropolis-Hastings over example pairs. Construction
/// runs the G-PGD warm-up; each step() performs one MCMC round.
class GevMcmcChain {
 public:
  GevMcmcChain(const Net& net, const Vector& x1, const Vector& x2,
               McmcConfig cfg);

  bool done() const { return state_.round >= cfg_.rounds; }
  void step();

  const McmcState& state() const { return state_; }
  const AttackTrace& trace() const { return trace_; }
  AttackTrace take_trace() { return std::move(trace_); }

 private:
  void record_loss(double loss);
  void refit();

  const Net& net_;
  McmcConfig cfg_;
  Rng rng_;
  McmcState state_;
  AttackTrace trace_;
};

AttackTrace run_gevmcmc(const Net& net, const Vector& x1, const Vector& x2,
                        const McmcConfig& cfg);

}  // namespace gadv
