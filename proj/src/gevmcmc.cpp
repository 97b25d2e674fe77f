#include "gadv/gevmcmc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace gadv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836;  // ln(2 pi)

}  // namespace

PairCD PairCD::from_pair(const Vector& x1, const Vector& x2) {
  return {0.5 * (x1 + x2), 0.5 * (x1 - x2)};
}

std::pair<Vector, Vector> PairCD::materialize() const {
  return {(center + delta).cwiseMax(0.0).cwiseMin(1.0),
          (center - delta).cwiseMax(0.0).cwiseMin(1.0)};
}

McmcConfig McmcConfig::scaled_defaults(double epsilon) {
  McmcConfig c;
  c.epsilon = epsilon;
  c.lambda_m = 1.2 * epsilon;
  c.lambda_0 = 0.3 * epsilon;
  c.p_b = 0.95;
  c.block_size = 59;
  c.warmup_step_size = epsilon / 10;
  return c;
}

void McmcConfig::validate() const {
  require(rounds >= 1, "config", "rounds must be >= 1");
  require(warmup_rounds >= 0 && warmup_rounds <= rounds, "config",
          "warmup_rounds must be in [0, rounds]");
  require(block_size >= 1, "config", "block_size must be >= 1");
  require(top_k >= 2, "config", "top_k must be >= 2");
  require(epsilon >= 0, "config", "epsilon must be >= 0");
  require(lambda_0 > 0 && lambda_m >= lambda_0, "config",
          "need 0 < lambda_0 <= lambda_m");
  require(p_b >= 0.5 && p_b <= 1, "config", "p_b must be in [0.5, 1]");
  require(warmup_sub_steps >= 1 && warmup_step_size > 0, "config",
          "invalid warm-up G-PGD settings");
}

Vector normalized_gradient(const Net& net, const PairCD& pair) {
  const auto [x1, x2] = pair.materialize();
  Vector g = label_loss_grad(net, x1, predict_class(net, x2));
  const Vector raw = pair.center + pair.delta;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (raw[i] < 0.0 || raw[i] > 1.0) g[i] = 0.0;
  const double n = g.norm();
  if (n < 1e-12) return Vector::Zero(g.size());
  return g / n;
}

Vector sample_center(const Vector& prev, const Vector& g, double lambda_m,
                     double lambda_0, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(prev.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  // Written so lambda_m == lambda_0 gives prev + lambda_0 z exactly.
  const Vector step = lambda_0 * z + ((lambda_m - lambda_0) * g.dot(z)) * g;
  return (prev + step).cwiseMax(0.0).cwiseMin(1.0);
}

Vector sample_difference(const Vector& g, double epsilon, double p_b, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector d(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    double s = double((0.0 < g[i]) - (g[i] < 0.0));
    if (s == 0.0) s = unit(rng) < 0.5 ? 1.0 : -1.0;
    if (!(unit(rng) < p_b)) s = -s;
    d[i] = 0.5 * epsilon * s;
  }
  return d;
}

double proposal_logdensity(const PairCD& to, const PairCD& from,
                           const Vector& g_from, const McmcConfig& cfg) {
  require(to.center.size() == from.center.size() && g_from.size() == to.center.size(),
          "shape", "proposal_logdensity: dimension mismatch");
  const auto dim = double(to.center.size());
  const Vector d = to.center - from.center;
  const double l0 = cfg.lambda_0, lm = cfg.lambda_m;

  // Covariance has eigenvalue lm^2 along g and l0^2 on its complement.
  double gaussian;
  if (g_from.squaredNorm() == 0.0) {
    gaussian = -0.5 * d.squaredNorm() / (l0 * l0) - 0.5 * dim * (kLogTwoPi + 2 * std::log(l0));
  } else {
    const double along = g_from.dot(d);
    const double across = std::max(0.0, d.squaredNorm() - along * along);
    gaussian = -0.5 * (along * along / (lm * lm) + across / (l0 * l0)) -
               std::log(lm) - (dim - 1) * std::log(l0) - 0.5 * dim * kLogTwoPi;
  }

  const double log_match = std::log(cfg.p_b);
  const double log_miss = cfg.p_b < 1.0 ? std::log1p(-cfg.p_b) : -kInf;
  double bernoulli = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const int gs = (0.0 < g_from[i]) - (g_from[i] < 0.0);
    const int ds = (0.0 < to.delta[i]) - (to.delta[i] < 0.0);
    // A zero gradient entry, or a zero delta entry inherited from a warm-up
    // pair, carries no sign information.
    if (gs == 0 || ds == 0)
      bernoulli += -std::numbers::ln2;
    else
      bernoulli += gs == ds ? log_match : log_miss;
  }
  return gaussian + bernoulli;
}

Acceptance acceptance_ratio(const McmcState& state, const PairCD& candidate,
                            double candidate_loss, const Vector& candidate_gradient,
                            const McmcConfig& cfg) {
  auto target = [&](double loss) {
    return cfg.log_target ? cfg.log_target(loss) : gev_logpdf(state.gev, loss);
  };
  const double lt_cand = target(candidate_loss);
  const double lt_prev = target(state.current_loss);
  if (lt_cand == -kInf && lt_prev == -kInf)
    return {candidate_loss > state.current_loss ? 1.0 : 0.0, true};
  if (lt_prev == -kInf) return {1.0, false};
  if (lt_cand == -kInf) return {0.0, false};

  const double forward = proposal_logdensity(candidate, state.current, state.gradient, cfg);
  const double reverse = proposal_logdensity(state.current, candidate, candidate_gradient, cfg);
  const double log_ratio = lt_cand + reverse - lt_prev - forward;
  if (std::isnan(log_ratio)) return {0.0, false};
  return {log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio), false};
}

GevMcmcChain::GevMcmcChain(const Net& net, const Vector& x1, const Vector& x2,
                           McmcConfig cfg)
    : net_(net), cfg_(std::move(cfg)), rng_(cfg_.rng_seed) {
  cfg_.validate();
  require(x1.size() == net.input_dim() && x2.size() == net.input_dim(), "shape",
          "gevmcmc: start pair dimension mismatch");
  require(in_unit_box(x1) && in_unit_box(x2), "domain",
          "gevmcmc: start pair outside [0,1]^D");
  require((x1 - x2).lpNorm<Eigen::Infinity>() <= cfg_.epsilon + 1e-12, "domain",
          "gevmcmc: start pair is farther apart than epsilon");

  Vector a = x1, b = x2;
  if (cfg_.warmup_rounds > 0) {
    GlobalAltConfig warm;
    warm.method = GlobalMethod::g_pgd;
    warm.epsilon = cfg_.epsilon;
    warm.rounds = cfg_.warmup_rounds;
    warm.sub_steps = cfg_.warmup_sub_steps;
    warm.step_size = cfg_.warmup_step_size;
    warm.rng_seed = cfg_.rng_seed;
    trace_ = g_attack(net_, a, b, warm, rng_);
    a = trace_.pairs.back().x1;
    b = trace_.pairs.back().x2;
    for (const auto& p : trace_.pairs) record_loss(p.loss);
  }
  state_.round = cfg_.warmup_rounds;
  state_.current = PairCD::from_pair(a, b);
  state_.current_loss = pair_loss(net_, a, b);
  state_.x1 = std::move(a);
  state_.x2 = std::move(b);
  state_.gradient = cfg_.use_gradient ? normalized_gradient(net_, state_.current)
                                      : Vector::Zero(net_.input_dim());
  if (cfg_.warmup_rounds == 0) record_loss(state_.current_loss);

  // Provisional target until the history holds top_k losses.
  const auto& h = state_.loss_history;
  double mean = 0.0;
  for (double l : h) mean += l;
  mean /= double(h.size());
  state_.gev = {mean, 1.0, 0.0};
  if (h.size() >= 2) {
    try {
      state_.gev = gev_moment_init(h);
    } catch (const Error&) {
    }
  }
}

void GevMcmcChain::record_loss(double loss) {
  state_.loss_history.push_back(loss);
  auto& top = state_.top_k_losses;
  if (top.size() < std::size_t(cfg_.top_k) || loss > top.back()) {
    top.insert(std::upper_bound(top.begin(), top.end(), loss, std::greater<>()), loss);
    if (top.size() > std::size_t(cfg_.top_k)) top.pop_back();
  }
}

void GevMcmcChain::refit() {
  if (state_.loss_history.size() < std::size_t(cfg_.top_k)) return;
  const GevFit fit = gev_fit_mle(state_.top_k_losses);
  state_.gev = fit.params;
  state_.gev_fitted = true;
}

void GevMcmcChain::step() {
  if (done()) return;
  const Eigen::Index dim = net_.input_dim();

  // Block of B proposals from one sequential stream; keep the first argmax.
  PairCD best;
  double best_loss = -kInf;
  for (int b = 0; b < cfg_.block_size; ++b) {
    PairCD cand{sample_center(state_.current.center, state_.gradient, cfg_.lambda_m,
                              cfg_.lambda_0, rng_),
                sample_difference(state_.gradient, cfg_.epsilon, cfg_.p_b, rng_)};
    const auto [x1, x2] = cand.materialize();
    const double loss = pair_loss(net_, x1, x2);
    record_loss(loss);
    if (loss > best_loss) {
      best_loss = loss;
      best = std::move(cand);
    }
  }

  bool fit_failed = false;
  try {
    refit();
  } catch (const Error&) {
    fit_failed = true;  // keep the previous parameters
  }

  const Vector best_gradient =
      cfg_.use_gradient ? normalized_gradient(net_, best) : Vector::Zero(dim);
  const Acceptance acc = acceptance_ratio(state_, best, best_loss, best_gradient, cfg_);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool accept = unit(rng_) <= acc.probability;
  if (accept) {
    auto [x1, x2] = best.materialize();
    state_.current = std::move(best);
    state_.x1 = std::move(x1);
    state_.x2 = std::move(x2);
    state_.current_loss = best_loss;
    state_.gradient = best_gradient;
    ++state_.accept_count;
  }
  ++state_.round;
  trace_.pairs.push_back(make_pair(net_, state_.x1, state_.x2, state_.round));
  trace_.accepted.push_back(accept);
  trace_.gev_fit_failed.push_back(fit_failed);
  trace_.acceptance_fallback.push_back(acc.fallback);
}

AttackTrace run_gevmcmc(const Net& net, const Vector& x1, const Vector& x2,
                        const McmcConfig& cfg) {
  GevMcmcChain chain(net, x1, x2, cfg);
  while (!chain.done()) chain.step();
  return chain.take_trace();
}

}  // namespace gadv
