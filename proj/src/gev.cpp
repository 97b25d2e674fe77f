#include "gadv/gev.hpp"

#include "gadv/nelder_mead.hpp"
#include "gadv/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace gadv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool gumbel(double xi) { return std::abs(xi) < kGumbelThreshold; }

}  // namespace

bool GevParams::valid() const {
  return std::isfinite(mu) && std::isfinite(sigma) && std::isfinite(xi) && sigma > 0;
}

double gev_cdf(const GevParams& p, double l) {
  const double z = (l - p.mu) / p.sigma;
  if (gumbel(p.xi)) return std::exp(-std::exp(-z));
  const double s = 1.0 + p.xi * z;
  if (s <= 0) return p.xi > 0 ? 0.0 : 1.0;
  return std::exp(-std::pow(s, -1.0 / p.xi));
}

double gev_logpdf(const GevParams& p, double l) {
  const double z = (l - p.mu) / p.sigma;
  if (gumbel(p.xi)) return -std::log(p.sigma) - z - std::exp(-z);
  const double s = 1.0 + p.xi * z;
  if (s <= 0) return -kInf;
  const double log_s = std::log(s);
  return -std::log(p.sigma) - (1.0 + 1.0 / p.xi) * log_s - std::exp(-log_s / p.xi);
}

double gev_pdf(const GevParams& p, double l) { return std::exp(gev_logpdf(p, l)); }

double gev_loglik(const GevParams& p, std::span<const double> samples) {
  double sum = 0.0;
  for (double x : samples) {
    const double lp = gev_logpdf(p, x);
    if (!std::isfinite(lp)) return -kInf;
    sum += lp;
  }
  return sum;
}

double gev_quantile(const GevParams& p, double u) {
  const double w = -std::log(u);
  if (gumbel(p.xi)) return p.mu - p.sigma * std::log(w);
  return p.mu + p.sigma * (std::pow(w, -p.xi) - 1.0) / p.xi;
}

GevParams gev_moment_init(std::span<const double> samples) {
  require(samples.size() >= 2, "gev", "moment init needs at least 2 samples");
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= double(samples.size());
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= double(samples.size() - 1);
  require(var > 0 && std::isfinite(var), "gev", "samples have zero variance");
  const double sigma = std::sqrt(6.0 * var) / std::numbers::pi;
  return {mean - 0.5772 * sigma, sigma, 0.0};
}

GevFit gev_fit_mle(std::span<const double> samples, std::optional<GevParams> init) {
  require(samples.size() >= 5, "gev", "GEV fit needs at least 5 samples");
  for (double x : samples) require(std::isfinite(x), "gev", "non-finite sample");
  const GevParams moment = gev_moment_init(samples);
  const GevParams start = init.value_or(moment);
  require(start.valid(), "gev", "invalid initial GEV parameters");

  auto to_params = [](const Eigen::Vector3d& t) {
    return GevParams{t[0], std::exp(t[1]), t[2]};
  };
  auto objective = [&](const Eigen::Vector3d& t) {
    const double ll = gev_loglik(to_params(t), samples);
    return std::isfinite(ll) ? -ll : kInf;
  };

  const Eigen::Vector3d t0(start.mu, std::log(start.sigma), start.xi);
  const Eigen::Vector3d steps(0.5 * start.sigma, 0.3, 0.1);
  const auto nm = nelder_mead<3>(objective, t0, steps, {500, 1e-10});

  GevFit fit;
  fit.init_loglik = gev_loglik(start, samples);
  fit.iterations = nm.iterations;
  fit.converged = nm.converged;
  if (std::isfinite(nm.value) && -nm.value >= fit.init_loglik) {
    fit.params = to_params(nm.x);
    fit.loglik = -nm.value;
  } else {
    // Simplex never left the infeasible region; keep the start.
    fit.params = start;
    fit.loglik = fit.init_loglik;
    fit.converged = false;
  }
  return fit;
}

}  // namespace gadv
