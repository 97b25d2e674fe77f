#pragma once

#include <optional>
#include <span>
#include <vector>

namespace gadv {

/// Generalized extreme value distribution: location mu, scale sigma > 0 and
/// shape xi (xi > 0 Frechet, xi = 0 Gumbel, xi < 0 reverse Weibull).
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;

  bool valid() const;
};

// |xi| below this uses the Gumbel formulas.
inline constexpr double kGumbelThreshold = 1e-8;

double gev_cdf(const GevParams& p, double l);
double gev_pdf(const GevParams& p, double l);
/// log pdf; -inf outside the support.
double gev_logpdf(const GevParams& p, double l);
double gev_loglik(const GevParams& p, std::span<const double> samples);

/// Inverse CDF for u in (0, 1).
double gev_quantile(const GevParams& p, double u);

/// Gumbel moment start: sigma = sqrt(6) sd / pi, mu = mean - 0.5772 sigma.
GevParams gev_moment_init(std::span<const double> samples);

struct GevFit {
  GevParams params;
  double loglik = 0.0;
  double init_loglik = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Maximum likelihood by Nelder-Mead over (mu, log sigma, xi), 500 iterations
/// and 1e-10 tolerance. Needs at least 5 samples with nonzero variance.
/// Returns the best point found even if the simplex did not converge.
GevFit gev_fit_mle(std::span<const double> samples,
                   std::optional<GevParams> init = std::nullopt);

}  // namespace gadv
