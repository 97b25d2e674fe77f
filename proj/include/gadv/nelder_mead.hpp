#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace gadv {

template <typename Scalar, int Dim>
struct NelderMeadResult {
  Eigen::Matrix<Scalar, Dim, 1> x;
  Scalar value;
  int iterations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int max_iterations = 500;
  double tolerance = 1e-10;
};

/// Minimizes `f` with the standard reflect/expand/contract/shrink simplex
/// moves. The initial simplex is `start` plus one vertex per axis offset by
/// `steps`. `f` may return +inf to mark infeasible points. Converged when the
/// spread of function values over the simplex drops below
/// tolerance * (1 + |f_best|).
template <int Dim, typename Scalar, typename F>
NelderMeadResult<Scalar, Dim> nelder_mead(
    F&& f, const Eigen::Matrix<Scalar, Dim, 1>& start,
    const Eigen::Matrix<Scalar, Dim, 1>& steps,
    const NelderMeadOptions& opt = {}) {
  using Point = Eigen::Matrix<Scalar, Dim, 1>;
  constexpr int N = Dim + 1;
  std::array<Point, N> v;
  std::array<Scalar, N> fv;
  v[0] = start;
  for (int i = 0; i < Dim; ++i) {
    v[i + 1] = start;
    v[i + 1][i] += steps[i];
  }
  for (int i = 0; i < N; ++i) fv[i] = f(v[i]);

  std::array<int, N> idx;
  auto order = [&] {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return fv[a] < fv[b]; });
  };

  NelderMeadResult<Scalar, Dim> res;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    order();
    const int best = idx[0], worst = idx[N - 1], second = idx[N - 2];
    if (std::isfinite(fv[worst]) &&
        fv[worst] - fv[best] <= Scalar(opt.tolerance) * (1 + std::abs(fv[best]))) {
      res.converged = true;
      break;
    }
    Point centroid = Point::Zero();
    for (int k = 0; k < N - 1; ++k) centroid += v[idx[k]];
    centroid /= Scalar(Dim);

    const Point xr = centroid + (centroid - v[worst]);
    const Scalar fr = f(xr);
    if (fr < fv[best]) {
      const Point xe = centroid + Scalar(2) * (centroid - v[worst]);
      const Scalar fe = f(xe);
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    // Contraction, outside if the reflection improved on the worst point.
    const bool outside = fr < fv[worst];
    const Point xc = outside ? Point(centroid + Scalar(0.5) * (xr - centroid))
                             : Point(centroid + Scalar(0.5) * (v[worst] - centroid));
    const Scalar fc = f(xc);
    if (fc < (outside ? fr : fv[worst])) {
      v[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (int k = 1; k < N; ++k) {
      const int j = idx[k];
      v[j] = v[best] + Scalar(0.5) * (v[j] - v[best]);
      fv[j] = f(v[j]);
    }
  }
  order();
  res.x = v[idx[0]];
  res.value = fv[idx[0]];
  res.iterations = it;
  return res;
}

}  // namespace gadv
