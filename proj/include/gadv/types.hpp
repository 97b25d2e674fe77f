#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace gadv {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

// One engine everywhere so seeded runs reproduce bit-for-bit.
using Rng = std::mt19937_64;

/// Raised for malformed inputs: bad shapes, non-finite values, invalid
/// configuration, unparsable files. `kind()` is a short machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

inline void require(bool ok, const char* kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}

// Componentwise sign with sign(0) = 0.
template <typename Derived>
auto sign(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  return v.unaryExpr([](S x) { return S((S(0) < x) - (x < S(0))); });
}

template <typename Derived>
bool in_unit_box(const Eigen::MatrixBase<Derived>& x) {
  return (x.array() >= 0).all() && (x.array() <= 1).all();
}

inline Vector uniform_vector(Eigen::Index n, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace gadv
