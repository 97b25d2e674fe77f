#pragma once

#include "gadv/types.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace gadv {

enum class Activation { relu, identity };

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weights;  // out x in
  VectorX<Scalar> bias;     // out
  Activation activation = Activation::identity;

  Eigen::Index in() const { return weights.cols(); }
  Eigen::Index out() const { return weights.rows(); }
};

/// Dense feed-forward classifier. Immutable once constructed; every query
/// below is a pure function of the network and its arguments.
template <typename Scalar>
class Network {
 public:
  using Layer = DenseLayer<Scalar>;

  Network(Eigen::Index input_dim, std::vector<Layer> layers,
          std::vector<std::string> class_names)
      : input_dim_(input_dim),
        layers_(std::move(layers)),
        class_names_(std::move(class_names)) {
    validate();
  }

  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index num_classes() const { return Eigen::Index(class_names_.size()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  /// Re-checks the shape and finiteness invariants. Throws Error naming the
  /// first offending layer.
  void validate() const {
    require(input_dim_ > 0, "shape", "input_dim must be positive");
    require(!layers_.empty(), "shape", "network has no layers");
    require(class_names_.size() >= 2, "shape", "need at least two classes");
    Eigen::Index width = input_dim_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      const std::string tag = "layer " + std::to_string(i) + ": ";
      require(l.in() == width, "shape",
              tag + "expects input width " + std::to_string(l.in()) +
                  " but previous width is " + std::to_string(width));
      require(l.bias.size() == l.out(), "shape",
              tag + "bias length " + std::to_string(l.bias.size()) +
                  " does not match " + std::to_string(l.out()) + " rows");
      require(l.weights.allFinite() && l.bias.allFinite(), "non_finite",
              tag + "non-finite weight or bias");
      width = l.out();
    }
    require(width == num_classes(), "shape",
            "layer " + std::to_string(layers_.size() - 1) + ": output width " +
                std::to_string(width) + " does not match " +
                std::to_string(num_classes()) + " classes");
  }

 private:
  Eigen::Index input_dim_;
  std::vector<Layer> layers_;
  std::vector<std::string> class_names_;
};

using Net = Network<double>;

template <typename Scalar>
struct ForwardTrace {
  std::vector<VectorX<Scalar>> pre_activations;
  std::vector<VectorX<Scalar>> post_activations;
  VectorX<Scalar> logits;
  VectorX<Scalar> probabilities;
};

// Probability floor inside the log; caps the loss at -ln(1e-12) ~ 27.63.
inline constexpr double kProbabilityFloor = 1e-12;

template <typename Scalar>
Scalar loss_ceiling() {
  return -std::log(Scalar(kProbabilityFloor));
}

namespace detail {

template <typename Scalar, typename Derived>
void check_input(const Network<Scalar>& net,
                 const Eigen::MatrixBase<Derived>& x) {
  require(x.size() == net.input_dim(), "shape",
          "input has length " + std::to_string(x.size()) + ", network expects " +
              std::to_string(net.input_dim()));
  require(x.allFinite(), "non_finite", "input contains NaN or Inf");
}

template <typename Scalar>
VectorX<Scalar> activate(const VectorX<Scalar>& z, Activation a) {
  if (a == Activation::relu) return z.cwiseMax(Scalar(0));
  return z;
}

template <typename Scalar>
VectorX<Scalar> softmax(const VectorX<Scalar>& z) {
  VectorX<Scalar> e = (z.array() - z.maxCoeff()).exp().matrix();
  return e / e.sum();
}

}  // namespace detail

template <typename Scalar, typename Derived>
ForwardTrace<Scalar> forward(const Network<Scalar>& net,
                             const Eigen::MatrixBase<Derived>& x) {
  detail::check_input(net, x);
  ForwardTrace<Scalar> t;
  t.pre_activations.reserve(net.layers().size());
  t.post_activations.reserve(net.layers().size());
  VectorX<Scalar> a = x.template cast<Scalar>();
  for (const auto& l : net.layers()) {
    VectorX<Scalar> z = l.weights * a + l.bias;
    a = detail::activate(z, l.activation);
    t.pre_activations.push_back(std::move(z));
    t.post_activations.push_back(a);
  }
  t.logits = a;
  t.probabilities = detail::softmax(t.logits);
  return t;
}

template <typename Scalar, typename Derived>
VectorX<Scalar> logits(const Network<Scalar>& net,
                       const Eigen::MatrixBase<Derived>& x) {
  detail::check_input(net, x);
  VectorX<Scalar> a = x.template cast<Scalar>();
  for (const auto& l : net.layers())
    a = detail::activate<Scalar>(l.weights * a + l.bias, l.activation);
  return a;
}

/// Argmax of the logits; ties go to the lowest index.
template <typename Scalar>
int argmax(const VectorX<Scalar>& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = int(i);
  return best;
}

template <typename Scalar, typename Derived>
int predict_class(const Network<Scalar>& net,
                  const Eigen::MatrixBase<Derived>& x) {
  return argmax<Scalar>(logits(net, x));
}

/// Softmax cross-entropy of the prediction at `x` against a fixed label,
/// computed as logsumexp(z) - z_label and capped at loss_ceiling().
template <typename Scalar, typename Derived>
Scalar label_loss(const Network<Scalar>& net,
                  const Eigen::MatrixBase<Derived>& x, int label) {
  const VectorX<Scalar> z = logits(net, x);
  require(label >= 0 && label < z.size(), "label",
          "label " + std::to_string(label) + " out of range");
  const Scalar m = z.maxCoeff();
  const Scalar lse = m + std::log((z.array() - m).exp().sum());
  return std::min(lse - z[label], loss_ceiling<Scalar>());
}

/// Exact input gradient of label_loss. Zero where the cap is active.
template <typename Scalar, typename Derived>
VectorX<Scalar> label_loss_grad(const Network<Scalar>& net,
                                const Eigen::MatrixBase<Derived>& x,
                                int label) {
  const ForwardTrace<Scalar> t = forward(net, x);
  const auto& z = t.logits;
  require(label >= 0 && label < z.size(), "label",
          "label " + std::to_string(label) + " out of range");
  const Scalar m = z.maxCoeff();
  const Scalar lse = m + std::log((z.array() - m).exp().sum());
  if (lse - z[label] >= loss_ceiling<Scalar>())
    return VectorX<Scalar>::Zero(x.size());

  // d loss / d logits = p - onehot; the label entry is written as minus the
  // other probabilities so it stays accurate when p_label rounds to 1.
  VectorX<Scalar> delta = t.probabilities;
  delta[label] = Scalar(0);
  delta[label] = -delta.sum();

  const auto& layers = net.layers();
  for (std::size_t k = layers.size(); k-- > 0;) {
    if (layers[k].activation == Activation::relu)
      delta = (t.pre_activations[k].array() > Scalar(0)).select(delta, Scalar(0));
    delta = layers[k].weights.transpose() * delta;
  }
  return delta;
}

/// Which argument of the pair supplies the softmax being differentiated.
/// The other argument only contributes its predicted class as a constant
/// hard label.
enum class PairArg { first, second };

/// Pair disagreement loss: cross-entropy of softmax(f(x1)) against the hard
/// predicted class of x2.
template <typename Scalar, typename D1, typename D2>
Scalar pair_loss(const Network<Scalar>& net, const Eigen::MatrixBase<D1>& x1,
                 const Eigen::MatrixBase<D2>& x2) {
  detail::check_input(net, x1);
  return label_loss(net, x1, predict_class(net, x2));
}

/// Gradient of the pair loss taken at the selected argument. For `first` this
/// is grad_{x1} pair_loss(x1, x2); for `second` the roles swap, giving
/// grad_{x2} pair_loss(x2, x1), which is what the alternating attack uses
/// when it moves the second example against the first one's label.
template <typename Scalar, typename D1, typename D2>
VectorX<Scalar> pair_loss_grad(const Network<Scalar>& net,
                               const Eigen::MatrixBase<D1>& x1,
                               const Eigen::MatrixBase<D2>& x2, PairArg which) {
  if (which == PairArg::first)
    return label_loss_grad(net, x1, predict_class(net, x2));
  return label_loss_grad(net, x2, predict_class(net, x1));
}

/// Central-difference counterpart of pair_loss_grad (test oracle).
template <typename Scalar, typename D1, typename D2>
VectorX<Scalar> finite_diff_grad(const Network<Scalar>& net,
                                 const Eigen::MatrixBase<D1>& x1,
                                 const Eigen::MatrixBase<D2>& x2, PairArg which,
                                 Scalar h) {
  require(h > Scalar(0), "config", "finite-difference step must be positive");
  VectorX<Scalar> a = x1.template cast<Scalar>();
  VectorX<Scalar> b = x2.template cast<Scalar>();
  if (which == PairArg::second) a.swap(b);
  VectorX<Scalar>& moving = a;
  const VectorX<Scalar>& fixed = b;
  detail::check_input(net, fixed);
  const int label = predict_class(net, fixed);
  VectorX<Scalar> g(moving.size());
  for (Eigen::Index i = 0; i < moving.size(); ++i) {
    const Scalar keep = moving[i];
    moving[i] = keep + h;
    const Scalar up = label_loss(net, moving, label);
    moving[i] = keep - h;
    const Scalar down = label_loss(net, moving, label);
    moving[i] = keep;
    g[i] = (up - down) / (Scalar(2) * h);
  }
  return g;
}

}  // namespace gadv
