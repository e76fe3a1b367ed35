#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "macmarl/core/rng.hpp"

namespace macmarl::neural {

/// Raised for non-finite losses or gradients.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetConfig {
  int input_dim = 1;
  std::vector<int> pre_widths{32, 32};
  int recurrent_width = 64;
  /// Hidden dense layers after the LSTM; a linear output layer follows them.
  std::vector<int> post_widths{32};
  int output_dim = 1;
  double leaky_slope = 0.01;

  void validate() const;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// Name and shape of one parameter tensor inside the flat parameter vector.
struct TensorShape {
  std::string name;
  int rows = 0;
  int cols = 0;
  Eigen::Index offset = 0;
};

/// Flat layout: dense layers (W, b) before the LSTM, LSTM (Wx, Wh, b with
/// gate blocks ordered input, forget, cell, output), dense layers after it,
/// then the linear output layer. Matrices are column-major.
std::vector<TensorShape> parameter_layout(const NetConfig& config);

template <typename Scalar>
Scalar leaky_relu(Scalar x, Scalar slope) {
  return x > Scalar(0) ? x : slope * x;
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

/// Dense layers -> LSTM -> dense layers -> linear head, with parameters θ and
/// a target copy θ⁻ of identical shape.
///
/// Sequences are stacked column-wise: an input matrix of T steps and batch B
/// is input_dim x (T*B) with column t*B + b. Hidden state starts at zero for
/// every sequence unless an initial state is supplied.
template <typename Scalar>
class RecurrentQNet {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Hidden {
    Matrix h;
    Matrix c;
  };

  enum class Params { Online, Target };

  explicit RecurrentQNet(NetConfig config);

  /// Uniform in ±1/sqrt(fan_in) for every weight and bias; forget-gate bias
  /// +1. Copies θ into θ⁻.
  void initialize(Rng& rng);

  const NetConfig& config() const { return config_; }
  const std::vector<TensorShape>& layout() const { return layout_; }
  Eigen::Index num_params() const { return params_.size(); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }
  Vector& target_params() { return target_; }
  const Vector& target_params() const { return target_; }

  void sync_target() { target_ = params_; }

  Hidden zero_hidden(int batch) const;

  /// Forward pass with θ that caches activations for `backward_sequence`.
  Matrix forward_sequence(const Matrix& inputs, int batch, const Hidden* initial = nullptr,
                          Hidden* final_state = nullptr);

  /// Forward pass without caching, with θ or θ⁻.
  Matrix evaluate_sequence(const Matrix& inputs, int batch, Params which = Params::Online,
                           const Hidden* initial = nullptr, Hidden* final_state = nullptr) const;

  /// One step for a single observation; `state` is advanced in place.
  Vector step(const Vector& input, Hidden& state, Params which = Params::Online) const;

  /// Gradient of sum(output_grads ⊙ outputs) w.r.t. θ for the cached forward
  /// pass (backpropagation through time). Throws if nothing is cached.
  Vector backward_sequence(const Matrix& output_grads) const;

  bool has_cache() const { return cache_.has_value(); }
  void clear_cache() { cache_.reset(); }

  /// Shape table + raw little-endian f64 values of θ and θ⁻.
  void save(std::ostream& out) const;
  static RecurrentQNet load(std::istream& in);

 private:
  // Activations of the last cached forward pass, stacked like the inputs.
  struct Cache {
    int batch = 0;
    int steps = 0;
    Matrix inputs;
    std::vector<Matrix> pre;   // outputs of the dense layers before the LSTM
    Matrix i, f, g, o;         // gate activations
    Matrix c, tanh_c, h;       // cell state, tanh(c), hidden output
    Matrix h0, c0;             // initial state
    std::vector<Matrix> post;  // outputs of the dense layers after the LSTM
  };

  Matrix run(const Vector& theta, const Matrix& inputs, int batch, const Hidden* initial, Hidden* final_state,
             Cache* cache) const;

  NetConfig config_;
  std::vector<TensorShape> layout_;
  Vector params_;
  Vector target_;
  std::optional<Cache> cache_;
};

/// Adaptive-moment or plain gradient descent over a flat parameter vector.
/// `scale` multiplies the step size (hysteresis hook).
template <typename Scalar>
class Optimizer {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  enum class Kind { Adam, Sgd };

  struct Settings {
    Kind kind = Kind::Adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// Gradients are rescaled to this global norm when larger (0 disables).
    double clip_norm = 0.0;
  };

  Optimizer() = default;
  Optimizer(Settings settings, Eigen::Index num_params);

  void step(Vector& params, const Vector& grad, Scalar scale = Scalar(1));

  const Settings& settings() const { return settings_; }
  long step_count() const { return steps_; }
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }

  void save(std::ostream& out) const;
  static Optimizer load(std::istream& in);
  friend bool operator==(const Optimizer& a, const Optimizer& b) {
    return a.steps_ == b.steps_ && a.m_ == b.m_ && a.v_ == b.v_ && a.settings_.kind == b.settings_.kind &&
           a.settings_.learning_rate == b.settings_.learning_rate;
  }

 private:
  Settings settings_;
  Vector m_;
  Vector v_;
  long steps_ = 0;
};

/// Throws NumericalError naming the first non-finite entry.
template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& values, const std::string& what) {
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const auto v = values.derived().data()[k];
    if (!std::isfinite(static_cast<double>(v)))
      throw NumericalError(what + " is non-finite at index " + std::to_string(k) + " (value " +
                           std::to_string(static_cast<double>(v)) + ")");
  }
}

struct GradientCheckResult {
  double max_relative_error = 0.0;
  /// Fraction of probed parameters within tolerance.
  double fraction_within = 0.0;
  int probed = 0;
};

/// Compares `backward_sequence` against central finite differences of
/// L = sum(coeffs ⊙ Q) + 0.5 * sum(Q²) for the given parameter indices.
template <typename Scalar>
GradientCheckResult gradient_check(RecurrentQNet<Scalar>& net, const typename RecurrentQNet<Scalar>::Matrix& inputs,
                                   int batch, const typename RecurrentQNet<Scalar>::Matrix& coeffs,
                                   const std::vector<Eigen::Index>& indices, double h = 1e-5,
                                   double tolerance = 1e-4);

}  // namespace macmarl::neural
