#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmreach/bernstein.hpp"
#include "tmreach/taylor_model.hpp"

namespace tmreach {

/// Raised when a network document or layer fails validation. The message
/// names the offending layer (and index, where applicable).
class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense layer y = act(W x + b); W is out x in, row-major.
struct Layer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;
  Activation activation = Activation::linear;

  double weight(std::size_t row, std::size_t col) const { return weights[row * inputs + col]; }
  std::span<const double> row(std::size_t r) const { return {weights.data() + r * inputs, inputs}; }
};

class Network {
 public:
  /// Validates shapes, the dimension chain and finiteness of every entry.
  explicit Network(std::vector<Layer> layers);

  /// Parses {"input_dim": n, "layers": [{"weights", "biases", "activation"}, ...]}.
  static Network from_json_text(const std::string& text);
  static Network load(const std::string& path);
  std::string to_json_text() const;

  std::size_t input_dim() const { return layers_.front().inputs; }
  std::size_t output_dim() const { return layers_.back().outputs; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Plain double-precision forward pass.
  std::vector<double> evaluate(std::span<const double> x) const;

 private:
  std::vector<Layer> layers_;
};

enum class PropagationMode {
  /// Three-case ReLU law: dead neurons become exactly 0, active neurons pass
  /// through unchanged, only neurons whose bounds straddle 0 are fitted.
  optimized,
  /// Every non-linear neuron goes through the Bernstein enclosure.
  always_bernstein,
};

std::string_view to_string(PropagationMode mode);
PropagationMode parse_propagation_mode(std::string_view name);

struct PropagationOptions {
  ActivationOptions activation;
  PropagationMode mode = PropagationMode::optimized;
};

/// Neuron classification counters gathered during propagation.
struct PropagationStats {
  std::size_t relu_neurons = 0;
  std::size_t relu_inactive = 0;  ///< b <= 0
  std::size_t relu_active = 0;    ///< a >= 0
  std::size_t relu_straddling = 0;
  std::size_t bernstein_calls = 0;

  double sign_definite_fraction() const {
    return relu_neurons == 0 ? 1.0 : double(relu_inactive + relu_active) / double(relu_neurons);
  }
};

/// Pre-activation models W tms + b, truncated to `order`.
std::vector<TaylorModel> affine_step(std::span<const TaylorModel> tms, const Layer& layer, unsigned order);

/// Three-case ReLU law on one neuron.
TaylorModel relu_propagate(const TaylorModel& t, const ActivationOptions& opts,
                           PropagationStats* stats = nullptr);

/// Applies `act` to one pre-activation model under `opts.mode`.
TaylorModel activation_propagate(const TaylorModel& t, Activation act, const PropagationOptions& opts,
                                 PropagationStats* stats = nullptr);

/// Encloses {net(x) : x in the set enclosed by input_tms}.
std::vector<TaylorModel> network_reach(const Network& net, std::span<const TaylorModel> input_tms,
                                       const PropagationOptions& opts = {}, PropagationStats* stats = nullptr);

}  // namespace tmreach
