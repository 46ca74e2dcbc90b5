#include "tmreach/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tmreach {

using nlohmann::json;

namespace {

std::string layer_tag(std::size_t index) { return "layer " + std::to_string(index); }

}  // namespace

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw NetworkError("network has no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.inputs == 0 || layer.outputs == 0) {
      throw NetworkError(layer_tag(l) + ": empty weight matrix");
    }
    if (layer.weights.size() != layer.inputs * layer.outputs) {
      throw NetworkError(layer_tag(l) + ": weight matrix has " + std::to_string(layer.weights.size()) +
                         " entries, expected " + std::to_string(layer.outputs) + "x" +
                         std::to_string(layer.inputs));
    }
    if (layer.biases.size() != layer.outputs) {
      throw NetworkError(layer_tag(l) + ": dimension mismatch, " + std::to_string(layer.outputs) +
                         " weight rows but " + std::to_string(layer.biases.size()) + " biases");
    }
    if (l > 0 && layer.inputs != layers_[l - 1].outputs) {
      throw NetworkError(layer_tag(l) + ": dimension mismatch, expects " + std::to_string(layer.inputs) +
                         " inputs but previous layer has " + std::to_string(layers_[l - 1].outputs) +
                         " outputs");
    }
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      if (!std::isfinite(layer.weights[i])) {
        throw NetworkError(layer_tag(l) + ": non-finite weight at row " + std::to_string(i / layer.inputs) +
                           ", column " + std::to_string(i % layer.inputs));
      }
    }
    for (std::size_t i = 0; i < layer.biases.size(); ++i) {
      if (!std::isfinite(layer.biases[i])) {
        throw NetworkError(layer_tag(l) + ": non-finite bias at index " + std::to_string(i));
      }
    }
  }
}

Network Network::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw NetworkError(std::string("network document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw NetworkError("network document must be an object");
  if (!doc.contains("input_dim") || !doc["input_dim"].is_number_unsigned()) {
    throw NetworkError("network document: \"input_dim\" must be a positive integer");
  }
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw NetworkError("network document: \"layers\" must be an array");
  }
  std::size_t width = doc["input_dim"].get<std::size_t>();
  if (width == 0) throw NetworkError("network document: \"input_dim\" must be a positive integer");

  std::vector<Layer> layers;
  const json& jl = doc["layers"];
  for (std::size_t l = 0; l < jl.size(); ++l) {
    const json& node = jl[l];
    const std::string tag = layer_tag(l);
    if (!node.is_object()) throw NetworkError(tag + ": must be an object");
    for (const char* key : {"weights", "biases", "activation"}) {
      if (!node.contains(key)) throw NetworkError(tag + ": missing \"" + key + "\"");
    }
    if (!node["weights"].is_array() || !node["biases"].is_array() || !node["activation"].is_string()) {
      throw NetworkError(tag + ": wrong field types");
    }
    Layer layer;
    layer.inputs = width;
    layer.outputs = node["weights"].size();
    for (std::size_t r = 0; r < node["weights"].size(); ++r) {
      const json& row = node["weights"][r];
      if (!row.is_array() || row.size() != width) {
        throw NetworkError(tag + ": dimension mismatch, weight row " + std::to_string(r) + " should have " +
                           std::to_string(width) + " entries");
      }
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (!row[c].is_number()) {
          throw NetworkError(tag + ": weight at row " + std::to_string(r) + ", column " + std::to_string(c) +
                             " is not a number");
        }
        layer.weights.push_back(row[c].get<double>());
      }
    }
    for (std::size_t i = 0; i < node["biases"].size(); ++i) {
      if (!node["biases"][i].is_number()) {
        throw NetworkError(tag + ": bias at index " + std::to_string(i) + " is not a number");
      }
      layer.biases.push_back(node["biases"][i].get<double>());
    }
    try {
      layer.activation = parse_activation(node["activation"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw NetworkError(tag + ": " + e.what());
    }
    width = layer.outputs;
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

Network Network::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError("cannot open network file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json_text(ss.str());
  } catch (const NetworkError& e) {
    throw NetworkError(path + ": " + e.what());
  }
}

std::string Network::to_json_text() const {
  json doc;
  doc["input_dim"] = input_dim();
  doc["layers"] = json::array();
  for (const Layer& layer : layers_) {
    json rows = json::array();
    for (std::size_t r = 0; r < layer.outputs; ++r) {
      rows.push_back(std::vector<double>(layer.row(r).begin(), layer.row(r).end()));
    }
    doc["layers"].push_back(
        {{"weights", rows}, {"biases", layer.biases}, {"activation", std::string(to_string(layer.activation))}});
  }
  return doc.dump(2);
}

std::vector<double> Network::evaluate(std::span<const double> x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("Network::evaluate: input dimension mismatch");
  std::vector<double> cur(x.begin(), x.end());
  for (const Layer& layer : layers_) {
    std::vector<double> next(layer.outputs);
    for (std::size_t r = 0; r < layer.outputs; ++r) {
      double s = layer.biases[r];
      for (std::size_t c = 0; c < layer.inputs; ++c) s += layer.weight(r, c) * cur[c];
      next[r] = activate(layer.activation, s);
    }
    cur = std::move(next);
  }
  return cur;
}

std::string_view to_string(PropagationMode mode) {
  return mode == PropagationMode::optimized ? "optimized" : "always-bernstein";
}

PropagationMode parse_propagation_mode(std::string_view name) {
  if (name == "optimized") return PropagationMode::optimized;
  if (name == "always-bernstein" || name == "always_bernstein") return PropagationMode::always_bernstein;
  throw std::invalid_argument("unknown propagation mode \"" + std::string(name) + "\"");
}

std::vector<TaylorModel> affine_step(std::span<const TaylorModel> tms, const Layer& layer, unsigned order) {
  if (tms.size() != layer.inputs) {
    throw std::invalid_argument("affine_step: layer expects " + std::to_string(layer.inputs) + " inputs, got " +
                                std::to_string(tms.size()));
  }
  std::vector<TaylorModel> out;
  out.reserve(layer.outputs);
  for (std::size_t r = 0; r < layer.outputs; ++r) {
    out.push_back(weighted_sum(tms, layer.row(r), layer.biases[r], order));
  }
  return out;
}

TaylorModel relu_propagate(const TaylorModel& t, const ActivationOptions& opts, PropagationStats* stats) {
  const Interval b = t.bounds();
  if (stats) ++stats->relu_neurons;
  if (b.hi() <= 0.0) {
    if (stats) ++stats->relu_inactive;
    return TaylorModel::zero(t.domain_ptr(), t.order());
  }
  if (b.lo() >= 0.0) {
    if (stats) ++stats->relu_active;
    return t;
  }
  if (stats) {
    ++stats->relu_straddling;
    ++stats->bernstein_calls;
  }
  return compose_activation(t, Activation::relu, opts);
}

TaylorModel activation_propagate(const TaylorModel& t, Activation act, const PropagationOptions& opts,
                                 PropagationStats* stats) {
  if (act == Activation::linear) return t;
  if (act == Activation::relu && opts.mode == PropagationMode::optimized) {
    return relu_propagate(t, opts.activation, stats);
  }
  if (stats) {
    if (act == Activation::relu) {
      const Interval b = t.bounds();
      ++stats->relu_neurons;
      if (b.hi() <= 0.0) {
        ++stats->relu_inactive;
      } else if (b.lo() >= 0.0) {
        ++stats->relu_active;
      } else {
        ++stats->relu_straddling;
      }
    }
    ++stats->bernstein_calls;
  }
  return compose_activation(t, act, opts.activation);
}

std::vector<TaylorModel> network_reach(const Network& net, std::span<const TaylorModel> input_tms,
                                       const PropagationOptions& opts, PropagationStats* stats) {
  if (input_tms.size() != net.input_dim()) {
    throw std::invalid_argument("network_reach: network expects " + std::to_string(net.input_dim()) +
                                " inputs, got " + std::to_string(input_tms.size()));
  }
  std::vector<TaylorModel> cur(input_tms.begin(), input_tms.end());
  for (const Layer& layer : net.layers()) {
    std::vector<TaylorModel> pre = affine_step(cur, layer, opts.activation.tm_order);
    cur.clear();
    cur.reserve(pre.size());
    for (const TaylorModel& t : pre) cur.push_back(activation_propagate(t, layer.activation, opts, stats));
  }
  return cur;
}

}  // namespace tmreach
