#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tmreach/baseline.hpp"
#include "tmreach/bernstein.hpp"
#include "tmreach/cli.hpp"
#include "tmreach/closed_loop.hpp"
#include "tmreach/io.hpp"
#include "tmreach/network.hpp"
#include "tmreach/op_model.hpp"

namespace py = pybind11;
using namespace tmreach;

namespace {

using Pair = std::pair<double, double>;

Box to_box(const std::vector<Pair>& b) {
  Box box;
  for (const auto& [lo, hi] : b) box.emplace_back(lo, hi);
  return box;
}

std::vector<Pair> from_box(const Box& b) {
  std::vector<Pair> out;
  for (const auto& iv : b) out.emplace_back(iv.lo(), iv.hi());
  return out;
}

std::vector<Pair> reach_box(const Network& net, const std::vector<Pair>& box, const std::string& mode, unsigned order) {
  const Box b = to_box(box);
  if (b.size() != net.input_dim()) throw std::invalid_argument("box dimension does not match the network input");
  auto d = std::make_shared<const Domain>(Domain::canonical(b.size()));
  std::vector<TaylorModel> tms;
  for (std::size_t i = 0; i < b.size(); ++i) tms.push_back(TaylorModel::from_interval(b[i], i, d, order));
  PropagationOptions opts;
  opts.activation.tm_order = order;
  opts.mode = parse_propagation_mode(mode);
  Box out;
  for (const auto& t : network_reach(net, tms, opts)) out.push_back(t.bounds());
  return from_box(out);
}

py::dict verify(const std::string& scenario_path, std::optional<std::string> network_path,
                std::optional<std::size_t> steps) {
  const Scenario sc = load_scenario(scenario_path);
  const std::string path = network_path ? *network_path : sc.network_path.value_or("");
  if (path.empty()) throw InputError(scenario_path + ": no network given");
  const Network net = Network::load(path);
  const ReachTube tube = reach_trajectory(net, sc.dynamics, sc.initial_box, steps.value_or(sc.steps), sc.options);
  const Verdict v = check_safety(tube, sc.safety);
  std::vector<std::vector<Pair>> bounds;
  for (const auto& s : tube.steps) bounds.push_back(from_box(s.bounds));
  py::dict r;
  r["verdict"] = std::string(to_string(v.kind));
  r["first_violation_step"] = v.first_violation_step;
  r["capture_step"] = tube.capture_step;
  r["diverged"] = tube.diverged;
  r["bounds"] = bounds;
  return r;
}

py::dict profile_dict(const OperationalProfile& p) {
  py::dict r;
  r["mass"] = p.mass;
  r["counts"] = p.counts;
  r["sample_count"] = p.sample_count;
  r["out_of_bounds"] = p.out_of_bounds;
  return r;
}

py::tuple run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tmreach");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_tmreach, m) {
  m.doc() = "Taylor-model reachability for neural-network control loops";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NetworkError>(m, "NetworkError", PyExc_ValueError);

  py::class_<Network>(m, "Network")
      .def_static("load", &Network::load, py::arg("path"))
      .def_static("from_json", &Network::from_json_text, py::arg("text"))
      .def("to_json", &Network::to_json_text)
      .def_property_readonly("input_dim", &Network::input_dim)
      .def_property_readonly("output_dim", &Network::output_dim)
      .def("evaluate", [](const Network& n, const std::vector<double>& x) { return n.evaluate(x); }, py::arg("x"));

  m.def("network_reach", &reach_box, py::arg("network"), py::arg("box"), py::arg("mode") = "optimized",
        py::arg("order") = kDefaultOrder, "Output bounds of the network over an input box.");

  m.def(
      "bernstein",
      [](const std::string& activation, double lo, double hi, unsigned order, unsigned steps) {
        const BernsteinApprox a = bernstein_approx(parse_activation(activation), Interval(lo, hi), order, steps);
        const Polynomial p = bernstein_fit(a.activation, a.range, order);
        std::vector<double> coeffs(order + 1, 0.0);
        for (unsigned j = 0; j <= order; ++j) coeffs[j] = p.coefficient({j});
        return py::make_tuple(coeffs, a.error);
      },
      py::arg("activation"), py::arg("lo"), py::arg("hi"), py::arg("order") = kDefaultBernsteinOrder,
      py::arg("steps") = kDefaultBernsteinSteps, "Power-basis coefficients and sampled error bound.");

  m.def("verify", &verify, py::arg("scenario"), py::arg("network") = py::none(), py::arg("steps") = py::none(),
        "Reach tube and safety verdict for a scenario file.");

  m.def(
      "fit_op",
      [](const std::vector<std::vector<double>>& samples, const std::vector<Pair>& bounds,
         const std::vector<std::size_t>& cells) { return profile_dict(fit_op(samples, Partitioning(to_box(bounds), cells))); },
      py::arg("samples"), py::arg("bounds"), py::arg("cells"));

  m.def(
      "assess_reliability",
      [](const std::vector<double>& mass, const std::vector<std::optional<double>>& failure) {
        if (mass.size() != failure.size()) throw std::invalid_argument("mass and failure lengths differ");
        const OperationalProfile p{Partitioning({Interval(0.0, 1.0)}, {mass.size()}), mass,
                                   std::vector<std::size_t>(mass.size(), 0), 0, 0};
        return assess_reliability(p, std::span<const std::optional<double>>(failure)).failure_probability;
      },
      py::arg("mass"), py::arg("failure"), "sum of mass times per-cell failure probability.");

  m.def(
      "kl_divergence", [](const std::vector<double>& p, const std::vector<double>& q) { return kl_divergence(p, q); },
      py::arg("p"), py::arg("q"));

  m.def("run_cli", &run_cli, py::arg("args"), "Runs the command-line tool; returns (exit code, stdout, stderr).");
}
