#include "tmreach/io.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

namespace tmreach {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Field access with errors of the form "<source>: /json/pointer: message".
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    throw InputError(source_ + ": " + where + ": " + what);
  }

  double real(const json& j, const std::string& where) const {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "expected a finite number");
    return v;
  }

  // null means unbounded on that side.
  double bound(const json& j, const std::string& where, double if_null) const {
    if (j.is_null()) return if_null;
    return real(j, where);
  }

  std::size_t count(const json& j, const std::string& where, std::size_t min = 0) const {
    if (!j.is_number_unsigned()) fail(where, "expected a non-negative integer");
    const auto v = j.get<std::size_t>();
    if (v < min) fail(where, "must be >= " + std::to_string(min));
    return v;
  }

  const json& array(const json& j, const std::string& where, std::optional<std::size_t> size = {}) const {
    if (!j.is_array()) fail(where, "expected an array");
    if (size && j.size() != *size) {
      fail(where, "expected " + std::to_string(*size) + " entries, got " + std::to_string(j.size()));
    }
    return j;
  }

  Interval interval(const json& j, const std::string& where, bool allow_unbounded) const {
    array(j, where, 2);
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double lo = allow_unbounded ? bound(j[0], where + "/0", -inf) : real(j[0], where + "/0");
    const double hi = allow_unbounded ? bound(j[1], where + "/1", inf) : real(j[1], where + "/1");
    if (!(lo <= hi)) fail(where, "lower bound exceeds upper bound");
    return {lo, hi};
  }

  Box box(const json& j, const std::string& where, std::size_t dim, bool allow_unbounded) const {
    array(j, where, dim);
    Box b;
    for (std::size_t i = 0; i < dim; ++i) b.push_back(interval(j[i], where + "/" + std::to_string(i), allow_unbounded));
    return b;
  }

  std::vector<double> reals(const json& j, const std::string& where, std::size_t dim) const {
    array(j, where, dim);
    std::vector<double> v;
    for (std::size_t i = 0; i < dim; ++i) v.push_back(real(j[i], where + "/" + std::to_string(i)));
    return v;
  }

  Exponents exponents(const json& j, const std::string& where, std::size_t dim) const {
    array(j, where, dim);
    Exponents e;
    for (std::size_t i = 0; i < dim; ++i) {
      e.push_back(static_cast<unsigned>(count(j[i], where + "/" + std::to_string(i))));
    }
    return e;
  }

 private:
  std::string source_;
};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": byte " + std::to_string(e.byte) + ": invalid JSON");
  }
  Reader rd(source);
  if (!doc.is_object()) rd.fail("/", "scenario must be an object");
  for (const char* key : {"state_dim", "action_dim", "dynamics", "initial_box"}) {
    if (!doc.contains(key)) rd.fail(std::string("/") + key, "missing required field");
  }

  Scenario sc;
  DynamicsSpec& dyn = sc.dynamics;
  dyn.state_dim = rd.count(doc["state_dim"], "/state_dim", 1);
  dyn.action_dim = rd.count(doc["action_dim"], "/action_dim", 1);
  const json& jd = rd.array(doc["dynamics"], "/dynamics", dyn.state_dim);
  for (std::size_t i = 0; i < dyn.state_dim; ++i) {
    const std::string wi = "/dynamics/" + std::to_string(i);
    std::vector<TransitionTerm> terms;
    const json& jt = rd.array(jd[i], wi);
    for (std::size_t k = 0; k < jt.size(); ++k) {
      const std::string wk = wi + "/" + std::to_string(k);
      if (!jt[k].is_object()) rd.fail(wk, "expected an object");
      TransitionTerm term;
      term.coefficient = rd.real(jt[k].value("coef", json()), wk + "/coef");
      term.state_exponents = jt[k].contains("state") ? rd.exponents(jt[k]["state"], wk + "/state", dyn.state_dim)
                                                     : Exponents(dyn.state_dim, 0);
      term.action_exponents = jt[k].contains("action")
                                  ? rd.exponents(jt[k]["action"], wk + "/action", dyn.action_dim)
                                  : Exponents(dyn.action_dim, 0);
      terms.push_back(std::move(term));
    }
    dyn.transitions.push_back(std::move(terms));
  }
  const unsigned max_degree =
      doc.contains("max_degree") ? static_cast<unsigned>(rd.count(doc["max_degree"], "/max_degree", 1))
                                 : kDefaultMaxDynamicsDegree;
  try {
    dyn.validate(max_degree);
  } catch (const std::invalid_argument& e) {
    rd.fail("/dynamics", e.what());
  }

  sc.initial_box = rd.box(doc["initial_box"], "/initial_box", dyn.state_dim, false);

  if (doc.contains("unsafe")) {
    const json& ju = rd.array(doc["unsafe"], "/unsafe");
    for (std::size_t r = 0; r < ju.size(); ++r) {
      sc.safety.unsafe_regions.push_back(rd.box(ju[r], "/unsafe/" + std::to_string(r), dyn.state_dim, true));
    }
  }
  if (doc.contains("goal")) sc.safety.goal_region = rd.box(doc["goal"], "/goal", dyn.state_dim, true);
  if (doc.contains("deadzone")) {
    sc.safety.deadzone = rd.reals(doc["deadzone"], "/deadzone", dyn.state_dim);
    for (std::size_t i = 0; i < dyn.state_dim; ++i) {
      if (sc.safety.deadzone[i] < 0.0) rd.fail("/deadzone/" + std::to_string(i), "must be >= 0");
    }
    if (!sc.safety.goal_region) rd.fail("/deadzone", "a deadzone needs a goal");
  }
  if (doc.contains("steps")) sc.steps = rd.count(doc["steps"], "/steps", 1);
  if (doc.contains("network")) {
    if (!doc["network"].is_string()) rd.fail("/network", "expected a path string");
    std::filesystem::path p = doc["network"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    sc.network_path = p.string();
  }

  ReachOptions& opts = sc.options;
  if (doc.contains("options")) {
    const json& jo = doc["options"];
    if (!jo.is_object()) rd.fail("/options", "expected an object");
    auto& act = opts.propagation.activation;
    if (jo.contains("order")) {
      act.tm_order = static_cast<unsigned>(rd.count(jo["order"], "/options/order", 1));
      if (act.tm_order > kMaxOrder) rd.fail("/options/order", "must be <= " + std::to_string(kMaxOrder));
    }
    if (jo.contains("bernstein_order")) {
      act.bernstein_order = static_cast<unsigned>(rd.count(jo["bernstein_order"], "/options/bernstein_order", 1));
    }
    if (jo.contains("bernstein_steps")) {
      act.bernstein_steps = static_cast<unsigned>(rd.count(jo["bernstein_steps"], "/options/bernstein_steps", 1));
    }
    if (jo.contains("reinit")) opts.reinit_period = static_cast<unsigned>(rd.count(jo["reinit"], "/options/reinit"));
    if (jo.contains("noise")) {
      opts.noise_radius = rd.reals(jo["noise"], "/options/noise", dyn.state_dim);
      for (double r : opts.noise_radius) {
        if (r < 0.0) rd.fail("/options/noise", "noise radii must be >= 0");
      }
    }
    if (jo.contains("mode")) {
      if (!jo["mode"].is_string()) rd.fail("/options/mode", "expected a string");
      try {
        opts.propagation.mode = parse_propagation_mode(jo["mode"].get<std::string>());
      } catch (const std::invalid_argument& e) {
        rd.fail("/options/mode", e.what());
      }
    }
  }
  opts.deadzone = sc.safety.capture_region();

  if (doc.contains("partition")) {
    const json& jp = doc["partition"];
    if (!jp.is_object()) rd.fail("/partition", "expected an object");
    if (jp.contains("bounds")) sc.partition_bounds = rd.box(jp["bounds"], "/partition/bounds", dyn.state_dim, false);
    if (jp.contains("cells")) {
      const json& jc = rd.array(jp["cells"], "/partition/cells", dyn.state_dim);
      for (std::size_t i = 0; i < dyn.state_dim; ++i) {
        sc.cells_per_dim.push_back(rd.count(jc[i], "/partition/cells/" + std::to_string(i), 1));
      }
    }
  }
  if (doc.contains("checkpoints")) {
    const json& jc = rd.array(doc["checkpoints"], "/checkpoints");
    for (std::size_t i = 0; i < jc.size(); ++i) {
      sc.checkpoints.push_back(rd.count(jc[i], "/checkpoints/" + std::to_string(i), 1));
      if (i > 0 && sc.checkpoints[i] <= sc.checkpoints[i - 1]) {
        rd.fail("/checkpoints/" + std::to_string(i), "checkpoints must be increasing");
      }
    }
  }
  if (doc.contains("rollouts_per_cell")) {
    sc.rollouts_per_cell = rd.count(doc["rollouts_per_cell"], "/rollouts_per_cell", 1);
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_scenario(read_file(path), path, base);
}

std::vector<std::vector<double>> parse_samples_csv(const std::string& text, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) numeric = false;
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    const bool first = header_allowed;
    header_allowed = false;
    if (!numeric) {
      if (first) continue;  // header
      throw InputError(source + ": line " + std::to_string(lineno) + ": non-numeric value");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(source + ": line " + std::to_string(lineno) + ": expected " +
                       std::to_string(rows.front().size()) + " columns, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(source + ": no samples");
  return rows;
}

std::vector<std::vector<double>> load_samples_csv(const std::string& path) {
  return parse_samples_csv(read_file(path), path);
}

std::string format_real(double v) { return fmt::format("{}", v); }

void write_tube_csv(std::ostream& os, const ReachTube& tube) {
  os << "step,var,lo,hi\n";
  for (std::size_t t = 0; t < tube.steps.size(); ++t) {
    const Box& b = tube.steps[t].bounds;
    for (std::size_t i = 0; i < b.size(); ++i) {
      os << t << ',' << i << ',' << format_real(b[i].lo()) << ',' << format_real(b[i].hi()) << '\n';
    }
  }
}

namespace {

json box_json(const Box& b) {
  json j = json::array();
  for (const Interval& iv : b) {
    json pair = json::array();
    pair.push_back(std::isfinite(iv.lo()) ? json(iv.lo()) : json());
    pair.push_back(std::isfinite(iv.hi()) ? json(iv.hi()) : json());
    j.push_back(pair);
  }
  return j;
}

json optional_index(const std::optional<std::size_t>& v) { return v ? json(*v) : json(); }

}  // namespace

std::string verdict_json(const Verdict& verdict, const ReachTube& tube) {
  json j;
  j["verdict"] = std::string(to_string(verdict.kind));
  j["first_violation_step"] = optional_index(verdict.first_violation_step);
  j["final_bounds"] = box_json(verdict.final_bounds);
  j["steps_computed"] = tube.steps.empty() ? 0 : tube.steps.size() - 1;
  j["diverged_step"] = optional_index(tube.diverged_step);
  j["capture_step"] = optional_index(tube.capture_step);
  j["reinit_period"] = tube.reinit_period;
  j["order"] = tube.tm_order;
  j["bernstein_order"] = tube.bernstein_order;
  j["bernstein_steps"] = tube.bernstein_steps;
  return j.dump(2) + "\n";
}

std::string profile_json(const OperationalProfile& profile) {
  json j;
  j["bounds"] = box_json(profile.partitioning.bounds());
  j["cells_per_dim"] = profile.partitioning.cells_per_dim();
  j["sample_count"] = profile.sample_count;
  j["out_of_bounds"] = profile.out_of_bounds;
  json cells = json::array();
  for (std::size_t i = 0; i < profile.partitioning.size(); ++i) {
    const Cell c = profile.partitioning.cell(i);
    cells.push_back({{"cell", i},
                     {"box", box_json(c.box)},
                     {"center", c.center},
                     {"count", profile.counts[i]},
                     {"mass", profile.mass[i]}});
  }
  j["cells"] = cells;
  return j.dump(2) + "\n";
}

std::string report_json(const ReliabilityReport& report, const OperationalProfile& profile) {
  json j;
  j["failure_probability"] = report.failure_probability;
  j["cells_checked"] = report.cells_checked;
  j["cells_verified"] = report.cells_verified;
  j["sample_count"] = profile.sample_count;
  j["out_of_bounds"] = profile.out_of_bounds;
  json cells = json::array();
  for (const CellRecord& rec : report.cells) {
    const Cell c = profile.partitioning.cell(rec.cell);
    cells.push_back({{"cell", rec.cell},
                     {"box", box_json(c.box)},
                     {"center", c.center},
                     {"mass", rec.mass},
                     {"verdict", rec.verdict ? json(std::string(to_string(*rec.verdict))) : json()},
                     {"failure", rec.failure}});
  }
  j["cells"] = cells;
  json conv = json::array();
  for (const auto& [n, est] : report.convergence) conv.push_back({{"samples", n}, {"failure_probability", est}});
  j["convergence"] = conv;
  return j.dump(2) + "\n";
}

}  // namespace tmreach
