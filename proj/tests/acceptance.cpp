// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "support.hpp"
#include "tm_programs.hpp"
#include "tmreach/baseline.hpp"
#include "tmreach/bernstein.hpp"
#include "tmreach/cli.hpp"
#include "tmreach/closed_loop.hpp"
#include "tmreach/network.hpp"
#include "tmreach/op_model.hpp"

namespace fs = std::filesystem;
using support::Gen;
using tmreach::Activation;
using tmreach::Box;
using tmreach::Interval;
using tmreach::Network;
using tmreach::TaylorModel;

namespace {

const fs::path kData = TMREACH_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tmreach");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = tmreach::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code == 2) std::cerr << err.str();
  return code;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tmreach_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

// --- 1 ----------------------------------------------------------------------

Outcome tm_enclosure() {
  const auto t0 = Clock::now();
  Gen g(20240601);
  support::ProgramStats st;
  for (int n = 0; n < 10000; ++n) support::run_tm_program(g, 100, 6, true, st);
  const double secs = seconds_since(t0);
  return {st.violations == 0 && st.pointwise_violations == 0 && secs < 60.0,
          fmt::format("10000 instances, {} bound checks / {} violations, {} pointwise checks / {} violations, {:.1f} s",
                      st.checks, st.violations, st.pointwise_checks, st.pointwise_violations, secs)};
}

// --- 2 ----------------------------------------------------------------------

Outcome bernstein_closed_form() {
  const tmreach::Polynomial p = tmreach::bernstein_fit(Activation::relu, Interval(-1, 1), 2);
  const double expected[3] = {0.25, 0.5, 0.25};
  double coef_err = 0.0;
  for (unsigned j = 0; j <= 4; ++j) {
    coef_err = std::max(coef_err, std::fabs(p.coefficient({j}) - (j < 3 ? expected[j] : 0.0)));
  }
  const double eps = tmreach::bernstein_error(Activation::relu, p, Interval(-1, 1), 100);
  // dense-grid sup of |(y+1)^2/4 - relu(y)|
  double sup = 0.0;
  const int grid = 1000000;
  for (int i = 0; i <= grid; ++i) {
    const double y = -1.0 + 2.0 * i / grid;
    sup = std::max(sup, std::fabs((y + 1) * (y + 1) / 4 - std::max(0.0, y)));
  }
  const bool ok = coef_err < 1e-9 && eps >= 0.25 && eps <= 0.25 + 0.02 + 1e-6 && eps >= sup;
  return {ok, fmt::format("max coefficient error {:.3g}, eps(m=100) = {:.12g}, dense-grid sup {:.12g}", coef_err,
                          eps, sup)};
}

// --- 3 ----------------------------------------------------------------------

TaylorModel random_tm(Gen& g, std::size_t dim, double shift) {
  auto d = support::canonical(dim);
  tmreach::Polynomial p(dim);
  const int terms = g.integer(1, 6);
  for (int k = 0; k < terms; ++k) {
    tmreach::Exponents e(dim);
    unsigned deg = 0;
    for (auto& x : e) {
      x = static_cast<unsigned>(g.integer(0, 2));
      deg += x;
    }
    if (deg > 3) continue;
    p.add_term(e, g.uniform(-1, 1));
  }
  p.add_term(tmreach::Exponents(dim, 0), shift);
  const double r = g.uniform(0, 0.3);
  return TaylorModel(p, Interval(-r, r * g.uniform(0, 1)), d, 3);
}

Outcome relu_exactness() {
  Gen g(33);
  int dead = 0, live = 0, bad_dead = 0, bad_live = 0;
  double worst_coef = 0.0, worst_rem = 0.0;
  while (dead < 1000 || live < 1000) {
    const std::size_t dim = 1 + g.index(3);
    const bool want_dead = dead < 1000 && (live >= 1000 || g.coin());
    const TaylorModel t = random_tm(g, dim, want_dead ? -g.uniform(4, 8) : g.uniform(4, 8));
    const Interval b = t.bounds();
    const tmreach::ActivationOptions opts{3, 4, 200};
    if (b.hi() <= 0.0) {
      ++dead;
      const TaylorModel r = tmreach::relu_propagate(t, opts);
      if (!(r.bounds() == Interval(0, 0))) ++bad_dead;
    } else if (b.lo() >= 0.0) {
      ++live;
      const TaylorModel r = tmreach::relu_propagate(t, opts);
      double dc = 0.0;
      for (const auto& [e, c] : t.poly().terms()) dc = std::max(dc, std::fabs(r.poly().coefficient(e) - c));
      for (const auto& [e, c] : r.poly().terms()) dc = std::max(dc, std::fabs(t.poly().coefficient(e) - c));
      const double dr = std::max(std::fabs(r.remainder().lo() - t.remainder().lo()),
                                 std::fabs(r.remainder().hi() - t.remainder().hi()));
      worst_coef = std::max(worst_coef, dc);
      worst_rem = std::max(worst_rem, dr);
      if (dc > 1e-15 || dr > 1e-15) ++bad_live;
    }
  }
  return {bad_dead == 0 && bad_live == 0,
          fmt::format("b<=0: {} of {} not [0,0]; a>=0: {} of {} changed (max coefficient diff {:.3g}, remainder "
                      "diff {:.3g})",
                      bad_dead, dead, bad_live, live, worst_coef, worst_rem)};
}

// --- 4 ----------------------------------------------------------------------

Network crafted_4x64(Gen& g) {
  std::vector<tmreach::Layer> layers;
  std::size_t in = 2;
  for (int l = 0; l < 4; ++l) {
    tmreach::Layer layer;
    layer.inputs = in;
    layer.outputs = 64;
    layer.activation = Activation::relu;
    for (std::size_t i = 0; i < in * 64; ++i) layer.weights.push_back(g.uniform(-1, 1) * 0.01);
    for (std::size_t i = 0; i < 64; ++i) {
      // every tenth neuron straddles, the rest sit well away from zero
      layer.biases.push_back(i % 10 == 0 ? 0.0 : (g.coin() ? 1.0 : -1.0) * g.uniform(0.5, 1.0));
    }
    layers.push_back(std::move(layer));
    in = 64;
  }
  tmreach::Layer out;
  out.inputs = 64;
  out.outputs = 1;
  out.activation = Activation::linear;
  for (int i = 0; i < 64; ++i) out.weights.push_back(g.uniform(-1, 1));
  out.biases.push_back(0.0);
  layers.push_back(std::move(out));
  return Network(std::move(layers));
}

Outcome tightness_and_speed() {
  const auto t0 = Clock::now();
  Gen g(404);
  int instances = 0, rejected = 0, wider = 0;
  double min_fraction = 1.0;
  const tmreach::PropagationOptions opt{{}, tmreach::PropagationMode::optimized};
  const tmreach::PropagationOptions bern{{}, tmreach::PropagationMode::always_bernstein};
  while (instances < 200) {
    support::NetShape shape;
    const std::size_t in = 1 + g.index(3);
    shape.widths = {in};
    const std::size_t depth = 1 + g.index(3);
    for (std::size_t l = 0; l < depth; ++l) {
      shape.widths.push_back(l + 1 == depth ? 1 + g.index(2) : 1 + g.index(16));
      shape.activations.push_back(l + 1 == depth && g.coin() ? Activation::linear : Activation::relu);
    }
    const Network net = support::random_network(g, shape, 0.5, 1.0);
    Box box;
    for (std::size_t i = 0; i < in; ++i) {
      const double c = g.uniform(-1, 1), r = g.uniform(0.01, 0.2);
      box.push_back(Interval(c - r, c + r));
    }
    const auto tms = support::box_models(box);
    tmreach::PropagationStats stats;
    const auto a = tmreach::network_reach(net, tms, opt, &stats);
    if (stats.relu_neurons == 0 || stats.sign_definite_fraction() < 0.8) {
      ++rejected;
      continue;
    }
    ++instances;
    min_fraction = std::min(min_fraction, stats.sign_definite_fraction());
    const auto b = tmreach::network_reach(net, tms, bern);
    for (std::size_t o = 0; o < a.size(); ++o) {
      if (a[o].bounds().width() > b[o].bounds().width()) ++wider;
    }
  }

  Gen gc(505);
  const Network crafted = crafted_4x64(gc);
  const auto inputs = support::box_models({Interval(-0.5, 0.5), Interval(-0.5, 0.5)});
  tmreach::PropagationStats cstats;
  tmreach::network_reach(crafted, inputs, opt, &cstats);
  auto timed = [&](const tmreach::PropagationOptions& o) {
    const auto s = Clock::now();
    const auto out = tmreach::network_reach(crafted, inputs, o);
    const double t = seconds_since(s);
    return out.empty() ? 0.0 : t;
  };
  auto median = [](std::vector<double> ts) {
    std::sort(ts.begin(), ts.end());
    return 0.5 * (ts[ts.size() / 2 - 1] + ts[ts.size() / 2]);
  };
  timed(opt);
  timed(bern);
  std::vector<double> ts_opt, ts_bern;
  for (int r = 0; r < 20; ++r) {
    ts_opt.push_back(timed(opt));
    ts_bern.push_back(timed(bern));
  }
  const double t_opt = median(ts_opt), t_bern = median(ts_bern);
  const double ratio = t_opt / t_bern;
  const double secs = seconds_since(t0);
  const bool ok = wider == 0 && cstats.sign_definite_fraction() >= 0.9 && ratio <= 0.67 && secs < 300;
  return {ok, fmt::format("{} nets ({} rejected for <80% sign-definite, min fraction {:.2f}), {} outputs wider under "
                          "the optimized law; 4x64 net: {:.1f}% sign-definite, median {:.3g} s vs {:.3g} s, ratio "
                          "{:.3f}; {:.1f} s",
                          instances, rejected, min_fraction, wider, 100 * cstats.sign_definite_fraction(), t_opt,
                          t_bern, ratio, secs)};
}

// --- 5 ----------------------------------------------------------------------

struct SoundnessCount {
  std::size_t rollouts = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
};

SoundnessCount rollouts_inside(const Network& net, const tmreach::DynamicsSpec& dyn, const Box& init,
                               const tmreach::ReachTube& tube, const tmreach::SafetySpec& spec, Gen& g) {
  SoundnessCount c;
  const std::size_t steps = tube.steps.size() - 1;
  for (int r = 0; r < 1000; ++r) {
    std::vector<double> x0 = g.point(init);
    if (r < 2) {
      for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = r == 0 ? init[i].lo() : init[i].hi();
    }
    const auto roll = tmreach::simulate_rollout(net, dyn, x0, steps, spec);
    ++c.rollouts;
    for (std::size_t t = 0; t < roll.states.size(); ++t) {
      ++c.checks;
      if (!tmreach::box_contains(tube.steps[t].bounds, roll.states[t])) ++c.violations;
    }
  }
  return c;
}

struct Scenario2D {
  tmreach::DynamicsSpec dyn;
  Network net;
  Box init;
};

Scenario2D random_2d(Gen& g) {
  tmreach::DynamicsSpec dyn;
  dyn.state_dim = 2;
  dyn.action_dim = 1;
  // mildly contracting linear part, small quadratic coupling, actuated through the controller
  dyn.transitions = {
      {{g.uniform(0.85, 0.95), {1, 0}, {0}}, {g.uniform(-0.1, 0.1), {0, 1}, {0}}, {g.uniform(-0.1, 0.1), {2, 0}, {0}},
       {g.uniform(0.05, 0.15), {0, 0}, {1}}},
      {{g.uniform(-0.1, 0.1), {1, 0}, {0}}, {g.uniform(0.85, 0.95), {0, 1}, {0}}, {g.uniform(-0.1, 0.1), {1, 1}, {0}},
       {g.uniform(-0.1, 0.1), {0, 0}, {1}}},
  };
  support::NetShape shape{{2, 8, 1}, {g.coin() ? Activation::tanh : Activation::relu, Activation::linear}};
  Network net = support::random_network(g, shape, 0.6, 0.3);
  const double cx = g.uniform(-0.5, 0.5), cy = g.uniform(-0.5, 0.5);
  return {dyn, std::move(net), {Interval(cx - 0.05, cx + 0.05), Interval(cy - 0.05, cy + 0.05)}};
}

Outcome tube_soundness() {
  Gen g(55);
  std::vector<std::string> parts;
  bool ok = true;

  const Network ctrl = support::stabilizing_controller();
  const auto plant = support::stabilizing_plant();
  const auto safety = support::stabilizing_safety();
  tmreach::ReachOptions opts;
  opts.deadzone = safety.capture_region();
  const Box init{Interval(0.9, 1.1)};
  const auto tube = tmreach::reach_trajectory(ctrl, plant, init, 60, opts);
  const auto sc = rollouts_inside(ctrl, plant, init, tube, safety, g);
  double width_err = 0.0;
  const std::size_t cap = tube.capture_step.value_or(tube.steps.size());
  for (std::size_t t = 0; t < cap; ++t) {
    width_err = std::max(width_err, std::fabs(tube.steps[t].bounds[0].width() - 0.2 * std::pow(0.95, double(t))));
  }
  bool post_ok = tube.capture_step.has_value();
  for (std::size_t t = cap; t < tube.steps.size(); ++t) {
    post_ok = post_ok && Interval(-0.1, 0.1).contains(tube.steps[t].bounds[0]) &&
              tube.steps[t].bounds == tube.steps[cap].bounds;
  }
  ok = ok && sc.violations == 0 && tube.steps.size() == 61 && width_err <= 1e-9 && post_ok;
  parts.push_back(fmt::format("stabilizing: {} violations in {} checks, max width error {:.3g} before capture at "
                              "step {}, post-capture bounds [{}, {}]",
                              sc.violations, sc.checks, width_err, cap, tube.steps.back().bounds[0].lo(),
                              tube.steps.back().bounds[0].hi()));

  for (int k = 0; k < 2; ++k) {
    const Scenario2D s = random_2d(g);
    const auto t2 = tmreach::reach_trajectory(s.net, s.dyn, s.init, 30);
    const auto c2 = rollouts_inside(s.net, s.dyn, s.init, t2, tmreach::SafetySpec{}, g);
    const bool good = c2.violations == 0 && !t2.diverged && t2.steps.size() == 31;
    ok = ok && good;
    parts.push_back(fmt::format("random 2-D #{}: {} violations in {} checks, final widths {:.3g}/{:.3g}{}", k + 1,
                                c2.violations, c2.checks, t2.steps.back().bounds[0].width(),
                                t2.steps.back().bounds[1].width(), t2.diverged ? " (diverged)" : ""));
  }
  std::string detail;
  for (const auto& p : parts) detail += (detail.empty() ? "" : "; ") + p;
  return {ok, detail};
}

// --- 6 ----------------------------------------------------------------------

Outcome conservativeness() {
  const fs::path out = scratch("compare");
  const int code = run_cli({"compare", "--scenario", (kData / "near_boundary.json").string(), "--samples",
                            (kData / "near_boundary_samples.csv").string(), "--seed", "2024", "--out", out.string()});
  if (code != 0) return {false, fmt::format("compare exited with {}", code)};
  const auto rows = read_csv(out / "compare.csv");
  bool all_ge = !rows.empty();
  int strict = 0;
  std::string series;
  for (const auto& r : rows) {
    const double interval = std::stod(r[1]), point = std::stod(r[2]);
    all_ge = all_ge && interval >= point;
    strict += interval > point;
    series += fmt::format(" n={}: {} vs {};", r[0], r[1], r[2]);
  }
  fs::remove_all(out);
  return {all_ge && strict >= 1, fmt::format("interval vs point per checkpoint:{} strict at {} of {}", series, strict,
                                             rows.size())};
}

// --- 7 ----------------------------------------------------------------------

double normal_cdf(double x, double mu, double sigma) { return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0))); }

Outcome op_convergence() {
  struct Component {
    double w, mx, my, s;
  };
  const Component mix[2] = {{0.6, -1.0, -1.0, 0.5}, {0.4, 1.0, 0.5, 0.7}};
  const tmreach::Partitioning part({Interval(-3, 3), Interval(-3, 3)}, {10, 10});

  std::vector<double> truth(part.size(), 0.0);
  for (std::size_t i = 0; i < part.size(); ++i) {
    const auto c = part.cell(i);
    for (const auto& m : mix) {
      truth[i] += m.w * (normal_cdf(c.box[0].hi(), m.mx, m.s) - normal_cdf(c.box[0].lo(), m.mx, m.s)) *
                  (normal_cdf(c.box[1].hi(), m.my, m.s) - normal_cdf(c.box[1].lo(), m.my, m.s));
    }
  }
  const double z = std::accumulate(truth.begin(), truth.end(), 0.0);
  for (double& t : truth) t /= z;

  Gen g(7);
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < 10000; ++i) {
    const Component& m = g.uniform(0, 1) < mix[0].w ? mix[0] : mix[1];
    xs.push_back({g.normal(m.mx, m.s), g.normal(m.my, m.s)});
  }
  double worst_sum = 0.0, kl100 = 0.0, kl10000 = 0.0;
  for (std::size_t n = 100; n <= xs.size(); n += 100) {
    const auto prof = tmreach::fit_op(std::span(xs).first(n), part);
    worst_sum = std::max(worst_sum, std::fabs(std::accumulate(prof.mass.begin(), prof.mass.end(), 0.0) - 1.0));
    const double kl = tmreach::kl_divergence(prof.mass, truth);
    if (n == 100) kl100 = kl;
    if (n == 10000) kl10000 = kl;
  }
  return {kl10000 < kl100 && worst_sum <= 1e-12,
          fmt::format("KL(n=100) = {:.4g}, KL(n=10000) = {:.4g}, max |sum mass - 1| = {:.3g}", kl100, kl10000,
                      worst_sum)};
}

// --- 8 ----------------------------------------------------------------------

Outcome assessment_convergence() {
  // ground truth: fraction of a fine grid of initial states whose exact rollout fails
  const auto sc = tmreach::load_scenario((kData / "failing_region.json").string());
  const Network net = Network::load(*sc.network_path);
  int failing = 0;
  const int grid = 100000;
  for (int i = 0; i < grid; ++i) {
    const std::vector<double> x0{(i + 0.5) / grid};
    failing += !tmreach::simulate_rollout(net, sc.dynamics, x0, sc.steps, sc.safety).safe;
  }
  const double truth = double(failing) / grid;

  const fs::path out = scratch("assess");
  const int code = run_cli({"assess", "--scenario", (kData / "failing_region.json").string(), "--samples",
                            (kData / "failing_region_samples.csv").string(), "--checkpoints", "100,250,500",
                            "--out", out.string()});
  if (code != 0) return {false, fmt::format("assess exited with {}", code)};
  const auto rows = read_csv(out / "convergence.csv");
  fs::remove_all(out);
  if (rows.size() != 3) return {false, "expected three checkpoints"};
  const double e100 = std::stod(rows[0][1]), e250 = std::stod(rows[1][1]), e500 = std::stod(rows[2][1]);
  const bool ok = std::fabs(truth - 0.2) < 1e-3 && e100 >= 0.2 && e250 >= 0.2 && e500 >= 0.2 &&
                  std::fabs(e500 - e250) <= std::fabs(e250 - e100) + 0.05;
  return {ok, fmt::format("true failing mass {:.5f}; estimates {} / {} / {} at n = 100 / 250 / 500", truth, rows[0][1],
                          rows[1][1], rows[2][1])};
}

// --- 9 ----------------------------------------------------------------------

Outcome reliability_arithmetic() {
  auto verdict = [](tmreach::VerdictKind k) {
    tmreach::Verdict v;
    v.kind = k;
    return std::optional<tmreach::Verdict>(v);
  };
  const tmreach::OperationalProfile two{tmreach::Partitioning({Interval(0, 1)}, {2}), {0.3, 0.7}, {3, 7}, 10, 0};
  const std::vector v2{verdict(tmreach::VerdictKind::possibly_unsafe), verdict(tmreach::VerdictKind::verified_safe)};
  const double base = tmreach::assess_reliability(two, v2).failure_probability;

  Gen g(99);
  int bad = 0, flips = 0;
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t cells = 1 + g.index(50);
    std::vector<double> w(cells);
    for (double& x : w) x = g.coin(0.2) ? 0.0 : g.uniform(0, 1);
    w[g.index(cells)] += 0.5;
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= s;
    const tmreach::OperationalProfile prof{tmreach::Partitioning({Interval(0, 1)}, {cells}), w,
                                           std::vector<std::size_t>(cells, 1), cells, 0};
    std::vector<std::optional<tmreach::Verdict>> v(cells);
    for (auto& x : v) x = verdict(g.coin() ? tmreach::VerdictKind::verified_safe : tmreach::VerdictKind::possibly_unsafe);
    std::size_t k = g.index(cells);
    v[k] = verdict(tmreach::VerdictKind::verified_safe);
    const double before = tmreach::assess_reliability(prof, v).failure_probability;
    v[k] = verdict(tmreach::VerdictKind::possibly_unsafe);
    const double after = tmreach::assess_reliability(prof, v).failure_probability;
    ++flips;
    const double err = std::fabs((after - before) - w[k]);
    worst = std::max(worst, err);
    if (after < before || err > 1e-12) ++bad;
  }
  return {base == 0.3 && bad == 0, fmt::format("(0.3, 0.7) with (unsafe, safe) -> {}; {} flips, {} off, max "
                                               "deviation {:.3g}",
                                               base, flips, bad, worst)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"taylor-model enclosure", tm_enclosure},
      {"bernstein closed form", bernstein_closed_form},
      {"sign-definite relu exactness", relu_exactness},
      {"tightness and speed of the three-case law", tightness_and_speed},
      {"reach tube soundness", tube_soundness},
      {"interval vs point conservativeness", conservativeness},
      {"operational profile convergence", op_convergence},
      {"assessment convergence", assessment_convergence},
      {"reliability arithmetic", reliability_arithmetic},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << index << " (" << name << "): " << o.detail
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
