// dmdp_lab: command-line front end for the DMDP policy-iteration laboratory.

#include "dmdp/dmdp.hpp"
#include "dmdp/graph_eval.hpp"
#include "dmdp/io.hpp"
#include "dmdp/policy_iteration.hpp"
#include "dmdp/rootbounds.hpp"
#include "dmdp/roots.hpp"
#include "dmdp/scenarios.hpp"
#include "dmdp/signpoly.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using dmdp::ordered_json;

struct Options {
  std::vector<std::string> instances;
  std::string gamma;
  std::string rule = "howard";
  std::string objective = "discounted";
  std::string scenario;
  std::uint64_t seed = 1;
  std::string out = "json";
  std::size_t budget = dmdp::kDefaultEnumerationBudget;

  // gen / verify instance sources
  std::string family = "mm";
  long m = 1;
  std::size_t n = 4;
  std::size_t k = 2;
  unsigned bits = 1;
  std::size_t count = 1;

  // per-command extras
  std::string policy;
  std::size_t state = 0;
  std::size_t a = 0;
  std::size_t a2 = 1;
  std::string poly;
  std::vector<std::string> grid;
  std::size_t grid_points = 50;
  std::size_t starts = 0;
  std::size_t random_polys = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dmdp::Dmdp load_instance(const std::string& path) {
  try {
    return dmdp::parse_instance(read_file(path));
  } catch (const dmdp::ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

dmdp::Dmdp single_instance(const Options& o) {
  if (o.instances.size() != 1) throw std::runtime_error("exactly one --instance is required");
  return load_instance(o.instances.front());
}

dmdp::SwitchRule parse_rule(const std::string& s) {
  return s == "simplex" ? dmdp::SwitchRule::simplex_lowest_state : dmdp::SwitchRule::howard;
}

dmdp::Rational parse_gamma(const Options& o, const dmdp::Dmdp& m) {
  if (!o.gamma.empty()) return dmdp::parse_rational(o.gamma);
  if (m.gamma) return *m.gamma;
  throw std::runtime_error("a discount factor is required (--gamma NUM/DEN or instance gamma)");
}

dmdp::Policy parse_policy(const std::string& text, const dmdp::Dmdp& m) {
  dmdp::Policy pi;
  if (text.empty()) return dmdp::Policy::constant(m.n, 0);
  if (text.find(',') != std::string::npos) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) pi.actions.push_back(std::stoul(item));
  } else {
    for (char c : text) {
      if (c < '0' || c > '9') throw std::runtime_error("policy digits expected, got '" + text + "'");
      pi.actions.push_back(static_cast<dmdp::Action>(c - '0'));
    }
  }
  if (!dmdp::is_valid_policy(m, pi)) throw std::runtime_error("policy '" + text + "' is not valid for this instance");
  return pi;
}

dmdp::IntPolynomial parse_poly(const std::string& text) {
  std::vector<dmdp::BigInt> c;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) c.push_back(dmdp::parse_bigint(item));
  return dmdp::IntPolynomial(std::move(c));
}

ordered_json values_json(const dmdp::ValueTable& v) {
  ordered_json out = ordered_json::array();
  for (const auto& x : v) out.push_back(dmdp::to_string(x));
  return out;
}

ordered_json coeffs_json(const dmdp::IntPolynomial& p) {
  ordered_json out = ordered_json::array();
  for (const auto& c : p.coeffs()) out.push_back(c.get_str());
  return out;
}

ordered_json envelope(const std::string& command) {
  ordered_json j;
  j["format"] = dmdp::kFormatVersion;
  j["command"] = command;
  return j;
}

void print(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_gen(const Options& o) {
  dmdp::Dmdp m;
  if (o.family == "mm") m = dmdp::gen_mm(o.m);
  else if (o.family == "random") m = dmdp::gen_random(o.n, o.k, o.bits, o.seed);
  else throw std::runtime_error("unknown family '" + o.family + "'");
  if (!o.gamma.empty()) m.gamma = dmdp::parse_rational(o.gamma);
  const auto rep = dmdp::validate(m);
  if (!rep.ok()) throw std::runtime_error("generated instance is invalid: " + rep.violations.front());
  std::cout << dmdp::emit_instance(m);
  return 0;
}

ordered_json trace_json(const dmdp::Dmdp& m, const dmdp::Trace& t, bool full) {
  ordered_json j;
  j["iterations"] = t.iterations();
  j["terminal"] = t.terminal().to_string(m.k);
  j["certified"] = t.certified;
  j["values"] = values_json(t.certificate_values);
  if (full) {
    ordered_json steps = ordered_json::array();
    for (std::size_t i = 0; i < t.policies.size(); ++i) {
      ordered_json step;
      step["policy"] = t.policies[i].to_string(m.k);
      if (i > 0) {
        ordered_json sw = ordered_json::array();
        for (const auto& x : t.switches[i - 1]) sw.push_back({{"state", x.state}, {"from", x.from}, {"to", x.to}});
        step["switches"] = std::move(sw);
      }
      steps.push_back(std::move(step));
    }
    j["policies"] = std::move(steps);
  }
  return j;
}

int cmd_solve_or_trace(const Options& o, bool full) {
  const dmdp::Dmdp m = single_instance(o);
  const dmdp::Policy pi0 = parse_policy(o.policy, m);
  const dmdp::SwitchRule rule = parse_rule(o.rule);
  ordered_json j = envelope(full ? "trace" : "solve");
  j["instance"] = dmdp::instance_digest(m);
  j["objective"] = o.objective;
  j["rule"] = dmdp::to_string(rule);
  j["start"] = pi0.to_string(m.k);
  if (o.objective == "average") {
    const dmdp::AvgTrace run = dmdp::run_avg_pi(m, pi0, rule);
    j["result"] = trace_json(m, run.trace, full);
    const auto gb = dmdp::gains_biases(m, run.trace.terminal());
    j["result"]["bias"] = values_json(gb.bias);
    j["report"] = {{"distinct_gain_bias", run.report.distinct_gain_bias},
                   {"b", run.report.b},
                   {"t1", run.report.t1.get_str()},
                   {"t2", run.report.t2.get_str()},
                   {"bound", run.report.bound.get_str()},
                   {"gain_optimality_residual", values_json(run.report.gain_optimality_residual)},
                   {"bias_optimality_residual", values_json(run.report.bias_optimality_residual)}};
  } else if (o.objective == "discounted") {
    const dmdp::Rational gamma = parse_gamma(o, m);
    j["gamma"] = dmdp::to_string(gamma);
    j["result"] = trace_json(m, dmdp::run_pi(m, pi0, gamma, rule), full);
  } else {
    throw std::runtime_error("unknown objective '" + o.objective + "'");
  }
  print(j);
  return 0;
}

int cmd_signpoly(const Options& o) {
  const dmdp::Dmdp m = single_instance(o);
  const dmdp::Policy pi = parse_policy(o.policy, m);
  const dmdp::IntPolynomial f = dmdp::build_sign_poly(m, pi, o.state, o.a, o.a2);
  ordered_json j = envelope("signpoly");
  j["instance"] = dmdp::instance_digest(m);
  j["policy"] = pi.to_string(m.k);
  j["state"] = o.state;
  j["a"] = o.a;
  j["a2"] = o.a2;
  j["coefficients"] = coeffs_json(f);
  j["degree"] = f.degree();
  j["height"] = f.height().get_str();
  j["bit_size"] = dmdp::bit_size(m);
  if (!o.gamma.empty()) {
    const dmdp::Rational g = dmdp::parse_rational(o.gamma);
    j["gamma"] = dmdp::to_string(g);
    j["sign"] = dmdp::sign_at(f, g);
  }
  print(j);
  return 0;
}

int cmd_gammaq(const Options& o) {
  const dmdp::Dmdp m = single_instance(o);
  dmdp::ThresholdResult r = dmdp::gamma_q_brute(m, o.budget * std::max<std::size_t>(m.n * m.k * m.k, 1));
  ordered_json j = envelope("gammaq");
  j["instance"] = dmdp::instance_digest(m);
  j["exact"] = r.exact();
  j["lower"] = dmdp::to_string(r.lower());
  j["upper"] = dmdp::to_string(r.upper());
  j["tuples"] = r.tuples;
  j["distinct_polynomials"] = r.distinct_polynomials;
  if (r.root) j["polynomial"] = coeffs_json(r.root->poly());
  if (r.witness) {
    j["witness"] = {{"policy", r.witness->pi.to_string(m.k)},
                    {"state", r.witness->s},
                    {"a", r.witness->a},
                    {"a2", r.witness->a2}};
  }
  j["rational_above"] = dmdp::to_string(r.rational_above());
  print(j);
  return 0;
}

int cmd_bound(const Options& o) {
  if (o.poly.empty()) throw std::runtime_error("--poly c0,c1,... is required");
  const dmdp::IntPolynomial p = parse_poly(o.poly);
  const dmdp::RootDistanceBound ub = dmdp::up_root_bound(p);
  ordered_json j = envelope("bound");
  j["coefficients"] = coeffs_json(p);
  j["multiplicity_at_one"] = ub.z;
  j["deflated"] = coeffs_json(ub.deflated);
  j["up_root_bound"] = dmdp::to_string(ub.u);
  j["coarse"] = dmdp::to_string(ub.coarse);
  j["zassenhaus"] = dmdp::to_string(dmdp::zassenhaus_upper(p));
  const auto borwein = dmdp::borwein_multiplicity_bound(p);
  j["borwein"] = borwein ? ordered_json(dmdp::to_string(*borwein)) : ordered_json(nullptr);
  ordered_json roots = ordered_json::array();
  for (const auto& r : dmdp::isolate_all_real_roots(p).roots) {
    roots.push_back({{"exact", r.exact()}, {"lo", dmdp::to_string(r.lo())}, {"hi", dmdp::to_string(r.hi())}});
  }
  j["real_roots"] = std::move(roots);
  print(j);
  return 0;
}

int cmd_verify(const Options& o) {
  if (o.scenario.empty()) throw std::runtime_error("--scenario is required");
  std::vector<dmdp::Dmdp> instances;
  for (const auto& path : o.instances) instances.push_back(load_instance(path));
  if (instances.empty()) {
    if (o.family == "mm") {
      instances.push_back(dmdp::gen_mm(o.m));
    } else if (o.family == "random") {
      for (std::size_t i = 0; i < o.count; ++i) instances.push_back(dmdp::gen_random(o.n, o.k, o.bits, o.seed + i));
    } else {
      throw std::runtime_error("unknown family '" + o.family + "'");
    }
  }
  dmdp::ScenarioParams params;
  params.seed = o.seed;
  params.budget = o.budget;
  params.rule = parse_rule(o.rule);
  params.grid_points = o.grid_points;
  params.start_policies = o.starts;
  params.random_polynomials = o.random_polys;
  for (const auto& g : o.grid) params.gammas.push_back(dmdp::parse_rational(g));
  const dmdp::Report report = dmdp::run_scenario(o.scenario, params, instances);
  if (o.out == "csv") std::cout << report.to_csv();
  else std::cout << report.to_json_text();
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact-arithmetic policy iteration laboratory for deterministic MDPs"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--budget", o.budget, "Policy enumeration budget");
    sub->add_option("--seed", o.seed, "Seed for generators and samplers");
  };
  auto add_instance = [&](CLI::App* sub) { sub->add_option("--instance", o.instances, "Instance JSON file")->check(CLI::ExistingFile); };

  auto* gen = app.add_subcommand("gen", "Generate an instance");
  gen->add_option("--family", o.family, "mm | random")->check(CLI::IsMember({"mm", "random"}));
  gen->add_option("--m", o.m, "M_m family parameter");
  gen->add_option("--n", o.n, "States (random family)");
  gen->add_option("--k", o.k, "Actions (random family)");
  gen->add_option("--bits", o.bits, "Reward bits (random family)");
  gen->add_option("--gamma", o.gamma, "Discount factor NUM/DEN stored in the instance");
  add_common(gen);

  auto add_pi = [&](CLI::App* sub) {
    add_instance(sub);
    sub->add_option("--gamma", o.gamma, "Discount factor NUM/DEN");
    sub->add_option("--rule", o.rule, "howard | simplex")->check(CLI::IsMember({"howard", "simplex"}));
    sub->add_option("--objective", o.objective, "discounted | average")->check(CLI::IsMember({"discounted", "average"}));
    sub->add_option("--policy", o.policy, "Starting policy, e.g. 0101 or 0,1,0,1 (default all zeros)");
    add_common(sub);
  };
  auto* solve = app.add_subcommand("solve", "Run policy iteration and print the terminal policy");
  add_pi(solve);
  auto* trace = app.add_subcommand("trace", "Run policy iteration and print every visited policy");
  add_pi(trace);

  auto* sp = app.add_subcommand("signpoly", "Build a Q-difference sign polynomial");
  add_instance(sp);
  sp->add_option("--policy", o.policy, "Policy (default all zeros)");
  sp->add_option("--state", o.state, "State s");
  sp->add_option("--a", o.a, "First action");
  sp->add_option("--a2", o.a2, "Second action");
  sp->add_option("--gamma", o.gamma, "Optional NUM/DEN at which to report the sign");
  add_common(sp);

  auto* gq = app.add_subcommand("gammaq", "Compute the threshold discount factor by enumeration");
  add_instance(gq);
  add_common(gq);

  auto* bound = app.add_subcommand("bound", "Root bounds for an integer polynomial");
  bound->add_option("--poly", o.poly, "Coefficients c0,c1,... in ascending degree")->required();

  auto* verify = app.add_subcommand("verify", "Run a verification scenario; exit 1 if a check fails");
  add_instance(verify);
  verify->add_option("--scenario", o.scenario, "Scenario name")->required();
  verify->add_option("--out", o.out, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  verify->add_option("--rule", o.rule, "howard | simplex")->check(CLI::IsMember({"howard", "simplex"}));
  verify->add_option("--family", o.family, "Instance family when no --instance is given")
      ->check(CLI::IsMember({"mm", "random"}));
  verify->add_option("--m", o.m, "M_m family parameter");
  verify->add_option("--n", o.n, "States (random family)");
  verify->add_option("--k", o.k, "Actions (random family)");
  verify->add_option("--bits", o.bits, "Reward bits (random family)");
  verify->add_option("--count", o.count, "Number of random instances (seeds seed..seed+count-1)");
  verify->add_option("--grid", o.grid, "Explicit gamma grid NUM/DEN (cycle-values)");
  verify->add_option("--grid-points", o.grid_points, "Grid size i/(N+1) when --grid is absent");
  verify->add_option("--starts", o.starts, "Seeded starting policies (0 = all)");
  verify->add_option("--random-polys", o.random_polys, "Extra random polynomials (root-bounds)");
  add_common(verify);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(o);
    if (*solve) return cmd_solve_or_trace(o, false);
    if (*trace) return cmd_solve_or_trace(o, true);
    if (*sp) return cmd_signpoly(o);
    if (*gq) return cmd_gammaq(o);
    if (*bound) return cmd_bound(o);
    if (*verify) return cmd_verify(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
