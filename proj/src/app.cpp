// Copyright 2026 The randblock Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "randblock/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace randblock {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

Vector vector_field(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(field, "expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

const json& require(const json& obj, const std::string& key, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) fail(field + "." + key, "missing");
  return obj.at(key);
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(field + "." + key, "has the wrong type");
  }
}

SetDescriptor parse_set(const json& s, const std::string& field) {
  const std::string kind = get_or<std::string>(s, "kind", "", field);
  if (kind == "point") return SetDescriptor::point(vector_field(require(s, "point", field), field + ".point"));
  if (kind == "box") {
    return SetDescriptor::box(vector_field(require(s, "lo", field), field + ".lo"),
                              vector_field(require(s, "hi", field), field + ".hi"));
  }
  if (kind == "ball") {
    return SetDescriptor::ball(vector_field(require(s, "center", field), field + ".center"),
                               get_or<double>(s, "radius", 0.0, field));
  }
  if (kind == "line") {
    return SetDescriptor::line(vector_field(require(s, "point", field), field + ".point"),
                               vector_field(require(s, "direction", field), field + ".direction"));
  }
  fail(field + ".kind", "unsupported set kind '" + kind + "'");
}

ProblemSpec problem_from(const std::string& id, const json& params) {
  const std::string f = "problem.params";
  if (id == "counterexample2d") return counterexample2d(get_or<double>(params, "t", 0.25, f));
  if (id == "feasibility") {
    const json& sets = require(params, "sets", f);
    if (!sets.is_array() || sets.size() != 2) fail(f + ".sets", "expected two set descriptors");
    const auto coupling = feasibility_coupling_from_string(
        get_or<std::string>(params, "coupling", "squared_distance", f));
    return feasibility(parse_set(sets[0], f + ".sets[0]"), parse_set(sets[1], f + ".sets[1]"),
                       coupling);
  }
  if (id == "quadratic_l1") {
    const json& qj = require(params, "Q", f);
    if (!qj.is_array() || qj.empty()) fail(f + ".Q", "expected a square matrix");
    const auto n = static_cast<Eigen::Index>(qj.size());
    Matrix q(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Vector row = vector_field(qj[static_cast<std::size_t>(r)], f + ".Q");
      if (row.size() != n) fail(f + ".Q", "expected a square matrix");
      q.row(r) = row.transpose();
    }
    const Vector b = params.contains("b") ? vector_field(params["b"], f + ".b") : Vector::Zero(n);
    std::vector<int> dims = get_or<std::vector<int>>(params, "block_dims",
                                                     std::vector<int>(static_cast<std::size_t>(n), 1), f);
    const auto lambda = get_or<std::vector<double>>(
        params, "lambda", std::vector<double>(dims.size(), 0.0), f);
    return quadratic_l1(q, b, lambda, BlockLayout(dims));
  }
  fail("problem.id", "unknown problem '" + id + "'");
}

PairRegion parse_region(const json& r, const PairRegion& fallback, int dim,
                        const std::string& field) {
  PairRegion region = fallback;
  if (r.is_object()) {
    if (r.contains("lo")) region.lo = vector_field(r["lo"], field + ".lo");
    if (r.contains("hi")) region.hi = vector_field(r["hi"], field + ".hi");
    region.tied.clear();
    for (int t : get_or<std::vector<int>>(r, "tied", {}, field)) region.tied.push_back(t - 1);
  }
  if (region.dim() != dim || region.hi.size() != dim) fail(field, "dimension does not match the problem");
  try {
    region.validate();
  } catch (const Error& e) {
    fail(field, e.what());
  }
  return region;
}

}  // namespace

ExperimentConfig parse_config(const json& input) {
  if (!input.is_object()) fail("config", "expected a JSON object");
  ExperimentConfig c;
  json out = input;
  const int version = get_or<int>(input, "schema_version", kSchemaVersion, "config");
  if (version != kSchemaVersion) fail("schema_version", "unsupported version " + std::to_string(version));
  out["schema_version"] = version;

  const json& pj = require(input, "problem", "config");
  c.problem_id = get_or<std::string>(pj, "id", "", "problem");
  c.problem_params = pj.contains("params") ? pj["params"] : json::object();
  ProblemSpec problem;
  try {
    problem = problem_from(c.problem_id, c.problem_params);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail("problem", e.what());
  }
  out["problem"] = {{"id", c.problem_id}, {"params", c.problem_params}};
  const int m = problem.layout.num_blocks();
  const int dim = problem.layout.total_dim();

  const std::string flavor = get_or<std::string>(input, "flavor", "FB", "config");
  try {
    c.flavor = flavor_from_string(flavor);
  } catch (const Error& e) {
    fail("flavor", e.what());
  }
  out["flavor"] = to_string(c.flavor);

  const json scheme = input.contains("scheme") ? input["scheme"] : json("singletons");
  if (scheme.is_string()) {
    const auto kind = scheme.get<std::string>();
    if (kind == "singletons") {
      for (int j = 0; j < m; ++j) c.subsets.push_back({j});
    } else if (kind == "full") {
      std::vector<int> all;
      for (int j = 0; j < m; ++j) all.push_back(j);
      c.subsets.push_back(all);
    } else {
      fail("scheme", "expected 'singletons', 'full' or an object");
    }
  } else {
    const json& sj = require(scheme, "subsets", "scheme");
    if (!sj.is_array() || sj.empty()) fail("scheme.subsets", "expected a nonempty list");
    for (const auto& s : sj) {
      std::vector<int> subset;
      try {
        for (int b : s.get<std::vector<int>>()) subset.push_back(b - 1);
      } catch (const json::exception&) {
        fail("scheme.subsets", "expected lists of 1-based block indices");
      }
      c.subsets.push_back(subset);
    }
  }
  if (scheme.is_object() && scheme.contains("probabilities")) {
    c.probabilities = get_or<std::vector<double>>(scheme, "probabilities", {}, "scheme");
  } else {
    c.probabilities.assign(c.subsets.size(), 1.0 / static_cast<double>(c.subsets.size()));
  }
  json subsets_out = json::array();
  for (const auto& s : c.subsets) {
    json one = json::array();
    for (int b : s) one.push_back(b + 1);
    subsets_out.push_back(one);
  }
  out["scheme"] = {{"subsets", subsets_out}, {"probabilities", c.probabilities}};
  try {
    BlockSubsetScheme(m, c.subsets, c.probabilities);
  } catch (const Error& e) {
    fail("scheme", e.what());
  }

  if (!input.contains("steps")) {
    c.steps.assign(static_cast<std::size_t>(m), problem.default_step);
  } else if (input["steps"].is_number()) {
    c.steps.assign(static_cast<std::size_t>(m), input["steps"].get<double>());
  } else {
    c.steps = get_or<std::vector<double>>(input, "steps", {}, "config");
  }
  if (static_cast<int>(c.steps.size()) != m) fail("steps", "expected one step per block");
  for (double t : c.steps)
    if (!(t > 0.0)) fail("steps", "steps must be positive");
  out["steps"] = c.steps;
  c.alpha_gd = get_or<double>(input, "alpha_gd", 0.5, "config");
  if (!(c.alpha_gd > 0.0 && c.alpha_gd < 1.0)) fail("alpha_gd", "must lie in (0,1)");
  out["alpha_gd"] = c.alpha_gd;
  c.strict = get_or<bool>(input, "strict", false, "config");
  out["strict"] = c.strict;

  if (c.flavor == Flavor::ForwardBackward && !problem.coupling->differentiable()) {
    fail("flavor", "forward-backward needs a differentiable coupling");
  }
  if (c.strict && c.flavor == Flavor::ForwardBackward) {
    const StepBound bound = gd_step_bound(*problem.coupling, c.alpha_gd);
    const StepSchedule sched(c.steps);
    const bool global_ok = bound.global_upper && sched.is_global() &&
                           c.steps.front() <= *bound.global_upper;
    for (int j = 0; j < m && !global_ok; ++j) {
      if (!(c.steps[static_cast<std::size_t>(j)] < bound.upper[static_cast<std::size_t>(j)])) {
        fail("steps", "step " + format_double(c.steps[static_cast<std::size_t>(j)]) +
                          " of block " + std::to_string(j + 1) + " exceeds the admissible bound " +
                          format_double(bound.upper[static_cast<std::size_t>(j)]));
      }
    }
  }

  const json ens = input.contains("ensemble") ? input["ensemble"] : json::object();
  c.ensemble_size = get_or<std::size_t>(ens, "size", 100, "ensemble");
  if (c.ensemble_size == 0) fail("ensemble.size", "must be positive");
  const json init = ens.contains("init") ? ens["init"] : json::object();
  c.init_kind = get_or<std::string>(init, "kind", "uniform_box", "ensemble.init");
  if (c.init_kind == "uniform_box") {
    c.init_lo = init.contains("lo") ? vector_field(init["lo"], "ensemble.init.lo") : problem.region.lo;
    c.init_hi = init.contains("hi") ? vector_field(init["hi"], "ensemble.init.hi") : problem.region.hi;
    if (c.init_lo.size() != dim || c.init_hi.size() != dim) {
      fail("ensemble.init", "box dimension does not match the problem");
    }
    if ((c.init_lo.array() > c.init_hi.array()).any()) fail("ensemble.init", "box has min > max");
    out["ensemble"] = {{"size", c.ensemble_size},
                       {"init", {{"kind", c.init_kind}, {"lo", vector_json(c.init_lo)}, {"hi", vector_json(c.init_hi)}}}};
  } else if (c.init_kind == "point") {
    c.init_point = vector_field(require(init, "x", "ensemble.init"), "ensemble.init.x");
    if (c.init_point.size() != dim) fail("ensemble.init.x", "dimension does not match the problem");
    out["ensemble"] = {{"size", c.ensemble_size},
                       {"init", {{"kind", c.init_kind}, {"x", vector_json(c.init_point)}}}};
  } else {
    fail("ensemble.init.kind", "expected 'uniform_box' or 'point'");
  }

  c.iterations = get_or<std::size_t>(input, "iterations", 100, "config");
  c.snapshot_every = get_or<std::size_t>(input, "snapshot_every", 0, "config");
  c.dw_every = get_or<std::size_t>(input, "dw_every", 1, "config");
  c.threads = get_or<int>(input, "threads", 1, "config");
  if (c.threads < 1) fail("threads", "must be at least 1");
  c.seed = get_or<std::uint64_t>(input, "seed", 0, "config");
  out["iterations"] = c.iterations;
  out["snapshot_every"] = c.snapshot_every;
  out["dw_every"] = c.dw_every;
  out["threads"] = c.threads;
  out["seed"] = c.seed;

  const json targets = input.contains("targets") ? input["targets"] : json("fixed_points");
  if (targets.is_string()) {
    c.targets_mode = targets.get<std::string>();
    if (c.targets_mode != "fixed_points" && c.targets_mode != "none") {
      fail("targets", "expected 'fixed_points', 'none' or a list of points");
    }
  } else if (targets.is_array()) {
    c.targets_mode = "explicit";
    for (const auto& t : targets) {
      c.target_points.push_back(vector_field(t, "targets"));
      if (c.target_points.back().size() != dim) fail("targets", "dimension does not match the problem");
    }
  } else {
    fail("targets", "expected a string or a list of points");
  }
  out["targets"] = targets;
  const std::string reference = get_or<std::string>(input, "reference", "none", "config");
  if (reference != "none" && reference != "enumerate") fail("reference", "expected 'none' or 'enumerate'");
  c.reference_enumerate = reference == "enumerate";
  out["reference"] = reference;

  if (input.contains("certify")) {
    json cj = input["certify"];
    const std::string f = "certify";
    const std::string prop = get_or<std::string>(cj, "property", "aafne_in_expectation", f);
    static const std::vector<std::string> known = {"pointwise_aafne", "aafne_in_expectation",
                                                   "paracontraction_in_expectation",
                                                   "expectation_identities"};
    if (std::find(known.begin(), known.end(), prop) == known.end()) {
      fail("certify.property", "unknown property '" + prop + "'");
    }
    cj["property"] = prop;
    const PairRegion region =
        parse_region(cj.contains("region") ? cj["region"] : json(), problem.region, dim, "certify.region");
    json tied = json::array();
    for (int t : region.tied) tied.push_back(t + 1);
    cj["region"] = {{"lo", vector_json(region.lo)}, {"hi", vector_json(region.hi)}, {"tied", tied}};
    for (const char* key : {"alpha", "epsilon"}) {
      if (!cj.contains(key)) cj[key] = "theory";
      if (!(cj[key].is_number() || cj[key] == "theory")) fail(f + "." + key, "expected a number or 'theory'");
    }
    if (!cj.contains("map")) cj["map"] = "full";
    if (cj["map"].is_number_integer()) {
      const int i = cj["map"].get<int>();
      if (i < 1 || i > static_cast<int>(c.subsets.size())) fail("certify.map", "subset index out of range");
    } else if (cj["map"] != "full") {
      fail("certify.map", "expected 'full' or a 1-based subset index");
    }
    cj["n_pairs"] = get_or<std::size_t>(cj, "n_pairs", 10000, f);
    cj["seed"] = get_or<std::uint64_t>(cj, "seed", c.seed, f);
    cj["refine"] = get_or<bool>(cj, "refine", true, f);
    cj["refine_steps"] = get_or<int>(cj, "refine_steps", 50, f);
    cj["tolerance"] = get_or<double>(cj, "tolerance", prop == "expectation_identities" ? 1e-9 : 1e-10, f);
    cj["residual_threshold"] = get_or<double>(cj, "residual_threshold", 1e-8, f);
    if (cj.contains("c_points")) {
      for (const auto& z : cj["c_points"])
        if (vector_field(z, "certify.c_points").size() != dim) fail("certify.c_points", "dimension mismatch");
    }
    c.certify = cj;
    out["certify"] = cj;
  }

  c.output_dir = get_or<std::string>(input, "output_dir", "out", "config");
  out["output_dir"] = c.output_dir;
  c.resolved = out;
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: parse error in " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

ProblemSpec build_problem(const ExperimentConfig& config) {
  return problem_from(config.problem_id, config.problem_params);
}

SplittingMap build_map(const ExperimentConfig& config, const ProblemSpec& problem) {
  const int m = problem.layout.num_blocks();
  return problem.make_map(config.flavor, StepSchedule(config.steps),
                          BlockSubsetScheme(m, config.subsets, config.probabilities));
}

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string optional_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

void write_trajectory(const fs::path& path, const Trajectory& traj, int dim) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "k,mean_residual,max_residual,psi_upper,dW_step,dW_target";
  for (int i = 0; i < dim; ++i) out << ",mean_x" << (i + 1);
  out << '\n';
  for (const auto& r : traj.records) {
    out << r.k << ',' << format_double(r.mean_residual) << ',' << format_double(r.max_residual)
        << ',' << format_double(r.psi_upper) << ',' << optional_cell(r.dw_step) << ','
        << optional_cell(r.dw_target);
    for (int i = 0; i < dim; ++i) out << ',' << format_double(r.mean_state[i]);
    out << '\n';
  }
}

json record_json(const DiagnosticRecord& r) {
  json j = {{"k", r.k},
            {"mean_residual", r.mean_residual},
            {"max_residual", r.max_residual},
            {"psi_upper", r.psi_upper},
            {"mean_state", vector_json(r.mean_state)}};
  j["dW_target"] = r.dw_target ? json(*r.dw_target) : json();
  return j;
}

json verdict_json(const SequenceVerdict& v) {
  json j = {{"pass", v.pass}, {"worst_excess", std::isfinite(v.worst_excess) ? json(v.worst_excess) : json()}};
  j["first_violation"] = v.first_violation ? json(*v.first_violation) : json();
  return j;
}

json asymptotic_json(const AsymptoticRegularity& a) {
  return {{"pass", a.pass},
          {"tail_mean", a.tail_mean},
          {"tail_length", a.tail_length},
          {"fitted_rate", a.fitted_rate},
          {"summable_trend", a.summable_trend}};
}

json fit_json(const RateFit& f) {
  return {{"rate", f.rate},
          {"r2_geometric", f.r2_geometric},
          {"r2_power", f.r2_power},
          {"sublinear", f.sublinear},
          {"used", f.used}};
}

std::vector<Vector> resolve_targets(const ExperimentConfig& config, const ProblemSpec& problem) {
  if (config.targets_mode == "explicit") return config.target_points;
  if (config.targets_mode == "none") return {};
  return problem.fixed_points(config.flavor);
}

std::unique_ptr<InitialSampler> make_sampler(const ExperimentConfig& config) {
  if (config.init_kind == "point") return std::make_unique<PointMassSampler>(config.init_point);
  return std::make_unique<UniformBoxSampler>(config.init_lo, config.init_hi);
}

}  // namespace

RunResult cmd_run(const ExperimentConfig& config, const fs::path& out_dir) {
  const ProblemSpec problem = build_problem(config);
  const SplittingMap map = build_map(config, problem);
  const auto sampler = make_sampler(config);
  Ensemble ens = init_ensemble(problem.layout, *sampler, config.ensemble_size, config.seed);

  RunOptions opt;
  opt.iterations = config.iterations;
  opt.snapshot_every = config.snapshot_every;
  opt.dw_every = config.dw_every;
  opt.targets = resolve_targets(config, problem);
  opt.threads = config.threads;

  RunResult res;
  res.trajectory = run(ens, map, opt);
  const auto& traj = res.trajectory;

  fs::create_directories(out_dir);
  write_trajectory(out_dir / "trajectory.csv", traj, problem.layout.total_dim());
  for (const auto& snap : traj.snapshots) {
    write_measure(out_dir / ("snapshot_" + std::to_string(snap.k) + ".csv"),
                  DiscreteMeasure::empirical(snap.particles),
                  {{"k", snap.k}, {"seed", config.seed}, {"problem", config.problem_id}});
  }

  json s;
  s["schema_version"] = kSchemaVersion;
  s["config"] = config.resolved;
  s["seed"] = config.seed;
  s["problem"] = {{"id", problem.id}, {"description", problem.description},
                  {"convex", problem.convex}, {"consistent", problem.consistent}};
  const RegularityConstants full = composite_constants(map, config.alpha_gd);
  const RegularityConstants expect = expectation_constants(full, map.block_probs());
  s["constants"] = {{"alpha", full.alpha},
                    {"violation", full.violation},
                    {"alpha_in_expectation", expect.alpha},
                    {"violation_in_expectation", expect.violation}};
  s["iterations"] = config.iterations;
  s["initial"] = record_json(traj.records.front());
  s["final"] = record_json(traj.records.back());
  json targets = json::array();
  for (const auto& t : opt.targets) targets.push_back(vector_json(t));
  s["targets"] = targets;
  s["psi_upper"] = traj.records.back().psi_upper;

  std::vector<double> dist, steps;
  for (const auto& r : traj.records) {
    if (r.dw_target) dist.push_back(*r.dw_target);
    if (r.dw_step) steps.push_back(*r.dw_step);
  }
  if (dist.size() >= 2) s["fejer"] = verdict_json(check_fejer(dist));
  if (!steps.empty()) s["asymptotic_regularity"] = asymptotic_json(check_asymptotic_regularity(steps));
  try {
    s["rate"] = fit_json(fit_linear_rate(dist));
  } catch (const DegenerateSequence&) {
    s["rate"] = nullptr;
  }

  if (config.reference_enumerate) {
    const Vector start = config.init_kind == "point" ? config.init_point
                                                     : Vector(0.5 * (config.init_lo + config.init_hi));
    const DeterministicRun det = iterate_full_map(map, start, 100000, 1e-14);
    const ReachableChain chain = enumerate_reachable(map, det.point);
    const double w = wasserstein2_weighted(ens.measure(), chain.stationary, problem.layout,
                                           map.block_probs())
                         .distance;
    json support = json::array();
    for (std::size_t i = 0; i < chain.stationary.size(); ++i) {
      support.push_back({{"weight", chain.stationary.weights[i]},
                         {"point", vector_json(chain.stationary.support[i])}});
    }
    s["reference"] = {{"kind", "enumerated_reachable_chain"},
                      {"states", chain.states.size()},
                      {"stationary", support},
                      {"dW_final", w}};
  }
  s["generated_at"] = timestamp();

  std::ofstream out(out_dir / "summary.json");
  out << s.dump(2) << '\n';
  res.summary = std::move(s);
  return res;
}

json report_to_json(const CertificationReport& r) {
  json j = {{"property", r.property},
            {"alpha", r.alpha},
            {"epsilon", r.epsilon},
            {"samples", r.samples},
            {"eligible", r.eligible},
            {"tolerance", r.tolerance},
            {"pass", r.pass},
            {"verdict", r.verdict_text()}};
  j["max_margin"] = std::isfinite(r.max_margin) ? json(r.max_margin) : json();
  if (r.witness) {
    j["witness"] = {{"x", vector_json(r.witness->x)}, {"y", vector_json(r.witness->y)}};
  } else {
    j["witness"] = nullptr;
  }
  json d = json::object();
  for (const auto& [k, v] : r.details) d[k] = v;
  j["details"] = d;
  return j;
}

CertifyResult cmd_certify(const ExperimentConfig& config) {
  if (config.certify.is_null()) throw ConfigError("certify: section missing");
  const json& cj = config.certify;
  const ProblemSpec problem = build_problem(config);
  const SplittingMap map = build_map(config, problem);
  const std::string prop = cj["property"];

  PairRegion region;
  region.lo = vector_field(cj["region"]["lo"], "certify.region.lo");
  region.hi = vector_field(cj["region"]["hi"], "certify.region.hi");
  for (int t : cj["region"]["tied"].get<std::vector<int>>()) region.tied.push_back(t - 1);

  CertifyOptions opt;
  opt.n_pairs = cj["n_pairs"];
  opt.seed = cj["seed"];
  opt.refine = cj["refine"];
  opt.refine_steps = cj["refine_steps"];
  opt.tolerance = cj["tolerance"];

  const RegularityConstants full = composite_constants(map, config.alpha_gd);
  const RegularityConstants expect = expectation_constants(full, map.block_probs());
  const bool in_expectation = prop == "aafne_in_expectation";
  const double alpha = cj["alpha"].is_number() ? cj["alpha"].get<double>()
                                               : (in_expectation ? expect.alpha : full.alpha);
  const double eps = cj["epsilon"].is_number() ? cj["epsilon"].get<double>()
                                               : (in_expectation ? expect.violation : full.violation);

  CertifyResult res;
  if (prop == "pointwise_aafne") {
    MapFn fn;
    std::string which = "full";
    if (cj["map"].is_number_integer()) {
      const std::size_t i = cj["map"].get<std::size_t>() - 1;
      fn = [&map, i](const Vector& x) { return map.apply(i, x); };
      which = std::to_string(i + 1);
    } else {
      fn = [&map](const Vector& x) { return map.apply_full(x); };
    }
    res.report = certify_pointwise_aafne(fn, region, alpha, eps, opt);
  } else if (in_expectation) {
    res.report = certify_aafne_in_expectation(map, region, alpha, eps, opt);
  } else if (prop == "paracontraction_in_expectation") {
    std::vector<Vector> cpts;
    if (cj.contains("c_points")) {
      for (const auto& z : cj["c_points"]) cpts.push_back(vector_field(z, "certify.c_points"));
    } else {
      cpts = problem.fixed_points(config.flavor);
    }
    res.report = certify_paracontraction_in_expectation(map, cpts, region, opt,
                                                        cj["residual_threshold"].get<double>());
  } else {
    res.report = verify_expectation_identities(map, region, opt);
  }
  res.json = report_to_json(res.report);
  res.json["map"] = cj["map"];
  res.json["config"] = config.resolved;
  res.json["seed"] = opt.seed;
  return res;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

std::vector<double> TrajectoryTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("trajectory: no column '" + name + "'");
  const auto idx = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> v;
  for (const auto& row : rows)
    if (idx < row.size() && row[idx]) v.push_back(*row[idx]);
  return v;
}

TrajectoryTable read_trajectory(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("trajectory: cannot open " + path.string());
  TrajectoryTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (t.columns.empty()) {
      t.columns = split_csv(line);
      continue;
    }
    std::vector<std::optional<double>> row;
    for (const auto& cell : split_csv(line)) {
      if (cell.empty()) row.emplace_back();
      else row.emplace_back(parse_number(cell, path.string() + ":" + std::to_string(lineno)));
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw ConfigError("trajectory: " + path.string() + " has no header");
  return t;
}

json cmd_rate(const fs::path& trajectory, const RateOptions& options) {
  const TrajectoryTable table = read_trajectory(trajectory);
  const std::vector<double> d = table.column(options.column);
  RateReport rep;
  json j;
  j["trajectory"] = trajectory.string();
  j["column"] = options.column;
  j["entries"] = d.size();
  try {
    rep.fit = fit_linear_rate(d);
    j["fit"] = fit_json(rep.fit);
  } catch (const DegenerateSequence& e) {
    j["fit"] = {{"error", e.what()}};
  }
  rep.fejer = check_fejer(d);
  j["fejer"] = verdict_json(rep.fejer);
  if (options.kappa && options.tau) {
    try {
      const GaugeSpec g = theta_linear(*options.kappa, *options.tau, options.epsilon);
      rep.theoretical_factor = g.factor;
      rep.gauge_monotone = check_gauge_monotone(d, g);
      j["theoretical_factor"] = g.factor;
      j["gauge_monotone"] = verdict_json(*rep.gauge_monotone);
    } catch (const InadmissibleGauge& e) {
      j["gauge_monotone"] = {{"error", e.what()}};
    }
  }
  if (std::find(table.columns.begin(), table.columns.end(), "dW_step") != table.columns.end()) {
    const auto steps = table.column("dW_step");
    if (!steps.empty()) {
      rep.asymptotic = check_asymptotic_regularity(steps);
      j["asymptotic_regularity"] = asymptotic_json(*rep.asymptotic);
    }
  }
  if (options.config) {
    const ExperimentConfig& c = *options.config;
    const ProblemSpec problem = build_problem(c);
    const SplittingMap map = build_map(c, problem);
    const auto& cpts = problem.fixed_points(c.flavor);
    if (!cpts.empty()) {
      Rng rng(c.seed, 0, 17);
      std::vector<Vector> samples;
      for (std::size_t i = 0; i < options.kappa_samples; ++i)
        samples.push_back(problem.region.sample_point(rng));
      try {
        rep.kappa_hat = estimate_msr_kappa(map, samples, cpts);
        j["kappa_hat"] = *rep.kappa_hat;
      } catch (const NoEligibleSamples& e) {
        j["kappa_hat"] = {{"error", e.what()}};
      }
    }
    j["config"] = c.resolved;
    j["seed"] = c.seed;
  }
  return j;
}

DiscreteMeasure read_measure(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("measure: cannot open " + path.string());
  DiscreteMeasure mu;
  std::string line;
  std::size_t lineno = 0;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() < 2) throw ConfigError(where + ": expected weight followed by coordinates");
    if (cells[0] == "weight") continue;
    const auto n = static_cast<Eigen::Index>(cells.size() - 1);
    if (dim >= 0 && n != dim) throw DimensionMismatch(where + ": inconsistent dimension");
    dim = n;
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = parse_number(cells[static_cast<std::size_t>(i + 1)], where);
    mu.weights.push_back(parse_number(cells[0], where));
    mu.support.push_back(std::move(x));
  }
  if (mu.support.empty()) throw ConfigError("measure: " + path.string() + " is empty");
  return mu;
}

void write_measure(const fs::path& path, const DiscreteMeasure& mu, const json& header) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# " << header.dump() << '\n';
  const int dim = mu.support.empty() ? 0 : static_cast<int>(mu.support.front().size());
  out << "weight";
  for (int i = 0; i < dim; ++i) out << ",x" << (i + 1);
  out << '\n';
  for (std::size_t a = 0; a < mu.size(); ++a) {
    out << format_double(mu.weights[a]);
    for (int i = 0; i < dim; ++i) out << ',' << format_double(mu.support[a][i]);
    out << '\n';
  }
}

json cmd_transport(const fs::path& a, const fs::path& b, const std::vector<double>& block_weights,
                   const std::vector<int>& block_dims, bool include_plan) {
  const DiscreteMeasure mu = read_measure(a);
  const DiscreteMeasure nu = read_measure(b);
  const int da = static_cast<int>(mu.support.front().size());
  const int db = static_cast<int>(nu.support.front().size());
  if (da != db) {
    throw DimensionMismatch("measures have dimensions " + std::to_string(da) + " and " +
                            std::to_string(db));
  }
  const BlockLayout layout =
      block_dims.empty() ? BlockLayout::uniform(da, 1) : BlockLayout(block_dims);
  if (layout.total_dim() != da) throw DimensionMismatch("block dimensions do not match the measures");
  BlockProbabilities p = unit_probabilities(layout.num_blocks());
  if (!block_weights.empty()) {
    if (static_cast<int>(block_weights.size()) != layout.num_blocks()) {
      throw DimensionMismatch("one weight per block is required");
    }
    p.p = block_weights;
    p.p_max = *std::max_element(block_weights.begin(), block_weights.end());
  }
  mu.validate(layout);
  nu.validate(layout);
  const TransportResult r = wasserstein2_weighted(mu, nu, layout, p);
  json j = {{"distance", r.distance}, {"assignment_path", r.assignment_path},
            {"source", a.string()}, {"target", b.string()}, {"weights", p.p}};
  if (include_plan) {
    json plan = json::array();
    for (Eigen::Index i = 0; i < r.plan.gamma.rows(); ++i)
      for (Eigen::Index k = 0; k < r.plan.gamma.cols(); ++k)
        if (r.plan.gamma(i, k) > 0.0) plan.push_back({i, k, r.plan.gamma(i, k)});
    j["plan"] = plan;
  }
  return j;
}

}  // namespace randblock
