// Copyright 2026 The Recourse Bandit Authors. All rights reserved.
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

#include "recourse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace recourse {

namespace {

using nlohmann::json;

// Accepts a number or the strings "inf" / "infinity".
double number_or_inf(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Infinity") return kNeverConsult;
    throw ConfigError("expected a number or \"inf\", got \"" + s + "\"");
  }
  return j.get<double>();
}

json inf_or_number(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}

std::vector<double> number_list(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number_or_inf(v));
  return out;
}

std::string run_name(const ExperimentConfig& config, PolicyKind kind) {
  if (config.policies.size() == 1) return config.name;
  return config.name + "-" + to_string(kind);
}

void write_vector(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << format_double(v(i));
}

// Nonnegative integer field; nlohmann would silently wrap -1 into a huge count.
std::size_t count_field(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
    throw ConfigError(std::string("'") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<std::uint64_t> seed_list(const json& v) {
  if (!v.is_array()) throw ConfigError("'seeds' must be an array of nonnegative integers");
  std::vector<std::uint64_t> out;
  for (const auto& s : v) {
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long long>() < 0)) throw ConfigError("'seeds' must be an array of nonnegative integers");
    out.push_back(s.get<std::uint64_t>());
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::Synthetic: return "synthetic";
    case EnvKind::Fertility: return "fertility";
    case EnvKind::Ihdp: return "ihdp";
  }
  return "unknown";
}

EnvKind parse_env_kind(const std::string& name) {
  if (name == "synthetic") return EnvKind::Synthetic;
  if (name == "fertility") return EnvKind::Fertility;
  if (name == "ihdp") return EnvKind::Ihdp;
  throw ConfigError("unknown environment '" + name + "' (expected synthetic, fertility or ihdp)");
}

std::string to_string(ExpertKind kind) {
  switch (kind) {
    case ExpertKind::Simulated: return "simulated";
    case ExpertKind::Echo: return "echo";
    case ExpertKind::Replay: return "replay";
    case ExpertKind::Live: return "live";
  }
  return "unknown";
}

ExpertKind parse_expert_kind(const std::string& name) {
  if (name == "simulated") return ExpertKind::Simulated;
  if (name == "echo") return ExpertKind::Echo;
  if (name == "replay") return ExpertKind::Replay;
  if (name == "live") return ExpertKind::Live;
  throw ConfigError("unknown expert '" + name + "' (expected simulated, echo, replay or live)");
}

bool SweepGrid::empty() const {
  return variance_control.empty() && consult_threshold.empty() && quality.empty();
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    if (j.contains("environment")) {
      const json& e = j.at("environment");
      auto& env = c.environment;
      env.kind = parse_env_kind(e.value("kind", std::string("synthetic")));
      env.dim = count_field(e, "dim", env.dim);
      env.num_actions = count_field(e, "num_actions", env.num_actions);
      env.noise_sd = e.value("noise_sd", env.noise_sd);
      env.gamma = e.value("gamma", env.gamma);
      if (e.contains("box") && !e.at("box").is_null()) env.box = e.at("box").get<std::vector<double>>();
      if (e.contains("seed") && !e.at("seed").is_null()) env.seed = count_field(e, "seed", 0);
      env.data_path = e.value("data", env.data_path);
      env.schema_path = e.value("schema", env.schema_path);
    }
    if (j.contains("policies")) {
      c.policies.clear();
      for (const auto& p : j.at("policies")) c.policies.push_back(parse_policy_kind(p.get<std::string>()));
    }
    c.horizon = count_field(j, "T", c.horizon);
    if (j.contains("seeds")) c.seeds = seed_list(j.at("seeds"));
    if (j.contains("hr")) {
      const json& h = j.at("hr");
      if (h.contains("consult_threshold")) c.hr.consult_threshold = number_or_inf(h.at("consult_threshold"));
      c.hr.variance_control = h.value("variance_control", c.hr.variance_control);
    }
    if (j.contains("expert")) {
      const json& x = j.at("expert");
      c.expert.kind = parse_expert_kind(x.value("kind", std::string("simulated")));
      c.expert.quality = x.value("quality", c.expert.quality);
      c.expert.script_path = x.value("script", c.expert.script_path);
      c.expert.timeout_s = x.value("timeout_s", c.expert.timeout_s);
    }
    if (j.contains("confidence")) {
      const json& k = j.at("confidence");
      c.delta = k.value("delta", c.delta);
      if (k.contains("theta_bound") && !k.at("theta_bound").is_null())
        c.theta_bound = k.at("theta_bound").get<double>();
      if (k.contains("context_bound") && !k.at("context_bound").is_null())
        c.context_bound = k.at("context_bound").get<double>();
    }
    if (j.contains("admm")) {
      const json& a = j.at("admm");
      c.admm.distance_penalty = a.value("distance_penalty", c.admm.distance_penalty);
      c.admm.ellipsoid_penalty = a.value("ellipsoid_penalty", c.admm.ellipsoid_penalty);
      c.admm.max_outer_iters = a.value("max_outer_iters", c.admm.max_outer_iters);
      c.admm.inner_iters = a.value("inner_iters", c.admm.inner_iters);
      c.admm.tolerance = a.value("tolerance", c.admm.tolerance);
    }
    if (j.contains("ocop_method")) {
      const auto m = j.at("ocop_method").get<std::string>();
      if (m == "admm") c.ocop_method = OcopMethod::Admm;
      else if (m == "boundary") c.ocop_method = OcopMethod::BoundarySearch;
      else throw ConfigError("unknown ocop_method '" + m + "' (expected admm or boundary)");
    }
    c.output_dir = j.value("output", c.output_dir);
    c.threads = count_field(j, "threads", c.threads);
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      if (s.contains("variance_control")) c.sweep.variance_control = number_list(s.at("variance_control"));
      if (s.contains("consult_threshold")) c.sweep.consult_threshold = number_list(s.at("consult_threshold"));
      if (s.contains("quality")) c.sweep.quality = number_list(s.at("quality"));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
}

json ExperimentConfig::to_json() const {
  json env{{"kind", to_string(environment.kind)},
           {"dim", environment.dim},
           {"num_actions", environment.num_actions},
           {"noise_sd", environment.noise_sd},
           {"gamma", environment.gamma},
           {"box", environment.box ? json(*environment.box) : json(nullptr)},
           {"seed", environment.seed ? json(*environment.seed) : json(nullptr)},
           {"data", environment.data_path},
           {"schema", environment.schema_path}};
  json policies = json::array();
  for (const auto p : this->policies) policies.push_back(to_string(p));
  json grid = json::object();
  auto put = [&grid](const char* key, const std::vector<double>& v) {
    if (v.empty()) return;
    json arr = json::array();
    for (const double x : v) arr.push_back(inf_or_number(x));
    grid[key] = arr;
  };
  put("variance_control", sweep.variance_control);
  put("consult_threshold", sweep.consult_threshold);
  put("quality", sweep.quality);
  return json{
      {"name", name},
      {"environment", env},
      {"policies", policies},
      {"T", horizon},
      {"seeds", seeds},
      {"hr", {{"consult_threshold", inf_or_number(hr.consult_threshold)},
              {"variance_control", hr.variance_control}}},
      {"expert", {{"kind", to_string(expert.kind)},
                  {"quality", expert.quality},
                  {"script", expert.script_path},
                  {"timeout_s", expert.timeout_s}}},
      {"confidence", {{"delta", delta},
                      {"theta_bound", theta_bound ? json(*theta_bound) : json(nullptr)},
                      {"context_bound", context_bound ? json(*context_bound) : json(nullptr)}}},
      {"admm", {{"distance_penalty", admm.distance_penalty},
                {"ellipsoid_penalty", admm.ellipsoid_penalty},
                {"max_outer_iters", admm.max_outer_iters},
                {"inner_iters", admm.inner_iters},
                {"tolerance", admm.tolerance}}},
      {"ocop_method", ocop_method == OcopMethod::Admm ? "admm" : "boundary"},
      {"output", output_dir},
      {"threads", threads},
      {"sweep", grid}};
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw ConfigError("T must be at least 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (policies.empty()) throw ConfigError("at least one policy is required");
  if (environment.dim < 1 || environment.num_actions < 1)
    throw ConfigError("environment needs dim >= 1 and num_actions >= 1");
  if (!(environment.noise_sd >= 0.0)) throw ConfigError("noise_sd must be nonnegative");
  if (!(environment.gamma >= 0.0) || !std::isfinite(environment.gamma))
    throw ConfigError("gamma must be finite and nonnegative");
  if (environment.box) {
    for (const double r : *environment.box)
      if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("box radii must be finite and nonnegative");
  }
  if (environment.kind != EnvKind::Synthetic && environment.data_path.empty())
    throw ConfigError(to_string(environment.kind) + " environment needs a data file");
  if (!(expert.quality >= 0.0 && expert.quality <= 1.0)) throw ConfigError("q must be in [0, 1]");
  if (!(expert.timeout_s > 0.0)) throw ConfigError("expert timeout must be positive");
  if (expert.kind == ExpertKind::Replay && expert.script_path.empty())
    throw ConfigError("replay expert needs a script");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0, 1)");
  if (theta_bound && !(*theta_bound >= 0.0)) throw ConfigError("theta_bound must be nonnegative");
  if (context_bound && !(*context_bound > 0.0)) throw ConfigError("context_bound must be positive");
  try {
    hr.validate();
    admm.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  for (const double z : sweep.variance_control)
    if (!(z > 0.0) || !std::isfinite(z)) throw ConfigError("sweep zeta values must be finite and positive");
  for (const double d : sweep.consult_threshold)
    if (!(d >= 0.0)) throw ConfigError("sweep Delta values must be nonnegative");
  for (const double q : sweep.quality)
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("sweep q values must be in [0, 1]");
}

Environment make_environment(const EnvironmentSpec& spec, std::uint64_t run_seed) {
  const std::uint64_t seed = spec.seed.value_or(run_seed);
  Environment env;
  switch (spec.kind) {
    case EnvKind::Synthetic:
      env = build_synthetic(SyntheticOptions{spec.dim, spec.num_actions, spec.noise_sd, spec.gamma, seed});
      break;
    case EnvKind::Fertility:
    case EnvKind::Ihdp: {
      const bool fert = spec.kind == EnvKind::Fertility;
      const Schema schema = spec.schema_path.empty()
                                ? (fert ? Schema::fertility() : Schema::ihdp())
                                : Schema::load(spec.schema_path);
      const DatasetTable table = load_csv(spec.data_path, schema);
      const SemiSyntheticOptions opts{spec.gamma, spec.noise_sd, seed};
      env = fert ? build_fertility(table, opts) : build_ihdp(table, opts);
      break;
    }
  }
  if (spec.box) {
    if (spec.box->size() != env.model.actionable_dim())
      throw ConfigError("box needs one radius per actionable feature (" +
                        std::to_string(env.model.actionable_dim()) + ")");
    BoxBudget box{Eigen::Map<const Vector>(spec.box->data(), static_cast<Eigen::Index>(spec.box->size()))};
    env.context_norm_bound += box.radii.norm() - spec.gamma;
    env.budget = std::move(box);
    env.validate();
  }
  return env;
}

PolicyConfig make_policy_config(const ExperimentConfig& config, PolicyKind kind,
                                const Environment& env) {
  PolicyConfig p;
  p.kind = kind;
  p.confidence.theta_bound = config.theta_bound.value_or(env.model.max_theta_norm());
  p.confidence.context_bound = config.context_bound.value_or(env.context_norm_bound);
  p.confidence.delta = config.delta;
  p.confidence.num_actions = env.num_actions();
  p.budget = env.budget;
  p.hr = config.hr;
  p.admm = config.admm;
  p.ocop_method = config.ocop_method;
  return p;
}

json RunSummary::to_json() const {
  return json{{"policy", policy},
              {"seed", seed},
              {"T", horizon},
              {"regret", regret},
              {"regret_half", regret_half},
              {"queries", queries},
              {"adoptions", adoptions},
              {"queries_final_fifth", queries_final_fifth},
              {"solver_nonconverged", solver_nonconverged}};
}

RunSummary RunLog::summary() const {
  RunSummary s;
  s.policy = policy;
  s.seed = seed;
  s.horizon = steps.size();
  if (!steps.empty()) s.regret = steps.back().regret_cum;
  const std::size_t half = steps.size() / 2;
  if (half > 0) s.regret_half = steps[half - 1].regret_cum;
  for (const auto& r : steps) {
    s.queries += r.queried;
    s.adoptions += r.adopted;
    if (!r.solver_converged) ++s.solver_nonconverged;
    // t > 0.8 T, compared in integers.
    if (r.queried && 5 * r.t > 4 * steps.size()) ++s.queries_final_fifth;
  }
  return s;
}

void RunLog::write_csv(std::ostream& out) const {
  const std::size_t d = dim;
  const std::size_t d_m = dim - immutable_dim;
  out << "t";
  for (std::size_t i = 0; i < d; ++i) out << ",x" << i;
  out << ",action";
  for (std::size_t i = 0; i < d_m; ++i) out << ",r" << i;
  out << ",source,reward,expected_reward,opt_action";
  for (std::size_t i = 0; i < d_m; ++i) out << ",opt_r" << i;
  out << ",opt_value,regret_step,regret_cum,queried,adopted,oracle_failed,ucb,lcb,ci,"
         "human_ucb,human_lcb,human_ci\n";
  for (const auto& r : steps) {
    out << r.t;
    write_vector(out, r.context.full());
    out << ',' << r.action;
    write_vector(out, r.recourse.actionable);
    out << ',' << to_string(r.source) << ',' << format_double(r.reward) << ','
        << format_double(r.expected_reward) << ',' << r.opt_action;
    write_vector(out, r.opt_recourse.actionable);
    out << ',' << format_double(r.opt_value) << ',' << format_double(r.regret_step) << ','
        << format_double(r.regret_cum) << ',' << int(r.queried) << ',' << int(r.adopted) << ','
        << int(r.oracle_failed) << ',' << format_double(r.ai_bounds.ucb) << ','
        << format_double(r.ai_bounds.lcb) << ',' << format_double(r.ai_bounds.ci);
    if (r.human_bounds) {
      out << ',' << format_double(r.human_bounds->ucb) << ',' << format_double(r.human_bounds->lcb)
          << ',' << format_double(r.human_bounds->ci);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

std::string RunLog::csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

double compute_step_regret(const Environment& env, const Context& x, ActionIndex action,
                           const Context& recourse) {
  const CopSolution best = solve_cop(env.model, x, env.budget);
  return std::max(0.0, best.value - expected_reward(env.model, action, recourse));
}

Simulation::Simulation(std::shared_ptr<const Environment> env, PolicyConfig policy,
                       std::uint64_t seed)
    : env_(std::move(env)),
      policy_(std::move(policy), env_->model.immutable_dim(), env_->model.actionable_dim()),
      contexts_(*env_, seed),
      reward_rng_(make_rng(seed, 4)) {
  log_.policy = to_string(policy_.kind());
  log_.seed = seed;
  log_.dim = env_->model.dim();
  log_.immutable_dim = env_->model.immutable_dim();
}

const Context& Simulation::next_context() {
  if (!upcoming_) upcoming_ = contexts_.next();
  return *upcoming_;
}

const StepRecord& Simulation::commit(const Decision& decision) {
  const Context x = next_context();
  StepRecord r;
  r.t = log_.steps.size() + 1;
  r.reward = realize(*env_, x, decision.action, decision.recourse, reward_rng_);
  const CopSolution best = solve_cop(env_->model, x, env_->budget);
  r.expected_reward = expected_reward(env_->model, decision.action, decision.recourse);
  r.opt_action = best.action;
  r.opt_recourse = best.recourse;
  r.opt_value = best.value;
  r.regret_step = std::max(0.0, best.value - r.expected_reward);
  r.regret_cum = (log_.steps.empty() ? 0.0 : log_.steps.back().regret_cum) + r.regret_step;
  r.context = x;
  r.action = decision.action;
  r.recourse = decision.recourse;
  r.source = decision.source;
  r.queried = decision.queried;
  r.adopted = decision.adopted();
  r.oracle_failed = decision.oracle_failed;
  r.ai_bounds = decision.ai_bounds;
  r.human_bounds = decision.human_bounds;
  r.solver_converged = decision.solver.converged;
  policy_.observe(decision, r.reward);
  upcoming_.reset();
  log_.steps.push_back(std::move(r));
  return log_.steps.back();
}

const StepRecord& Simulation::run_step(HumanOracle* oracle) {
  const Decision d = policy_.step(next_context(), oracle);
  return commit(d);
}

std::unique_ptr<HumanOracle> make_oracle(const ExperimentConfig& config, const Environment& env,
                                         std::uint64_t seed) {
  switch (config.expert.kind) {
    case ExpertKind::Simulated:
      return std::make_unique<SimulatedExpert>(config.expert.quality, env.model, env.budget, seed);
    case ExpertKind::Echo: return std::make_unique<EchoOracle>();
    case ExpertKind::Replay:
      return std::make_unique<ReplayOracle>(ReplayScript::load(config.expert.script_path));
    case ExpertKind::Live:
      throw ConfigError("a live expert is only available through the session service");
  }
  return nullptr;
}

namespace {

RunLog run_with(const ExperimentConfig& config, PolicyKind kind, std::uint64_t seed,
                std::shared_ptr<const Environment> env) {
  Simulation sim(env, make_policy_config(config, kind, *env), seed);
  std::unique_ptr<HumanOracle> oracle;
  if (kind == PolicyKind::HRBandit) oracle = make_oracle(config, *env, seed);
  for (std::size_t t = 0; t < config.horizon; ++t) sim.run_step(oracle.get());
  return sim.log();
}

std::vector<std::shared_ptr<const Environment>> build_environments(const ExperimentConfig& config) {
  std::vector<std::shared_ptr<const Environment>> envs;
  for (const auto seed : config.seeds)
    envs.push_back(std::make_shared<const Environment>(make_environment(config.environment, seed)));
  return envs;
}

}  // namespace

RunLog run_single(const ExperimentConfig& config, PolicyKind kind, std::uint64_t seed) {
  config.validate();
  auto env = std::make_shared<const Environment>(make_environment(config.environment, seed));
  return run_with(config, kind, seed, std::move(env));
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      {
        std::lock_guard lock(error_mu);
        if (error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<PolicyRuns> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto envs = build_environments(config);
  const std::size_t n_seeds = config.seeds.size();
  std::vector<PolicyRuns> out;
  for (const auto p : config.policies) out.push_back(PolicyRuns{p, std::vector<RunLog>(n_seeds)});
  parallel_for(out.size() * n_seeds, config.threads, [&](std::size_t job) {
    const std::size_t p = job / n_seeds;
    const std::size_t s = job % n_seeds;
    out[p].logs[s] = run_with(config, out[p].policy, config.seeds[s], envs[s]);
  });
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

Aggregate aggregate(const std::vector<RunLog>& logs) {
  Aggregate agg;
  if (logs.empty()) return agg;
  std::size_t horizon = logs.front().steps.size();
  for (const auto& l : logs) horizon = std::min(horizon, l.steps.size());
  std::vector<std::size_t> queries(logs.size(), 0);
  std::vector<double> regret(logs.size()), q(logs.size());
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const StepRecord& r = logs[i].steps[t];
      queries[i] += r.queried;
      regret[i] = r.regret_cum;
      q[i] = static_cast<double>(queries[i]);
    }
    agg.mean_regret.push_back(mean(regret));
    agg.std_regret.push_back(population_std(regret));
    agg.mean_queries.push_back(mean(q));
    agg.std_queries.push_back(population_std(q));
  }
  return agg;
}

void write_aggregate_csv(std::ostream& out, const Aggregate& agg) {
  out << "t,mean_regret,std_regret,mean_queries,std_queries\n";
  for (std::size_t t = 0; t < agg.mean_regret.size(); ++t) {
    out << t + 1 << ',' << format_double(agg.mean_regret[t]) << ','
        << format_double(agg.std_regret[t]) << ',' << format_double(agg.mean_queries[t]) << ','
        << format_double(agg.std_queries[t]) << '\n';
  }
}

std::vector<std::filesystem::path> write_runs(const ExperimentConfig& config,
                                              const std::vector<PolicyRuns>& runs) {
  namespace fs = std::filesystem;
  std::vector<fs::path> dirs;
  for (const auto& pr : runs) {
    const fs::path dir = fs::path(config.output_dir) / run_name(config, pr.policy);
    fs::create_directories(dir);
    json summaries = json::array();
    std::vector<double> regrets, queries;
    for (const auto& log : pr.logs) {
      std::ofstream csv(dir / ("seed" + std::to_string(log.seed) + ".csv"));
      log.write_csv(csv);
      if (!csv) throw DataError("failed to write " + (dir / ("seed" + std::to_string(log.seed) + ".csv")).string());
      const RunSummary s = log.summary();
      summaries.push_back(s.to_json());
      regrets.push_back(s.regret);
      queries.push_back(static_cast<double>(s.queries));
    }
    std::ofstream agg_out(dir / "aggregate.csv");
    write_aggregate_csv(agg_out, aggregate(pr.logs));
    json summary{{"policy", to_string(pr.policy)},
                 {"config", config.to_json()},
                 {"runs", summaries},
                 {"mean_regret", mean(regrets)},
                 {"std_regret", population_std(regrets)},
                 {"mean_queries", mean(queries)},
                 {"std_queries", population_std(queries)}};
    std::ofstream sum_out(dir / "summary.json");
    sum_out << summary.dump(2) << '\n';
    if (!sum_out || !agg_out) throw DataError("failed to write run outputs under " + dir.string());
    dirs.push_back(dir);
  }
  return dirs;
}

namespace {

std::vector<double> summary_field(const std::vector<RunSummary>& s, double RunSummary::*field) {
  std::vector<double> out;
  for (const auto& x : s) out.push_back(x.*field);
  return out;
}

std::vector<double> summary_queries(const std::vector<RunSummary>& s) {
  std::vector<double> out;
  for (const auto& x : s) out.push_back(static_cast<double>(x.queries));
  return out;
}

}  // namespace

double SweepPoint::mean_regret() const { return mean(summary_field(summaries, &RunSummary::regret)); }
double SweepPoint::std_regret() const {
  return population_std(summary_field(summaries, &RunSummary::regret));
}
double SweepPoint::mean_queries() const { return mean(summary_queries(summaries)); }
double SweepPoint::std_queries() const { return population_std(summary_queries(summaries)); }

std::vector<SweepPoint> run_sweep(const ExperimentConfig& config) {
  config.validate();
  const auto axis = [](const std::vector<double>& v, double fallback) {
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  const auto zetas = axis(config.sweep.variance_control, config.hr.variance_control);
  const auto deltas = axis(config.sweep.consult_threshold, config.hr.consult_threshold);
  const auto qs = axis(config.sweep.quality, config.expert.quality);

  std::vector<SweepPoint> points;
  for (const double z : zetas)
    for (const double d : deltas)
      for (const double q : qs) points.push_back(SweepPoint{z, d, q, {}});

  const auto envs = build_environments(config);
  const std::size_t n_seeds = config.seeds.size();
  for (auto& p : points) p.summaries.resize(n_seeds);
  parallel_for(points.size() * n_seeds, config.threads, [&](std::size_t job) {
    SweepPoint& p = points[job / n_seeds];
    const std::size_t s = job % n_seeds;
    ExperimentConfig c = config;
    c.hr.variance_control = p.variance_control;
    c.hr.consult_threshold = p.consult_threshold;
    c.expert.quality = p.quality;
    p.summaries[s] = run_with(c, PolicyKind::HRBandit, config.seeds[s], envs[s]).summary();
  });
  return points;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << "zeta,delta_consult,q,mean_regret,std_regret,mean_queries,std_queries\n";
  for (const auto& p : points) {
    out << format_double(p.variance_control) << ',' << format_double(p.consult_threshold) << ','
        << format_double(p.quality) << ',' << format_double(p.mean_regret()) << ','
        << format_double(p.std_regret()) << ',' << format_double(p.mean_queries()) << ','
        << format_double(p.std_queries()) << '\n';
  }
}

}  // namespace recourse
