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

// Experiment runner: configuration, per-seed simulations, run logs, sweeps.

#ifndef RECOURSE_HARNESS_HPP
#define RECOURSE_HARNESS_HPP

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "recourse/environments.hpp"
#include "recourse/human_oracle.hpp"
#include "recourse/policies.hpp"

namespace recourse {

enum class EnvKind { Synthetic, Fertility, Ihdp };
std::string to_string(EnvKind kind);
EnvKind parse_env_kind(const std::string& name);

struct EnvironmentSpec {
  EnvKind kind = EnvKind::Synthetic;
  std::size_t dim = 5;
  std::size_t num_actions = 2;
  double noise_sd = 1.0;
  double gamma = 1.0;
  std::optional<std::vector<double>> box;  // per-feature radii; replaces the two-norm budget
  // Seed of the ground truth. Unset: every run seed builds its own.
  std::optional<std::uint64_t> seed;
  std::string data_path;
  std::string schema_path;  // empty: built-in schema
};

enum class ExpertKind { Simulated, Echo, Replay, Live };
std::string to_string(ExpertKind kind);
ExpertKind parse_expert_kind(const std::string& name);

struct ExpertSpec {
  ExpertKind kind = ExpertKind::Simulated;
  double quality = 0.9;
  std::string script_path;
  double timeout_s = 120.0;
};

struct SweepGrid {
  std::vector<double> variance_control;   // zeta
  std::vector<double> consult_threshold;  // Delta
  std::vector<double> quality;            // q
  bool empty() const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  EnvironmentSpec environment;
  std::vector<PolicyKind> policies{PolicyKind::HRBandit, PolicyKind::RLinUCB, PolicyKind::LinUCB};
  std::size_t horizon = 500;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  HrParams hr;
  ExpertSpec expert;
  double delta = 0.05;
  std::optional<double> theta_bound;    // beta_Theta; default: true max ||theta_a||
  std::optional<double> context_bound; // beta_X; default: environment bound
  AdmmParams admm;
  OcopMethod ocop_method = OcopMethod::Admm;
  std::string output_dir = "runs";
  std::size_t threads = 0;  // 0: hardware concurrency
  SweepGrid sweep;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
  // Throws ConfigError.
  void validate() const;
};

// Builds the ground truth for one run seed. Throws DataError on a missing
// file or a failed fit.
Environment make_environment(const EnvironmentSpec& spec, std::uint64_t run_seed);

PolicyConfig make_policy_config(const ExperimentConfig& config, PolicyKind kind,
                                const Environment& env);

struct StepRecord {
  std::size_t t = 0;
  Context context;
  ActionIndex action = 0;
  Context recourse;
  DecisionSource source = DecisionSource::AI;
  double reward = 0.0;
  double expected_reward = 0.0;
  ActionIndex opt_action = 0;
  Context opt_recourse;
  double opt_value = 0.0;
  double regret_step = 0.0;
  double regret_cum = 0.0;
  bool queried = false;
  bool adopted = false;
  bool oracle_failed = false;
  Bounds ai_bounds;
  std::optional<Bounds> human_bounds;
  bool solver_converged = true;
};

struct RunSummary {
  std::string policy;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  double regret = 0.0;
  double regret_half = 0.0;  // at floor(T/2)
  std::size_t queries = 0;
  std::size_t adoptions = 0;
  std::size_t queries_final_fifth = 0;  // steps t > 0.8 T
  std::size_t solver_nonconverged = 0;

  nlohmann::json to_json() const;
};

struct RunLog {
  std::string policy;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
  std::size_t immutable_dim = 0;
  std::vector<StepRecord> steps;

  RunSummary summary() const;
  void write_csv(std::ostream& out) const;
  std::string csv() const;
};

// r(x*, a*) - r(x_t, a_t) on expected rewards, clamped at 0.
double compute_step_regret(const Environment& env, const Context& x, ActionIndex action,
                           const Context& recourse);

/**
 * One seeded run of one policy. Owns its policy state and random streams;
 * the environment is shared read-only.
 */
class Simulation {
 public:
  Simulation(std::shared_ptr<const Environment> env, PolicyConfig policy, std::uint64_t seed);

  const Environment& environment() const { return *env_; }
  PolicyState& policy() { return policy_; }
  const PolicyState& policy() const { return policy_; }
  const RunLog& log() const { return log_; }
  std::size_t steps_done() const { return log_.steps.size(); }

  // Context of the upcoming step; drawn once and kept until commit().
  const Context& next_context();
  // Realizes the reward, scores the decision, updates the policy.
  const StepRecord& commit(const Decision& decision);
  const StepRecord& run_step(HumanOracle* oracle);

 private:
  std::shared_ptr<const Environment> env_;
  PolicyState policy_;
  ContextStream contexts_;
  Rng reward_rng_;
  std::optional<Context> upcoming_;
  RunLog log_;
};

// Expert for `kind` bound to one run; nullptr for policies that never consult.
std::unique_ptr<HumanOracle> make_oracle(const ExperimentConfig& config, const Environment& env,
                                         std::uint64_t seed);

RunLog run_single(const ExperimentConfig& config, PolicyKind kind, std::uint64_t seed);

struct PolicyRuns {
  PolicyKind policy;
  std::vector<RunLog> logs;  // in seed order
};

// Every policy over every seed. Environments are built before any step runs.
std::vector<PolicyRuns> run_experiment(const ExperimentConfig& config);

struct Aggregate {
  std::vector<double> mean_regret;  // per step
  std::vector<double> std_regret;   // population standard deviation
  std::vector<double> mean_queries;
  std::vector<double> std_queries;
};

Aggregate aggregate(const std::vector<RunLog>& logs);
void write_aggregate_csv(std::ostream& out, const Aggregate& agg);

double mean(const std::vector<double>& v);
double population_std(const std::vector<double>& v);

// Writes <out>/<run>/seed<k>.csv, summary.json and aggregate.csv per policy.
// Returns the run directories.
std::vector<std::filesystem::path> write_runs(const ExperimentConfig& config,
                                              const std::vector<PolicyRuns>& runs);

struct SweepPoint {
  double variance_control = 0.0;
  double consult_threshold = 0.0;
  double quality = 0.0;
  std::vector<RunSummary> summaries;  // in seed order

  double mean_regret() const;
  double std_regret() const;
  double mean_queries() const;
  double std_queries() const;
};

// HR-Bandit over the grid (missing axes take the config value), same seeds
// at every point.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& config);
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

std::string format_double(double v);

}  // namespace recourse

#endif  // RECOURSE_HARNESS_HPP
