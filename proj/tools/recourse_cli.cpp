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

// recourse: experiment runner, sweeps, one-off COP solves and the session
// service. Exit codes: 0 success, 1 internal error, 2 config error, 3 data error.

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "recourse/harness.hpp"
#include "recourse/server.hpp"

using namespace recourse;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Overrides {
  std::string config_path;
  std::string env;
  std::vector<std::string> policies;
  std::optional<std::size_t> horizon;
  std::string seeds;
  std::string delta_consult;
  std::optional<double> zeta;
  std::optional<double> gamma;
  std::optional<double> q;
  std::string out;
  std::string name;
  std::string data;
  std::string schema;
  std::string expert;
  std::string script;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "experiment config (JSON)");
  cmd->add_option("--env", o.env, "synthetic | fertility | ihdp");
  cmd->add_option("--policy", o.policies, "linucb | rlinucb | hr (repeatable)");
  cmd->add_option("--T", o.horizon, "horizon");
  cmd->add_option("--seeds", o.seeds, "count N (seeds 0..N-1), list a,b,c or range a..b");
  cmd->add_option("--delta-consult", o.delta_consult, "consult threshold Delta (number or inf)");
  cmd->add_option("--zeta", o.zeta, "variance control zeta");
  cmd->add_option("--gamma", o.gamma, "two-norm recourse budget");
  cmd->add_option("--q", o.q, "simulated expert quality");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--name", o.name, "run name");
  cmd->add_option("--data", o.data, "dataset CSV for fertility / ihdp");
  cmd->add_option("--schema", o.schema, "dataset schema (JSON)");
  cmd->add_option("--expert", o.expert, "simulated | echo | replay");
  cmd->add_option("--script", o.script, "replay script (JSON)");
  cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
}

std::uint64_t parse_u64(const std::string& s) {
  std::size_t pos = 0;
  const auto v = std::stoull(s, &pos);
  if (pos != s.size()) throw ConfigError("bad seed '" + s + "'");
  return v;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  try {
    std::vector<std::uint64_t> out;
    if (const auto dots = spec.find(".."); dots != std::string::npos) {
      const auto lo = parse_u64(spec.substr(0, dots));
      const auto hi = parse_u64(spec.substr(dots + 2));
      if (hi < lo) throw ConfigError("empty seed range " + spec);
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else if (spec.find(',') != std::string::npos) {
      std::stringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_u64(item));
    } else {
      const auto n = parse_u64(spec);
      for (std::uint64_t s = 0; s < n; ++s) out.push_back(s);
    }
    if (out.empty()) throw ConfigError("no seeds in '" + spec + "'");
    return out;
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad --seeds '" + spec + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("bad --seeds '" + spec + "'");
  }
}

double parse_threshold(const std::string& s) {
  if (s == "inf" || s == "infinity") return kNeverConsult;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad --delta-consult '" + s + "'");
  }
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config_path);
  if (!o.env.empty()) c.environment.kind = parse_env_kind(o.env);
  if (!o.policies.empty()) {
    c.policies.clear();
    for (const auto& p : o.policies) c.policies.push_back(parse_policy_kind(p));
  }
  if (o.horizon) c.horizon = *o.horizon;
  if (!o.seeds.empty()) c.seeds = parse_seeds(o.seeds);
  if (!o.delta_consult.empty()) c.hr.consult_threshold = parse_threshold(o.delta_consult);
  if (o.zeta) c.hr.variance_control = *o.zeta;
  if (o.gamma) c.environment.gamma = *o.gamma;
  if (o.q) c.expert.quality = *o.q;
  if (!o.out.empty()) c.output_dir = o.out;
  if (!o.name.empty()) c.name = o.name;
  if (!o.data.empty()) c.environment.data_path = o.data;
  if (!o.schema.empty()) c.environment.schema_path = o.schema;
  if (!o.expert.empty()) c.expert.kind = parse_expert_kind(o.expert);
  if (!o.script.empty()) c.expert.script_path = o.script;
  if (o.threads) c.threads = *o.threads;
  c.validate();
  return c;
}

int cmd_run(const Overrides& o) {
  const ExperimentConfig c = build_config(o);
  const auto runs = run_experiment(c);
  const auto dirs = write_runs(c, runs);
  std::cout << std::left << std::setw(10) << "policy" << std::setw(14) << "regret(T)"
            << std::setw(12) << "sd" << std::setw(12) << "queries" << "dir\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<double> regret, queries;
    for (const auto& log : runs[i].logs) {
      const auto s = log.summary();
      regret.push_back(s.regret);
      queries.push_back(static_cast<double>(s.queries));
    }
    std::cout << std::setw(10) << to_string(runs[i].policy) << std::setw(14) << mean(regret)
              << std::setw(12) << population_std(regret) << std::setw(12) << mean(queries)
              << dirs[i].string() << '\n';
  }
  return 0;
}

int cmd_sweep(const Overrides& o, const std::string& zetas, const std::string& deltas,
              const std::string& qs) {
  ExperimentConfig c = build_config(o);
  auto list = [](const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(parse_threshold(item));
    return out;
  };
  if (!zetas.empty()) c.sweep.variance_control = list(zetas);
  if (!deltas.empty()) c.sweep.consult_threshold = list(deltas);
  if (!qs.empty()) c.sweep.quality = list(qs);
  if (c.sweep.empty()) throw ConfigError("sweep needs at least one grid axis (--grid-zeta, --grid-delta, --grid-q)");
  c.validate();
  const auto points = run_sweep(c);
  const auto dir = std::filesystem::path(c.output_dir) / c.name;
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "sweep.csv");
  write_sweep_csv(csv, points);
  if (!csv) throw DataError("failed to write " + (dir / "sweep.csv").string());
  write_sweep_csv(std::cout, points);
  return 0;
}

int cmd_solve_cop(const std::string& input) {
  json j;
  try {
    if (input.empty() || input == "-") {
      j = json::parse(std::cin);
    } else {
      std::ifstream in(input);
      if (!in) throw DataError("cannot open " + input);
      j = json::parse(in);
    }
  } catch (const json::parse_error& e) {
    throw DataError(std::string("input is not valid JSON: ") + e.what());
  }
  try {
    std::vector<Vector> theta;
    for (const auto& row : j.at("theta")) {
      const auto v = row.get<std::vector<double>>();
      theta.emplace_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    const auto d_i = j.value("d_immutable", std::size_t{0});
    const auto x = j.at("context").get<std::vector<double>>();
    const Context ctx = Context::from_full(
        Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size())), d_i);
    DistanceSpec spec = TwoNormBudget{1.0};
    if (j.contains("distance")) {
      const json& d = j.at("distance");
      const auto kind = d.value("kind", std::string("TwoNorm"));
      if (kind == "TwoNorm") {
        spec = TwoNormBudget{d.value("gamma", 1.0)};
      } else if (kind == "Box") {
        const auto r = d.at("radii").get<std::vector<double>>();
        spec = BoxBudget{Eigen::Map<const Vector>(r.data(), static_cast<Eigen::Index>(r.size()))};
      } else {
        throw ConfigError("distance kind must be TwoNorm or Box");
      }
    }
    const RewardModel model(std::move(theta), d_i, 0.0);
    const CopSolution sol = solve_cop(model, ctx, spec);
    const Vector full = sol.recourse.full();
    json out{{"action", sol.action},
             {"recourse", std::vector<double>(full.data(), full.data() + full.size())},
             {"value", sol.value}};
    std::cout << out.dump(2) << '\n';
    return 0;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("expected {theta, d_immutable, context, distance}: ") + e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

int cmd_serve(const std::string& host, unsigned short port, const std::string& log_dir) {
  SessionManager sessions(log_dir);
  HttpServer server(sessions, host, port);
  std::cout << "listening on " << host << ':' << server.port() << std::endl;
  server.start();
  // Stop from a helper thread: HttpServer::stop joins threads and must not
  // run inside the signal handler itself.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.wait();
  waiter.detach();
  sessions.shutdown();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear recourse bandits: experiments, sweeps, COP solves, live sessions"};
  app.require_subcommand(1);

  Overrides run_opts, sweep_opts;
  auto* run = app.add_subcommand("run", "run policies over seeds and write run logs");
  add_common(run, run_opts);

  auto* sweep = app.add_subcommand("sweep", "HR-Bandit over a grid of zeta / Delta / q");
  add_common(sweep, sweep_opts);
  std::string grid_zeta, grid_delta, grid_q;
  sweep->add_option("--grid-zeta", grid_zeta, "comma-separated zeta values");
  sweep->add_option("--grid-delta", grid_delta, "comma-separated Delta values");
  sweep->add_option("--grid-q", grid_q, "comma-separated q values");

  auto* cop = app.add_subcommand("solve-cop", "solve one counterfactual problem under a known model");
  std::string cop_input;
  cop->add_option("input", cop_input, "JSON file {theta, d_immutable, context, distance}; - for stdin");

  auto* serve = app.add_subcommand("serve", "HTTP/WebSocket session service");
  std::string host = "127.0.0.1";
  unsigned short port = 8080;
  std::string log_dir = "runs/sessions";
  serve->add_option("--host", host, "listen address");
  serve->add_option("--port", port, "listen port (0: any free port)");
  serve->add_option("--log-dir", log_dir, "where finished session logs are written");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts, grid_zeta, grid_delta, grid_q);
    if (*cop) return cmd_solve_cop(cop_input);
    if (*serve) return cmd_serve(host, port, log_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
