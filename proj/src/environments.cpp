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

#include "recourse/environments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace recourse {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("column '" + name + "' not found");
  return static_cast<std::size_t>(it - header.begin());
}

Environment build_from_table(const std::string& name, const DatasetTable& table,
                             const std::vector<std::string>& use_features,
                             const std::vector<std::string>& actionable, const Vector& target,
                             bool intercept, const SemiSyntheticOptions& options) {
  std::vector<std::string> immutable_names;
  std::vector<std::string> actionable_names;
  for (const auto& f : use_features) {
    if (std::find(actionable.begin(), actionable.end(), f) != actionable.end())
      actionable_names.push_back(f);
    else
      immutable_names.push_back(f);
  }
  if (actionable_names.empty()) throw SchemaError(name + ": no actionable feature selected");

  std::vector<std::string> ordered = immutable_names;
  ordered.insert(ordered.end(), actionable_names.begin(), actionable_names.end());

  const auto n = static_cast<Eigen::Index>(table.rows());
  const auto p = static_cast<Eigen::Index>(ordered.size());
  const Eigen::Index offset = intercept ? 1 : 0;
  FitReport report;
  report.feature_mean.resize(p);
  report.feature_scale.resize(p);
  report.design.resize(n, p + offset);
  if (intercept) report.design.col(0).setOnes();
  for (Eigen::Index j = 0; j < p; ++j) {
    const Vector col = table.column(ordered[static_cast<std::size_t>(j)]);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().mean();
    const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
    report.feature_mean(j) = mean;
    report.feature_scale(j) = scale;
    report.design.col(j + offset) = (col.array() - mean) / scale;
  }
  report.target = target;
  report.arm = table.treatment;
  report.ols = fit_per_arm_ols(report.design, target, table.treatment, 2);

  Environment env;
  env.name = name;
  const std::size_t immutable_dim = static_cast<std::size_t>(offset) + immutable_names.size();
  env.model = RewardModel(report.ols.coefficients, immutable_dim, options.noise_sd);
  env.budget = TwoNormBudget{options.gamma};
  if (intercept) env.feature_labels.push_back("intercept");
  env.feature_labels.insert(env.feature_labels.end(), ordered.begin(), ordered.end());
  env.actionable_mask.assign(immutable_dim + actionable_names.size(), false);
  std::fill(env.actionable_mask.begin() + static_cast<std::ptrdiff_t>(immutable_dim),
            env.actionable_mask.end(), true);

  DatasetContexts rows;
  double max_norm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector x = report.design.row(i).transpose();
    max_norm = std::max(max_norm, x.norm());
    rows.rows.push_back(Context::from_full(x, immutable_dim));
  }
  env.contexts = std::move(rows);
  env.context_norm_bound = max_norm + options.gamma;
  env.fit = std::move(report);
  env.validate();
  return env;
}

}  // namespace

Schema Schema::from_json(const nlohmann::json& j) {
  try {
    Schema s;
    s.name = j.value("name", std::string("dataset"));
    s.has_header = j.value("has_header", true);
    s.columns = j.value("columns", std::vector<std::string>{});
    s.features = j.at("features").get<std::vector<std::string>>();
    s.actionable = j.value("actionable", std::vector<std::string>{});
    s.treatment = j.at("treatment").get<std::string>();
    s.treatment_map = j.value("treatment_map", std::map<std::string, int>{});
    if (j.contains("outcome") && !j.at("outcome").is_null())
      s.outcome = j.at("outcome").get<std::string>();
    if (j.contains("label") && !j.at("label").is_null()) {
      s.label = j.at("label").at("column").get<std::string>();
      s.label_map = j.at("label").value("map", std::map<std::string, std::string>{});
    }
    if (!s.has_header && s.columns.empty())
      throw SchemaError("schema without header must list its columns");
    for (const auto& a : s.actionable) {
      if (std::find(s.features.begin(), s.features.end(), a) == s.features.end())
        throw SchemaError("actionable feature '" + a + "' is not a declared feature");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }
}

Schema Schema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("schema " + path + " is not valid JSON: " + e.what());
  }
}

nlohmann::json Schema::to_json() const {
  nlohmann::json j{{"name", name},           {"has_header", has_header},
                   {"features", features},   {"actionable", actionable},
                   {"treatment", treatment}, {"treatment_map", treatment_map}};
  if (!columns.empty()) j["columns"] = columns;
  j["outcome"] = outcome ? nlohmann::json(*outcome) : nlohmann::json(nullptr);
  if (label) j["label"] = {{"column", *label}, {"map", label_map}};
  return j;
}

Schema Schema::fertility() {
  Schema s;
  s.name = "fertility";
  s.features = {"season", "age",     "childish_diseases", "accident",
                "high_fevers", "alcohol", "smoking", "sitting_hours"};
  s.actionable = {"alcohol", "smoking", "sitting_hours"};
  s.treatment = "surgical_intervention";
  // The UCI file codes yes as 0 and no as 1; arm 1 is "surgery".
  s.treatment_map = {{"0", 1}, {"1", 0}};
  s.label = "diagnosis";
  s.label_map = {{"N", "Normal"}, {"O", "Altered"}};
  return s;
}

Schema Schema::ihdp() {
  Schema s;
  s.name = "ihdp";
  s.has_header = false;
  s.columns = {"treatment", "y_factual", "y_cfactual", "mu0", "mu1"};
  for (int i = 1; i <= 25; ++i) s.features.push_back("x" + std::to_string(i));
  s.columns.insert(s.columns.end(), s.features.begin(), s.features.end());
  s.actionable.assign(s.features.begin(), s.features.begin() + 5);
  s.treatment = "treatment";
  s.outcome = "y_factual";
  return s;
}

Vector DatasetTable::column(const std::string& feature) const {
  const auto it = std::find(feature_names.begin(), feature_names.end(), feature);
  if (it == feature_names.end()) throw SchemaError("table has no feature '" + feature + "'");
  return features.col(it - feature_names.begin());
}

DatasetTable parse_csv(std::istream& in, const Schema& schema, const std::string& provenance) {
  std::string line;
  std::vector<std::string> header;
  if (schema.has_header) {
    while (std::getline(in, line) && trim(line).empty()) {
    }
    if (trim(line).empty()) throw SchemaError(provenance + ": missing header row");
    header = split_csv_line(line);
  } else {
    header = schema.columns;
  }

  std::vector<std::size_t> feature_cols;
  for (const auto& f : schema.features) feature_cols.push_back(column_index(header, f));
  const std::size_t treatment_col = column_index(header, schema.treatment);
  std::optional<std::size_t> outcome_col;
  if (schema.outcome) outcome_col = column_index(header, *schema.outcome);
  std::optional<std::size_t> label_col;
  if (schema.label) label_col = column_index(header, *schema.label);

  std::vector<std::vector<double>> rows;
  DatasetTable table;
  table.feature_names = schema.features;
  table.provenance = provenance;
  std::vector<double> outcomes;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < header.size()) {
      ++table.dropped_rows;
      continue;
    }
    std::vector<double> values;
    bool ok = true;
    for (const auto c : feature_cols) {
      const auto v = parse_number(cells[c]);
      if (!v) {
        ok = false;
        break;
      }
      values.push_back(*v);
    }
    int arm = -1;
    if (ok) {
      const std::string& cell = cells[treatment_col];
      if (!schema.treatment_map.empty()) {
        auto it = schema.treatment_map.find(cell);
        if (it == schema.treatment_map.end()) {
          // Numeric spellings such as "0.0" map through their integer value.
          if (const auto v = parse_number(cell); v && *v == std::round(*v))
            it = schema.treatment_map.find(std::to_string(static_cast<long>(*v)));
        }
        if (it != schema.treatment_map.end()) arm = it->second;
      } else if (const auto v = parse_number(cell); v && (*v == 0.0 || *v == 1.0)) {
        arm = static_cast<int>(*v);
      }
      ok = arm == 0 || arm == 1;
    }
    double outcome = 0.0;
    if (ok && outcome_col) {
      const auto v = parse_number(cells[*outcome_col]);
      ok = v.has_value();
      if (ok) outcome = *v;
    }
    std::string label;
    if (ok && label_col) {
      label = cells[*label_col];
      if (!schema.label_map.empty()) {
        const auto it = schema.label_map.find(label);
        ok = it != schema.label_map.end();
        if (ok) label = it->second;
      }
    }
    if (!ok) {
      ++table.dropped_rows;
      continue;
    }
    rows.push_back(std::move(values));
    table.treatment.push_back(arm);
    if (outcome_col) outcomes.push_back(outcome);
    if (label_col) table.labels.push_back(std::move(label));
  }

  table.features.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < feature_cols.size(); ++j)
      table.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  if (outcome_col)
    table.outcome = Eigen::Map<const Vector>(outcomes.data(), static_cast<Eigen::Index>(outcomes.size()));
  return table;
}

DatasetTable load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file " + path);
  return parse_csv(in, schema, path);
}

OlsFit fit_per_arm_ols(const Matrix& design, const Vector& target, const std::vector<int>& arm,
                       std::size_t num_arms) {
  if (design.rows() != target.size() || static_cast<std::size_t>(design.rows()) != arm.size())
    throw InvalidInput("design, target and arm lengths differ");
  OlsFit fit;
  const auto p = design.cols();
  for (std::size_t a = 0; a < num_arms; ++a) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < arm.size(); ++i)
      if (arm[i] == static_cast<int>(a)) idx.push_back(static_cast<Eigen::Index>(i));
    if (static_cast<Eigen::Index>(idx.size()) < p + 1) {
      throw DataError("arm " + std::to_string(a) + " has " + std::to_string(idx.size()) +
                      " rows; at least " + std::to_string(p + 1) + " are needed to fit " +
                      std::to_string(p) + " coefficients");
    }
    Matrix x(static_cast<Eigen::Index>(idx.size()), p);
    Vector y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = design.row(idx[r]);
      y(static_cast<Eigen::Index>(r)) = target(idx[r]);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    if (qr.rank() < p) throw DataError("arm " + std::to_string(a) + " design is rank deficient");
    fit.coefficients.push_back(qr.solve(y));
    fit.arm_rows.push_back(idx.size());
  }
  return fit;
}

void Environment::validate() const {
  if (actionable_mask.size() != model.dim())
    throw InvalidInput("actionable mask length must equal the context dimension");
  const auto n_act = static_cast<std::size_t>(
      std::count(actionable_mask.begin(), actionable_mask.end(), true));
  if (n_act == 0) throw InvalidInput("environment needs an actionable feature");
  if (n_act != model.actionable_dim())
    throw InvalidInput("actionable mask disagrees with the model split");
  for (std::size_t i = 0; i < actionable_mask.size(); ++i)
    if (actionable_mask[i] != (i >= model.immutable_dim()))
      throw InvalidInput("immutable features must precede actionable ones");
  if (!feature_labels.empty() && feature_labels.size() != model.dim())
    throw InvalidInput("one label per feature is required");
  recourse::validate(budget, model.actionable_dim());
}

Environment build_synthetic(const SyntheticOptions& options) {
  if (options.dim < 1 || options.num_actions < 1)
    throw InvalidInput("synthetic environment needs d >= 1 and K >= 1");
  Rng rng = make_rng(options.seed, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(options.dim);
  std::vector<Vector> theta;
  for (std::size_t a = 0; a < options.num_actions; ++a) {
    Vector t(d);
    for (Eigen::Index i = 0; i < d; ++i) t(i) = normal(rng);
    theta.push_back(std::move(t));
  }
  Environment env;
  env.name = "synthetic";
  env.model = RewardModel(std::move(theta), 0, options.noise_sd);
  env.budget = TwoNormBudget{options.gamma};
  env.actionable_mask.assign(options.dim, true);
  for (std::size_t i = 0; i < options.dim; ++i) env.feature_labels.push_back("x" + std::to_string(i + 1));
  env.contexts = GaussianContexts{};

  // beta_X from a pilot sample of the context distribution plus the budget.
  Rng pilot = make_rng(options.seed, 2);
  double max_norm = 0.0;
  for (int s = 0; s < 10000; ++s) {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double z = normal(pilot);
      sq += z * z;
    }
    max_norm = std::max(max_norm, std::sqrt(sq));
  }
  env.context_norm_bound = max_norm + options.gamma;
  env.validate();
  return env;
}

Environment build_fertility(const DatasetTable& table, const SemiSyntheticOptions& options) {
  if (table.labels.size() != table.rows())
    throw SchemaError("fertility table needs a diagnosis label per row");
  Rng rng = make_rng(options.seed, 0xf0u);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector outcome(static_cast<Eigen::Index>(table.rows()));
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const std::string& label = table.labels[i];
    const double z = normal(rng);
    if (label == "Normal") outcome(static_cast<Eigen::Index>(i)) = kNormalOutcomeMean + z;
    else if (label == "Altered") outcome(static_cast<Eigen::Index>(i)) = z;
    else throw DataError("unknown diagnosis label '" + label + "'");
  }
  const Schema fert = Schema::fertility();
  return build_from_table("fertility", table, table.feature_names, fert.actionable, outcome,
                          true, options);
}

Environment build_ihdp(const DatasetTable& table, const SemiSyntheticOptions& options) {
  if (!table.outcome) throw SchemaError("IHDP table needs an outcome column");
  if (table.feature_names.size() < 5) throw SchemaError("IHDP table needs at least 5 features");
  const std::vector<std::string> first5(table.feature_names.begin(), table.feature_names.begin() + 5);
  return build_from_table("ihdp", table, first5, first5, *table.outcome, false,
                          options);
}

ContextStream::ContextStream(const Environment& env, std::uint64_t seed)
    : env_(&env), rng_(make_rng(seed, 3)) {
  if (const auto* data = std::get_if<DatasetContexts>(&env.contexts)) {
    if (data->rows.empty()) throw InvalidInput("dataset environment has no rows");
    order_.resize(data->rows.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
  }
}

Context ContextStream::next() {
  if (const auto* data = std::get_if<DatasetContexts>(&env_->contexts)) {
    const Context& x = data->rows[order_[cursor_]];
    cursor_ = (cursor_ + 1) % order_.size();
    return x;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d_i = static_cast<Eigen::Index>(env_->model.immutable_dim());
  const auto d_m = static_cast<Eigen::Index>(env_->model.actionable_dim());
  Vector xi(d_i), xm(d_m);
  for (Eigen::Index i = 0; i < d_i; ++i) xi(i) = normal(rng_);
  for (Eigen::Index i = 0; i < d_m; ++i) xm(i) = normal(rng_);
  return Context(std::move(xi), std::move(xm));
}

double realize(const Environment& env, const Context& original, ActionIndex action,
               const Context& recourse, Rng& rng) {
  env.model.check_context(original);
  env.model.check_context(recourse);
  if (!(recourse.immutable == original.immutable))
    throw InvalidInput("recourse changed immutable features");
  if (!is_feasible(env.budget, original.actionable, recourse.actionable, 1e-6))
    throw InvalidInput("recourse violates the " + budget_name(env.budget) + " budget");
  return sample_reward(env.model, action, recourse, rng);
}

}  // namespace recourse
