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

#ifndef RECOURSE_ENVIRONMENTS_HPP
#define RECOURSE_ENVIRONMENTS_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "recourse/model.hpp"

namespace recourse {

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

// Column layout of a CSV file and the role of each column.
struct Schema {
  std::string name;
  bool has_header = true;
  std::vector<std::string> columns;     // column names when the file has no header
  std::vector<std::string> features;    // numeric covariates, in this order
  std::vector<std::string> actionable;  // subset of `features` a recourse may move
  std::string treatment;
  std::map<std::string, int> treatment_map;  // cell text -> arm; empty means numeric 0/1
  std::optional<std::string> outcome;
  std::optional<std::string> label;
  std::map<std::string, std::string> label_map;  // cell text -> label

  static Schema from_json(const nlohmann::json& j);
  static Schema load(const std::string& path);
  nlohmann::json to_json() const;

  static Schema fertility();
  static Schema ihdp();
};

struct DatasetTable {
  std::vector<std::string> feature_names;
  Matrix features;  // rows x features
  std::vector<int> treatment;
  std::optional<Vector> outcome;
  std::vector<std::string> labels;  // empty unless the schema has a label column
  std::size_t dropped_rows = 0;
  std::string provenance;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  Vector column(const std::string& feature) const;
};

DatasetTable parse_csv(std::istream& in, const Schema& schema, const std::string& provenance);
DatasetTable load_csv(const std::string& path, const Schema& schema);

// Ordinary least squares per treatment arm. `design` already carries any
// intercept column.
struct OlsFit {
  std::vector<Vector> coefficients;  // one per arm
  std::vector<std::size_t> arm_rows;
};

OlsFit fit_per_arm_ols(const Matrix& design, const Vector& target, const std::vector<int>& arm,
                       std::size_t num_arms);

struct GaussianContexts {};  // x ~ N(0, I_d)
struct DatasetContexts {
  std::vector<Context> rows;
};
using ContextSource = std::variant<GaussianContexts, DatasetContexts>;

// What went into a semi-synthetic ground truth.
struct FitReport {
  Matrix design;    // standardized covariates with the constant column, context order
  Vector target;    // outcomes the arms were fitted on
  std::vector<int> arm;
  OlsFit ols;
  Vector feature_mean;
  Vector feature_scale;
};

struct Environment {
  std::string name;
  RewardModel model;
  DistanceSpec budget = TwoNormBudget{1.0};
  std::vector<bool> actionable_mask;  // over the full context, immutable block first
  std::vector<std::string> feature_labels;
  ContextSource contexts;
  double context_norm_bound = 1.0;  // default beta_X
  std::optional<FitReport> fit;

  void validate() const;
  std::size_t num_actions() const { return model.num_actions(); }
};

struct SyntheticOptions {
  std::size_t dim = 5;
  std::size_t num_actions = 2;
  double noise_sd = 1.0;
  double gamma = 1.0;
  std::uint64_t seed = 0;
};

// theta_a ~ N(0, I_d), x ~ N(0, I_d), every feature actionable, two-norm budget.
Environment build_synthetic(const SyntheticOptions& options);

struct SemiSyntheticOptions {
  double gamma = 1.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;  // outcome synthesis
};

inline constexpr double kNormalOutcomeMean = 5.0;

// Fertility: outcome N(5,1) for a normal diagnosis and N(0,1) otherwise,
// treatment = surgical intervention, actionable = alcohol, smoking, sitting.
Environment build_fertility(const DatasetTable& table, const SemiSyntheticOptions& options = {});

// IHDP: first five covariates, all actionable, recorded outcome. No
// intercept column, so d = 5.
Environment build_ihdp(const DatasetTable& table, const SemiSyntheticOptions& options = {});

// Per-session stream of patients. i.i.d. for Gaussian sources; a shuffled
// cycle through the rows for datasets.
class ContextStream {
 public:
  ContextStream(const Environment& env, std::uint64_t seed);
  Context next();

 private:
  const Environment* env_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// Reward of implementing `recourse` (full adherence) for the patient whose
// original context is `original`.
double realize(const Environment& env, const Context& original, ActionIndex action,
               const Context& recourse, Rng& rng);

}  // namespace recourse

#endif  // RECOURSE_ENVIRONMENTS_HPP
