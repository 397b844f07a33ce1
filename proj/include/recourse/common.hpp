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

#ifndef RECOURSE_COMMON_HPP
#define RECOURSE_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace recourse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

// Action indices are zero-based throughout the library and on every wire
// format.
using ActionIndex = std::size_t;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or malformed input data (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A patient context x = (x_I, x_M). The immutable part is never modified by a
// recourse; the actionable part is what a recourse moves.
struct Context {
  Vector immutable;
  Vector actionable;

  Context() = default;
  Context(Vector immutable_part, Vector actionable_part)
      : immutable(std::move(immutable_part)),
        actionable(std::move(actionable_part)) {}

  std::size_t immutable_dim() const { return static_cast<std::size_t>(immutable.size()); }
  std::size_t actionable_dim() const { return static_cast<std::size_t>(actionable.size()); }
  std::size_t dim() const { return immutable_dim() + actionable_dim(); }

  // Concatenation (x_I, x_M).
  Vector full() const {
    Vector x(immutable.size() + actionable.size());
    x << immutable, actionable;
    return x;
  }

  Context with_actionable(Vector new_actionable) const {
    return Context(immutable, std::move(new_actionable));
  }

  static Context from_full(const Vector& x, std::size_t immutable_dim) {
    const auto d_i = static_cast<Eigen::Index>(immutable_dim);
    if (d_i > x.size()) throw InvalidInput("immutable dimension exceeds context length");
    return Context(x.head(d_i), x.tail(x.size() - d_i));
  }

  bool operator==(const Context& other) const {
    return immutable.size() == other.immutable.size() &&
           actionable.size() == other.actionable.size() &&
           immutable == other.immutable && actionable == other.actionable;
  }
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

// Independent deterministic generator for sub-stream `stream` of `seed`.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

// Uniform draw on the unit sphere in R^dim.
inline Vector uniform_unit_vector(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(static_cast<Eigen::Index>(dim));
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
    norm = u.norm();
  } while (norm == 0.0);
  return u / norm;
}

}  // namespace recourse

#endif  // RECOURSE_COMMON_HPP
