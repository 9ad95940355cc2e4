// Copyright 2026 The AdaptPoint Authors
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

#pragma once

#include "adaptpoint/geom.hpp"

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace adaptpoint::nn {

using adaptpoint::Matrix;

/// A named trainable tensor. `grad` accumulates across backward passes until
/// it is zeroed.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

/// Owns the parameters of one model. Addresses are stable for the lifetime of
/// the store, so layers may keep raw pointers into it.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  /// Throws std::invalid_argument if the name is already taken.
  Parameter& add(const std::string& name, Matrix init);

  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  void zero_grad();
  std::size_t count() const { return params_.size(); }
  std::size_t scalar_count() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, Parameter*> by_name_;
};

class Graph;

/// Branch choices of piecewise ops (ReLU side, max-pool argmax, clamp and abs
/// branch) in evaluation order. A graph recording into the tape stores them;
/// a graph replaying it reuses them instead of deciding from its own values,
/// which keeps every evaluation on the same smooth piece.
class BranchTape {
 public:
  enum class Mode { kRecord, kReplay };

  void set_mode(Mode m) {
    mode_ = m;
    cursor_ = 0;
    if (m == Mode::kRecord) entries_.clear();
  }
  Mode mode() const { return mode_; }
  std::size_t size() const { return entries_.size(); }

  /// Records `branches`, or overwrites them with the next recorded entry.
  void resolve(std::vector<int>& branches);

 private:
  Mode mode_ = Mode::kRecord;
  std::vector<std::vector<int>> entries_;
  std::size_t cursor_ = 0;
};

/// Handle to a node of a Graph. Cheap to copy; valid while its graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* g, int id) : graph_(g), id_(id) {}

  Graph& graph() const { return *graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  bool requires_grad() const;

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so walking them
/// backwards is a valid topological order.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  /// A leaf that collects gradients in the graph (not in a Parameter).
  Var input(Matrix value);
  /// A leaf bound to a parameter; repeated calls return the same node. Frozen
  /// parameters enter as constants.
  Var param(Parameter& p);

  /// Parameters whose name starts with `prefix` enter this graph as constants.
  void freeze(std::string prefix) { frozen_prefixes_.push_back(std::move(prefix)); }
  bool is_frozen(const Parameter& p) const;

  /// Seeds d(out)/d(out) = 1 for a 1x1 node, propagates, then adds leaf
  /// gradients into their Parameters.
  void backward(Var out);

  std::size_t size() const { return nodes_.size(); }

  void set_branch_tape(BranchTape* tape) { tape_ = tape; }
  /// Called by piecewise ops with the branches chosen from their input.
  void resolve_branches(std::vector<int>& branches) {
    if (tape_ != nullptr) tape_->resolve(branches);
  }

  // Op-author interface.
  Var make(Matrix value, std::vector<int> parents, BackwardFn fn);
  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& grad(int id) const;
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  /// Gradient slot of a parent, zero-initialized on first use.
  Matrix& grad_slot(int id);
  const std::vector<int>& parents(int id) const { return nodes_[static_cast<std::size_t>(id)].parents; }
  const Matrix& upstream(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<int> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
    bool has_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
  std::vector<std::string> frozen_prefixes_;
  BranchTape* tape_ = nullptr;
  Matrix empty_;
};

inline const Matrix& Var::value() const { return graph_->value(id_); }
inline const Matrix& Var::grad() const { return graph_->grad(id_); }
inline bool Var::requires_grad() const { return graph_->requires_grad(id_); }

}  // namespace adaptpoint::nn
