/*
 * Copyright 2026 The cotune Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cotune/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cotune {

namespace {

void check_node(const char* where, int node, int num_nodes) {
  if (node < 0 || node >= num_nodes) {
    throw std::out_of_range(std::string(where) + ": node " + std::to_string(node) +
                            " outside [0, " + std::to_string(num_nodes) + ")");
  }
}

// Breadth-first reachability over an adjacency matrix; forward==false
// walks reversed edges.
bool all_reachable_from_zero(const std::vector<std::vector<bool>>& adj, bool forward) {
  const int n = static_cast<int>(adj.size());
  std::vector<bool> seen(n, false);
  std::vector<int> stack = {0};
  seen[0] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w = 0; w < n; ++w) {
      const bool connected = forward ? adj[v][w] : adj[w][v];
      if (connected && !seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

bool strongly_connected(const std::vector<std::vector<bool>>& adj) {
  return all_reachable_from_zero(adj, true) && all_reachable_from_zero(adj, false);
}

}  // namespace

Digraph::Digraph(int num_nodes) : num_nodes_(num_nodes) {
  if (num_nodes < 1) throw std::invalid_argument("Digraph: need at least one node");
}

void Digraph::add_edge(int from, int to) {
  check_node("Digraph::add_edge", from, num_nodes_);
  check_node("Digraph::add_edge", to, num_nodes_);
  if (from == to) return;  // self-loops are implicit
  if (!has_edge(from, to)) edges_.emplace_back(from, to);
}

void Digraph::add_undirected(int a, int b) {
  add_edge(a, b);
  add_edge(b, a);
}

bool Digraph::has_edge(int from, int to) const {
  return std::find(edges_.begin(), edges_.end(), std::make_pair(from, to)) != edges_.end();
}

bool Digraph::symmetric() const {
  return std::all_of(edges_.begin(), edges_.end(),
                     [this](const auto& e) { return has_edge(e.second, e.first); });
}

int Digraph::degree(int i) const {
  check_node("Digraph::degree", i, num_nodes_);
  int d = 0;
  for (const auto& [from, to] : edges_) {
    if (to == i) ++d;
  }
  return d;
}

GraphSchedule::GraphSchedule(std::vector<Digraph> graphs, int tau)
    : graphs_(std::move(graphs)), tau_(tau) {
  if (graphs_.empty()) throw std::invalid_argument("GraphSchedule: needs at least one graph");
  if (tau_ < 0) throw std::invalid_argument("GraphSchedule: tau must be non-negative");
  for (const Digraph& g : graphs_) {
    if (g.num_nodes() != graphs_.front().num_nodes()) {
      throw std::invalid_argument("GraphSchedule: graphs must share the node count");
    }
  }
}

const Digraph& GraphSchedule::graph(int k) const {
  if (k < 0) throw std::out_of_range("GraphSchedule::graph: k must be non-negative");
  const int idx = k >= tau_ ? (k - tau_) % period() : k % period();
  return graphs_[static_cast<std::size_t>(idx)];
}

ConsensusWeights metropolis_weights(const Digraph& g) {
  if (!g.symmetric()) {
    throw std::invalid_argument(
        "metropolis_weights: graph must be symmetric (undirected); Metropolis weights are "
        "undefined on directed graphs");
  }
  const int n = g.num_nodes();
  Matrix W = Matrix::Zero(n, n);
  for (const auto& [j, i] : g.edges()) {
    W(i, j) = 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
  }
  for (int i = 0; i < n; ++i) {
    W(i, i) = 1.0 - W.row(i).sum();
  }
  return ConsensusWeights{std::move(W)};
}

StochasticityReport check_doubly_stochastic(const Matrix& W, double tol) {
  if (W.rows() != W.cols()) {
    throw std::invalid_argument("check_doubly_stochastic: matrix must be square");
  }
  StochasticityReport report;
  for (int i = 0; i < W.rows() && !report.has_negative; ++i) {
    for (int j = 0; j < W.cols(); ++j) {
      if (W(i, j) < 0.0) {
        report.has_negative = true;
        report.negative_row = i;
        report.negative_col = j;
        break;
      }
    }
  }
  for (int i = 0; i < W.rows(); ++i) {
    report.max_row_deviation = std::max(report.max_row_deviation, std::abs(W.row(i).sum() - 1.0));
    report.max_col_deviation = std::max(report.max_col_deviation, std::abs(W.col(i).sum() - 1.0));
  }
  report.pass = !report.has_negative && report.max_row_deviation <= tol &&
                report.max_col_deviation <= tol;
  return report;
}

bool check_joint_connectivity(const GraphSchedule& schedule, int l, int tau) {
  if (l < 1) throw std::invalid_argument("check_joint_connectivity: l must be >= 1");
  const int n = schedule.num_nodes();
  // Window starts k*l+1+tau repeat modulo the period; one period of k
  // values covers every distinct window.
  for (int k = 0; k < schedule.period(); ++k) {
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) adj[i][i] = true;
    const int start = k * l + 1 + tau;
    for (int round = start; round < start + l; ++round) {
      for (const auto& [from, to] : schedule.graph(round).edges()) {
        adj[from][to] = true;
      }
    }
    if (!strongly_connected(adj)) return false;
  }
  return true;
}

std::vector<Vector> consensus_step(const std::vector<Vector>& thetas,
                                   const ConsensusWeights& weights,
                                   const std::vector<Vector>& grads, double eta) {
  const int n = static_cast<int>(thetas.size());
  if (weights.W.rows() != n || weights.W.cols() != n) {
    throw std::invalid_argument("consensus_step: weight matrix does not match agent count");
  }
  if (static_cast<int>(grads.size()) != n) {
    throw std::invalid_argument("consensus_step: one gradient per agent required");
  }
  const Eigen::Index r = n > 0 ? thetas[0].size() : 0;
  for (int i = 0; i < n; ++i) {
    if (thetas[i].size() != r || grads[i].size() != r) {
      throw std::invalid_argument("consensus_step: parameter/gradient length mismatch at agent " +
                                  std::to_string(i));
    }
  }

  std::vector<Vector> next(thetas.size());
  for (int i = 0; i < n; ++i) {
    Vector mixed = Vector::Zero(r);
    for (int j = 0; j < n; ++j) {
      mixed += weights.W(i, j) * thetas[j];
    }
    next[i] = mixed - eta * grads[i];
  }
  return next;
}

double step_size(const StepSchedule& schedule, int k) {
  if (k < 0) throw std::invalid_argument("step_size: k must be non-negative");
  if (schedule.eta0 <= 0.0) throw std::invalid_argument("step_size: eta0 must be positive");
  switch (schedule.kind) {
    case StepKind::kConstant:
      return schedule.eta0;
    case StepKind::kHarmonic:
      return schedule.eta0 / static_cast<double>(k + 1);
    case StepKind::kPower:
      if (schedule.exponent <= 0.5 || schedule.exponent > 1.0) {
        throw std::invalid_argument("step_size: power exponent must lie in (0.5, 1]");
      }
      return schedule.eta0 / std::pow(static_cast<double>(k + 1), schedule.exponent);
  }
  throw std::logic_error("step_size: unknown schedule kind");
}

}  // namespace cotune
