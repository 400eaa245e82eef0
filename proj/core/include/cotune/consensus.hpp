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

#ifndef COTUNE_CONSENSUS_HPP_
#define COTUNE_CONSENSUS_HPP_

#include <utility>
#include <vector>

#include "cotune/ocp.hpp"

namespace cotune {

/// Directed communication graph on nodes 0..N-1. An edge (from, to) means
/// node `to` hears node `from`. Self-loops are implicit (every node hears
/// itself) and explicit (i, i) edges are ignored; duplicate insertions are
/// idempotent.
class Digraph {
 public:
  explicit Digraph(int num_nodes);

  int num_nodes() const { return num_nodes_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  void add_edge(int from, int to);
  void add_undirected(int a, int b);
  bool has_edge(int from, int to) const;

  /// True when every edge has its reverse, i.e. the graph is undirected.
  bool symmetric() const;

  /// Number of distinct in-neighbors of node i, self excluded.
  int degree(int i) const;

 private:
  int num_nodes_ = 0;
  std::vector<std::pair<int, int>> edges_;
};

/// One round's mixing matrix. Valid weights are non-negative, row- and
/// column-stochastic, and supported on the graph plus the diagonal.
struct ConsensusWeights {
  Matrix W;
};

struct StochasticityReport {
  double max_row_deviation = 0.0;
  double max_col_deviation = 0.0;
  bool has_negative = false;
  int negative_row = -1;
  int negative_col = -1;
  bool pass = false;
};

/// Periodic graph schedule: graph(k) = graphs[(k - tau) mod period] for
/// k >= tau and graphs[k mod period] before, so the schedule is defined
/// for every k >= 0.
class GraphSchedule {
 public:
  GraphSchedule(std::vector<Digraph> graphs, int tau = 0);

  int period() const { return static_cast<int>(graphs_.size()); }
  int tau() const { return tau_; }
  int num_nodes() const { return graphs_.front().num_nodes(); }
  const std::vector<Digraph>& graphs() const { return graphs_; }
  const Digraph& graph(int k) const;

 private:
  std::vector<Digraph> graphs_;
  int tau_ = 0;
};

enum class StepKind { kConstant, kHarmonic, kPower };

/// Step-size schedule. kConstant returns eta0 for every round; kHarmonic
/// returns eta0/(k+1); kPower returns eta0/(k+1)^p with p in (0.5, 1], so
/// the diminishing kinds have divergent sum and convergent sum of squares.
struct StepSchedule {
  StepKind kind = StepKind::kConstant;
  double eta0 = 0.1;
  double exponent = 1.0;  // p, only used by kPower
};

/// Metropolis weights on an undirected graph: W(i,j) = 1/(1 + max(d_i, d_j))
/// across each edge, diagonal filling the remainder. Doubly stochastic by
/// construction. Throws std::invalid_argument on an asymmetric graph.
ConsensusWeights metropolis_weights(const Digraph& g);

/// Row/column sum deviations of a square non-negative matrix.
StochasticityReport check_doubly_stochastic(const Matrix& W, double tol);

/// True iff for every window of l consecutive rounds starting at k*l+1+tau
/// the union of the scheduled graphs is strongly connected. One period of
/// window starts is examined, which covers all cases by periodicity.
bool check_joint_connectivity(const GraphSchedule& schedule, int l, int tau);

/// One synchronous update: theta_i' = sum_j W(i,j) theta_j - eta * grad_i.
std::vector<Vector> consensus_step(const std::vector<Vector>& thetas,
                                   const ConsensusWeights& weights,
                                   const std::vector<Vector>& grads, double eta);

double step_size(const StepSchedule& schedule, int k);

}  // namespace cotune

#endif  // COTUNE_CONSENSUS_HPP_
