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

#ifndef COTUNE_ENGINE_HPP_
#define COTUNE_ENGINE_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cotune/consensus.hpp"
#include "cotune/ocp.hpp"
#include "cotune/pdp.hpp"
#include "cotune/solver.hpp"

namespace cotune {

/// One optimal-control system plus the loss it contributes to the team
/// objective. The loss takes the packed trajectory (pack_trajectory order)
/// and the parameter; its partial derivatives are supplied analytically.
struct Agent {
  OcProblem problem;
  std::function<double(const Vector& xi, const Vector& theta)> loss;
  std::function<Vector(const Vector& xi, const Vector& theta)> loss_xi;     // length a
  std::function<Vector(const Vector& xi, const Vector& theta)> loss_theta;  // length r
  Vector theta;
  std::optional<SolveResult> last_solve;
};

struct RoundRecord {
  int round = 0;
  double global_avg_loss = 0.0;
  double relative_loss = 1.0;  // loss(k) / loss(0)
  double disagreement = 0.0;
  std::vector<Vector> thetas;
  std::vector<double> grad_norms;
  std::vector<int> solver_iterations;
  std::vector<bool> converged;
};

struct TuningTrace {
  std::vector<RoundRecord> rounds;
};

/// Optional early-stop rule: stop once disagreement and the max gradient
/// norm both fall below their thresholds.
struct StopRule {
  double disagreement_tol = 0.0;
  double grad_norm_tol = 0.0;
};

struct TuneOptions {
  int rounds = 1;
  std::optional<StopRule> stop;
  SolverOptions solver;
  bool parallel = true;  // per-agent solves within a round may run on threads
};

/// Outcome of a tuning run. When an agent's solve or sensitivity fails
/// irrecoverably the run aborts at that round; the trace holds every
/// completed round.
struct TuneResult {
  TuningTrace trace;
  bool aborted = false;
  int abort_round = -1;
  std::string error;
};

/// Total loss derivative dL/dtheta = (dL/dxi) (dxi/dtheta) + dL/dtheta,
/// with the trajectory Jacobian from the sensitivity recursions. Solves
/// the agent's problem at its current theta (warm-started from the cached
/// solve when present) and refreshes the cache.
Vector local_loss_gradient(Agent& agent, const SolverOptions& opts = {});

/// Team-average loss (1/N) sum_i L_i(xi_i(theta_i), theta_i); every
/// trajectory is freshly solved at the given parameters.
double global_loss(const std::vector<Agent>& agents, const std::vector<Vector>& thetas,
                   const SolverOptions& opts = {});

/// sum_i sum_j ||theta_i - theta_j||^2 (each unordered pair counted twice).
double disagreement(const std::vector<Vector>& thetas);

/// Runs the cooperative tuning loop: per round every agent solves its
/// problem at theta_i(k) and evaluates its chain-rule gradient, Metropolis
/// weights are built from the scheduled graph, and one consensus step
/// produces theta(k+1). Records one trace row per completed round.
TuneResult tune(std::vector<Agent>& agents, const GraphSchedule& schedule,
                const StepSchedule& steps, const TuneOptions& opts);

}  // namespace cotune

#endif  // COTUNE_ENGINE_HPP_
