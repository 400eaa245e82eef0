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

#ifndef COTUNE_ORACLE_HPP_
#define COTUNE_ORACLE_HPP_

#include "cotune/engine.hpp"
#include "cotune/ocp.hpp"
#include "cotune/pdp.hpp"
#include "cotune/solver.hpp"

namespace cotune {

/// Solver settings for oracle re-solves: the stationarity tolerance is
/// pushed well below finite-difference truncation error so solver noise
/// does not pollute the differences.
SolverOptions oracle_solver_options(SolverOptions base = {});

/// Brute-force reference for the trajectory sensitivity: column j is
/// (xi(theta + h_j e_j) - xi(theta - h_j e_j)) / (2 h_j) with
/// h_j = step * (1 + |theta_j|) and every perturbed problem re-solved to
/// tight tolerance, warm-started from the base solution. Throws
/// std::runtime_error naming the column when a perturbed solve fails.
TrajectorySensitivity fd_trajectory_sensitivity(const OcProblem& p, const Vector& theta,
                                                double step = 1e-5,
                                                const SolverOptions& opts = {});

/// Brute-force reference for the total loss derivative dL/dtheta, central
/// differences of theta -> L(xi(theta), theta).
Vector fd_loss_gradient(const Agent& agent, double step = 1e-5,
                        const SolverOptions& opts = {});

struct CentralizedResult {
  Vector theta;
  double grad_norm = 0.0;  // at the returned theta
};

/// Plain gradient descent on the team-average loss with one shared
/// parameter vector and exact chain-rule gradients; the ground truth the
/// distributed update is compared against. Overwrites the agents' theta
/// and solve caches.
CentralizedResult centralized_reference(std::vector<Agent>& agents, const Vector& theta0,
                                        const StepSchedule& steps, int rounds,
                                        const SolverOptions& opts = {});

}  // namespace cotune

#endif  // COTUNE_ORACLE_HPP_
