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

#ifndef COTUNE_SOLVER_HPP_
#define COTUNE_SOLVER_HPP_

#include <vector>

#include "cotune/ocp.hpp"

namespace cotune {

struct SolverOptions {
  int max_iterations = 200;
  double stationarity_tol = 1e-8;  // threshold on max_t ||dH_t/du_t||_inf
  double regularization_init = 1e-6;
  double regularization_growth = 10.0;
  double line_search_shrink = 0.5;  // in (0, 1)
};

struct SolveResult {
  Trajectory trajectory;
  Costates costates;
  double objective = 0.0;     // J on the returned trajectory
  double stationarity = 0.0;  // max_t ||dH_t/du_t||_inf on the returned trajectory
  int iterations = 0;
  bool converged = false;     // implies stationarity <= stationarity_tol
};

/// Forward rollout of a control sequence from the problem's x0. Throws
/// std::runtime_error naming the time step if the dynamics produce
/// non-finite values.
Trajectory rollout(const OcProblem& p, const Vector& theta,
                   const std::vector<Vector>& controls);

/// Objective J = sum_t c(t, x_t, u_t, theta) + h(x_T, theta).
double trajectory_cost(const OcProblem& p, const Vector& theta, const Trajectory& traj);

/// Backward multiplier recursion on a dynamically feasible trajectory:
/// lambda_T = dh/dx_T and lambda_t = dc_t/dx_t + (df/dx_t)' lambda_{t+1}
/// for t = T-1, ..., 1.
Costates compute_costates(const OcProblem& p, const Vector& theta, const Trajectory& traj);

/// max over t of || dc_t/du_t + (df/du_t)' lambda_{t+1} ||_inf, the
/// first-order optimality residual of the control sequence.
double stationarity_residual(const OcProblem& p, const Vector& theta, const Trajectory& traj,
                             const Costates& costates);

/// Solves the optimal control problem for a fixed theta with an iterative
/// LQR sweep: quadratic backward pass with Levenberg regularization on the
/// control Hessian, closed-loop forward rollout with backtracking line
/// search, convergence declared on the stationarity residual.
///
/// Non-convergence within max_iterations is reported through the result
/// flag, not an exception. The returned states are exactly the rollout of
/// the returned controls, and the costates are recomputed on the final
/// trajectory from the multiplier recursion.
SolveResult solve_oc(const OcProblem& p, const Vector& theta,
                     const std::vector<Vector>* warm_start = nullptr,
                     const SolverOptions& opts = {});

}  // namespace cotune

#endif  // COTUNE_SOLVER_HPP_
