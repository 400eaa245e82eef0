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

#ifndef COTUNE_PDP_HPP_
#define COTUNE_PDP_HPP_

#include <utility>
#include <vector>

#include "cotune/ocp.hpp"
#include "cotune/solver.hpp"

namespace cotune {

/// Coefficient matrices of the auxiliary LQR built around a solved
/// trajectory: the dynamics Jacobians F_t, G_t, E_t and the Hamiltonian
/// Hessian blocks. Huu and Hxx blocks are symmetric; the ux block is the
/// transpose of Hxu and is not stored separately.
struct PdpCoefficients {
  std::vector<Matrix> F;        // n x n, t = 0..T-1
  std::vector<Matrix> G;        // n x m
  std::vector<Matrix> E;        // n x r
  std::vector<Matrix> Hxx;      // n x n
  std::vector<Matrix> Hxu;      // n x m
  std::vector<Matrix> Huu;      // m x m
  std::vector<Matrix> Hxtheta;  // n x r
  std::vector<Matrix> Hutheta;  // m x r
  Matrix terminal_Hxx;          // n x n
  Matrix terminal_Hxtheta;      // n x r

  int horizon() const { return static_cast<int>(F.size()); }
};

/// Backward Riccati-style pass over the auxiliary LQR.
struct RiccatiPass {
  std::vector<Matrix> P;  // n x n, t = 0..T
  std::vector<Matrix> W;  // n x r, t = 0..T
  // Aggregates per step t = 0..T-1:
  std::vector<Matrix> A;  // F - G Huu^{-1} Hux
  std::vector<Matrix> R;  // G Huu^{-1} G'
  std::vector<Matrix> M;  // E - G Huu^{-1} Hutheta
  std::vector<Matrix> Q;  // Hxx - Hxu Huu^{-1} Hux
  std::vector<Matrix> N;  // Hxtheta - Hxu Huu^{-1} Hutheta
};

/// Exact Jacobians of the optimal trajectory with respect to theta:
/// X_t = dx_t/dtheta (X_0 = 0) and U_t = du_t/dtheta.
struct TrajectorySensitivity {
  std::vector<Matrix> X;  // n x r, t = 0..T
  std::vector<Matrix> U;  // m x r, t = 0..T-1

  /// Stacks the blocks in pack_trajectory order into an a x r matrix,
  /// i.e. the Jacobian of the packed trajectory.
  Matrix packed() const;
};

/// Evaluates the auxiliary-LQR coefficients on a solved trajectory and its
/// costates. Symmetric blocks are symmetrized to machine precision.
PdpCoefficients assemble_coefficients(const OcProblem& p, const Vector& theta,
                                      const Trajectory& traj, const Costates& costates);

/// Runs the backward recursion
///   P_t = Q_t + A_t' (I + P_{t+1} R_t)^{-1} P_{t+1} A_t
///   W_t = A_t' (I + P_{t+1} R_t)^{-1} (W_{t+1} + P_{t+1} M_t) + N_t
/// from P_T = terminal_Hxx, W_T = terminal_Hxtheta.
///
/// Throws std::runtime_error naming t when some Huu_t is singular (the
/// second-order sufficient optimality condition fails there) or when some
/// (I + P_{t+1} R_t) is singular.
RiccatiPass backward_recursion(const PdpCoefficients& coeffs);

/// Forward substitution producing the stationary solution of the auxiliary
/// LQR: U_t from the gain equation and X_{t+1} = F_t X_t + G_t U_t + E_t,
/// starting at X_0 = 0.
TrajectorySensitivity forward_sensitivity(const PdpCoefficients& coeffs,
                                          const RiccatiPass& pass);

/// Solves the problem at theta and differentiates the optimal trajectory:
/// solve, assemble, backward, forward. Throws std::runtime_error when the
/// solve does not converge, since the sensitivity is only defined at a
/// stationary trajectory.
std::pair<SolveResult, TrajectorySensitivity> trajectory_gradient(
    const OcProblem& p, const Vector& theta, const SolverOptions& opts = {},
    const std::vector<Vector>* warm_start = nullptr);

}  // namespace cotune

#endif  // COTUNE_PDP_HPP_
