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

#ifndef COTUNE_PROBLEMS_HPP_
#define COTUNE_PROBLEMS_HPP_

#include <cstdint>
#include <vector>

#include "cotune/consensus.hpp"
#include "cotune/engine.hpp"
#include "cotune/ocp.hpp"

namespace cotune {

/// Cost weights of the rendezvous benchmark: running position tracking,
/// control effort, terminal tracking, and the team loss scale.
struct RendezvousWeights {
  double track = 2.0;
  double control = 1.0;
  double terminal = 5.0;
  double loss = 100.0;
};

/// Unicycle rendezvous fleet. Empty initial_states/initial_params are
/// filled deterministically from the seed: positions uniform in [-2, 2]^2,
/// headings uniform in [-pi, pi], parameters uniform in [-2, 2]^2.
struct RendezvousConfig {
  int num_agents = 5;
  int horizon = 60;
  double delta = 0.1;  // Euler step, seconds
  RendezvousWeights weights;
  std::vector<Vector> initial_states;  // 3-vectors (px, py, psi)
  std::vector<Vector> initial_params;  // 2-vectors
  std::uint64_t seed = 0;
};

/// Continuous unicycle velocity field: (v cos psi, v sin psi, omega).
Vector unicycle_dynamics(const Vector& x, const Vector& u);

/// One forward-Euler step x + delta * f_c(x, u).
Vector unicycle_euler_step(const Vector& x, const Vector& u, double delta);

/// Fills in any missing random initialization (in place) from config.seed.
RendezvousConfig resolve_rendezvous_init(RendezvousConfig config);

/// Builds agent i of the rendezvous fleet: Euler-discretized unicycle
/// dynamics, running cost track*||p - theta||^2 + control*||u||^2,
/// terminal cost terminal*||p_T - theta||^2, and team loss
/// loss*||p_T - theta||^2, all with analytic first and second derivatives.
Agent make_rendezvous_agent(const RendezvousConfig& config, int agent_index);

std::vector<Agent> make_rendezvous_agents(const RendezvousConfig& config);

/// The canonical periodic schedule: the undirected ring on num_agents
/// nodes split round-robin into three sparse per-round graphs, so no
/// single round is connected for N >= 4 but any three consecutive rounds
/// union to the full ring.
GraphSchedule canonical_rendezvous_schedule(int num_agents = 5);

/// Linear-quadratic test family: dynamics x' = A x + B u, running cost
/// 0.5*||x - Cr theta||^2_Q + 0.5*||u||^2_R, terminal cost
/// 0.5*||x_T - Ct theta||^2_Qf. The parameter enters the cost targets
/// linearly, so the optimal trajectory is affine in theta.
struct LqrSpec {
  Matrix A, B;               // n x n, n x m
  Matrix Q, R, Qf;           // n x n, m x m, n x n
  Matrix running_target;     // Cr: n x r
  Matrix terminal_target;    // Ct: n x r
  Vector x0;
  int T = 1;
};

OcProblem make_lqr_problem(const LqrSpec& spec);

/// The one-step scalar instance x' = x + u, c = u^2/2, h = (x_T - theta)^2/2
/// from x0 = 0; optimal control u0 = theta/2.
LqrSpec scalar_tracking_lqr();

}  // namespace cotune

#endif  // COTUNE_PROBLEMS_HPP_
