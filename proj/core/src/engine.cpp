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

#include "cotune/engine.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace cotune {

Vector local_loss_gradient(Agent& agent, const SolverOptions& opts) {
  const std::vector<Vector>* warm =
      agent.last_solve ? &agent.last_solve->trajectory.controls : nullptr;
  auto [solve, sens] = trajectory_gradient(agent.problem, agent.theta, opts, warm);

  const Vector xi = pack_trajectory(solve.trajectory);
  const Vector dL_dxi = agent.loss_xi(xi, agent.theta);
  const Vector dL_dtheta = agent.loss_theta(xi, agent.theta);
  if (dL_dxi.size() != agent.problem.dims.trajectory_size()) {
    throw std::invalid_argument("local_loss_gradient: loss_xi has wrong length");
  }
  if (dL_dtheta.size() != agent.problem.dims.r) {
    throw std::invalid_argument("local_loss_gradient: loss_theta has wrong length");
  }

  Vector grad = sens.packed().transpose() * dL_dxi + dL_dtheta;
  agent.last_solve = std::move(solve);
  return grad;
}

double global_loss(const std::vector<Agent>& agents, const std::vector<Vector>& thetas,
                   const SolverOptions& opts) {
  if (agents.size() != thetas.size()) {
    throw std::invalid_argument("global_loss: one theta per agent required");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const SolveResult solve = solve_oc(agents[i].problem, thetas[i], nullptr, opts);
    total += agents[i].loss(pack_trajectory(solve.trajectory), thetas[i]);
  }
  return total / static_cast<double>(agents.size());
}

double disagreement(const std::vector<Vector>& thetas) {
  double total = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      if (thetas[i].size() != thetas[j].size()) {
        throw std::invalid_argument("disagreement: parameter length mismatch");
      }
      total += (thetas[i] - thetas[j]).squaredNorm();
    }
  }
  return total;
}

TuneResult tune(std::vector<Agent>& agents, const GraphSchedule& schedule,
                const StepSchedule& steps, const TuneOptions& opts) {
  const int N = static_cast<int>(agents.size());
  if (N < 1) throw std::invalid_argument("tune: need at least one agent");
  if (opts.rounds < 1) throw std::invalid_argument("tune: rounds must be >= 1");
  if (schedule.num_nodes() != N) {
    throw std::invalid_argument("tune: schedule is over " + std::to_string(schedule.num_nodes()) +
                                " nodes but there are " + std::to_string(N) + " agents");
  }
  for (const Digraph& g : schedule.graphs()) {
    if (!g.symmetric()) {
      throw std::invalid_argument("tune: every scheduled graph must be symmetric");
    }
  }

  TuneResult result;
  double initial_loss = 0.0;

  for (int k = 0; k < opts.rounds; ++k) {
    // (1) Solve and differentiate every agent at theta_i(k). Agents share
    // nothing, so the per-agent work may run on threads; each writes only
    // its own slot and the reduction below walks slots in index order, so
    // the trace is identical however the round is scheduled.
    std::vector<Vector> grads(N);
    std::vector<std::string> errors(N);
    auto run_agent = [&](int i) {
      try {
        grads[i] = local_loss_gradient(agents[i], opts.solver);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    };
    if (opts.parallel && N > 1) {
      std::vector<std::thread> workers;
      workers.reserve(N);
      for (int i = 0; i < N; ++i) workers.emplace_back(run_agent, i);
      for (std::thread& w : workers) w.join();
    } else {
      for (int i = 0; i < N; ++i) run_agent(i);
    }
    for (int i = 0; i < N; ++i) {
      if (!errors[i].empty()) {
        result.aborted = true;
        result.abort_round = k;
        result.error =
            "agent " + std::to_string(i) + " failed at round " + std::to_string(k) + ": " +
            errors[i];
        return result;
      }
    }

    // (2) Metrics at theta(k), reusing the round's solves.
    std::vector<Vector> thetas(N);
    for (int i = 0; i < N; ++i) thetas[i] = agents[i].theta;

    RoundRecord record;
    record.round = k;
    record.thetas = thetas;
    record.disagreement = disagreement(thetas);
    double total_loss = 0.0;
    for (int i = 0; i < N; ++i) {
      const SolveResult& solve = *agents[i].last_solve;
      total_loss += agents[i].loss(pack_trajectory(solve.trajectory), agents[i].theta);
      record.grad_norms.push_back(grads[i].norm());
      record.solver_iterations.push_back(solve.iterations);
      record.converged.push_back(solve.converged);
    }
    record.global_avg_loss = total_loss / static_cast<double>(N);
    if (k == 0) initial_loss = record.global_avg_loss;
    record.relative_loss =
        initial_loss != 0.0 ? record.global_avg_loss / initial_loss : 1.0;
    result.trace.rounds.push_back(std::move(record));

    if (opts.stop) {
      const double max_grad =
          *std::max_element(result.trace.rounds.back().grad_norms.begin(),
                            result.trace.rounds.back().grad_norms.end());
      if (result.trace.rounds.back().disagreement <= opts.stop->disagreement_tol &&
          max_grad <= opts.stop->grad_norm_tol) {
        break;
      }
    }

    // (3) Mix with the round's weights and take the gradient step.
    const ConsensusWeights weights = metropolis_weights(schedule.graph(k));
    const std::vector<Vector> next =
        consensus_step(thetas, weights, grads, step_size(steps, k));
    for (int i = 0; i < N; ++i) agents[i].theta = next[i];
  }
  return result;
}

}  // namespace cotune
