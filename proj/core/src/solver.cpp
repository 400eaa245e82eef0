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

#include "cotune/solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace cotune {

namespace {

constexpr double kRegularizationMax = 1e12;
constexpr double kAlphaMin = 1e-10;

struct BackwardGains {
  std::vector<Vector> k;  // feedforward, m
  std::vector<Matrix> K;  // feedback, m x n
};

// Quadratic backward sweep on the linearized problem. Returns std::nullopt
// when some regularized control Hessian is not positive definite.
std::optional<BackwardGains> backward_pass(const OcProblem& p, const Vector& theta,
                                           const Trajectory& traj, double mu) {
  const int T = p.dims.T;
  const int n = p.dims.n;
  const int m = p.dims.m;

  BackwardGains gains;
  gains.k.resize(T);
  gains.K.resize(T);

  Vector Vx = p.h_x(traj.states[T], theta);
  Matrix Vxx = p.h_xx(traj.states[T], theta);
  Vxx = 0.5 * (Vxx + Vxx.transpose()).eval();

  for (int t = T - 1; t >= 0; --t) {
    const Vector& x = traj.states[t];
    const Vector& u = traj.controls[t];
    const Matrix F = p.f_x(x, u, theta);
    const Matrix G = p.f_u(x, u, theta);

    const Vector Qx = p.c_x(t, x, u, theta) + F.transpose() * Vx;
    const Vector Qu = p.c_u(t, x, u, theta) + G.transpose() * Vx;
    const Matrix Qxx = p.c_xx(t, x, u, theta) + F.transpose() * Vxx * F;
    const Matrix Qux = p.c_xu(t, x, u, theta).transpose() + G.transpose() * Vxx * F;
    const Matrix Quu = p.c_uu(t, x, u, theta) + G.transpose() * Vxx * G;

    Matrix Quu_reg = Quu + mu * Matrix::Identity(m, m);
    Quu_reg = 0.5 * (Quu_reg + Quu_reg.transpose()).eval();
    Eigen::LLT<Matrix> llt(Quu_reg);
    if (llt.info() != Eigen::Success) {
      return std::nullopt;
    }

    gains.k[t] = -llt.solve(Qu);
    gains.K[t] = -llt.solve(Qux);

    const Vector& k = gains.k[t];
    const Matrix& K = gains.K[t];
    Vx = Qx + K.transpose() * Quu * k + K.transpose() * Qu + Qux.transpose() * k;
    Vxx = Qxx + K.transpose() * Quu * K + K.transpose() * Qux + Qux.transpose() * K;
    Vxx = 0.5 * (Vxx + Vxx.transpose()).eval();
    (void)n;
  }
  return gains;
}

struct Candidate {
  Trajectory traj;
  double objective;
};

// Closed-loop rollout u = u_ref + alpha*k + K*(x - x_ref). Returns
// std::nullopt when states or costs go non-finite.
std::optional<Candidate> try_step(const OcProblem& p, const Vector& theta,
                                  const Trajectory& ref, const BackwardGains& gains,
                                  double alpha) {
  const int T = p.dims.T;
  Candidate cand;
  cand.traj.states.resize(T + 1);
  cand.traj.controls.resize(T);
  cand.traj.states[0] = p.x0;
  double cost = 0.0;
  for (int t = 0; t < T; ++t) {
    const Vector u =
        ref.controls[t] + alpha * gains.k[t] + gains.K[t] * (cand.traj.states[t] - ref.states[t]);
    cand.traj.controls[t] = u;
    cost += p.c(t, cand.traj.states[t], u, theta);
    const Vector next = p.f(cand.traj.states[t], u, theta);
    if (!next.allFinite()) return std::nullopt;
    cand.traj.states[t + 1] = next;
  }
  cost += p.h(cand.traj.states[T], theta);
  if (!std::isfinite(cost)) return std::nullopt;
  cand.objective = cost;
  return cand;
}

}  // namespace

Trajectory rollout(const OcProblem& p, const Vector& theta,
                   const std::vector<Vector>& controls) {
  if (static_cast<int>(controls.size()) != p.dims.T) {
    throw std::invalid_argument("rollout: expected " + std::to_string(p.dims.T) +
                                " controls, got " + std::to_string(controls.size()));
  }
  Trajectory traj;
  traj.states.resize(p.dims.T + 1);
  traj.controls = controls;
  traj.states[0] = p.x0;
  for (int t = 0; t < p.dims.T; ++t) {
    if (controls[t].size() != p.dims.m) {
      throw std::invalid_argument("rollout: control at t=" + std::to_string(t) +
                                  " has wrong size");
    }
    const Vector next = p.f(traj.states[t], controls[t], theta);
    if (next.size() != p.dims.n || !next.allFinite()) {
      throw std::runtime_error("rollout: dynamics produced non-finite or misshaped state at t=" +
                               std::to_string(t));
    }
    traj.states[t + 1] = next;
  }
  return traj;
}

double trajectory_cost(const OcProblem& p, const Vector& theta, const Trajectory& traj) {
  double cost = 0.0;
  for (int t = 0; t < p.dims.T; ++t) {
    const double c = p.c(t, traj.states[t], traj.controls[t], theta);
    if (!std::isfinite(c)) {
      throw std::runtime_error("trajectory_cost: non-finite running cost at t=" +
                               std::to_string(t));
    }
    cost += c;
  }
  const double h = p.h(traj.states[p.dims.T], theta);
  if (!std::isfinite(h)) {
    throw std::runtime_error("trajectory_cost: non-finite terminal cost");
  }
  return cost + h;
}

Costates compute_costates(const OcProblem& p, const Vector& theta, const Trajectory& traj) {
  const int T = p.dims.T;
  Costates costates;
  costates.lambdas.resize(T);
  costates.lambdas[T - 1] = p.h_x(traj.states[T], theta);
  for (int t = T - 1; t >= 1; --t) {
    costates.lambdas[t - 1] =
        p.c_x(t, traj.states[t], traj.controls[t], theta) +
        p.f_x(traj.states[t], traj.controls[t], theta).transpose() * costates.lambdas[t];
  }
  return costates;
}

double stationarity_residual(const OcProblem& p, const Vector& theta, const Trajectory& traj,
                             const Costates& costates) {
  double residual = 0.0;
  for (int t = 0; t < p.dims.T; ++t) {
    const Vector Hu = p.c_u(t, traj.states[t], traj.controls[t], theta) +
                      p.f_u(traj.states[t], traj.controls[t], theta).transpose() *
                          costates.at(t + 1);
    residual = std::max(residual, Hu.lpNorm<Eigen::Infinity>());
  }
  return residual;
}

SolveResult solve_oc(const OcProblem& p, const Vector& theta,
                     const std::vector<Vector>* warm_start, const SolverOptions& opts) {
  if (!p.dims.valid()) throw std::invalid_argument("solve_oc: invalid dims");
  if (theta.size() != p.dims.r) {
    throw std::invalid_argument("solve_oc: theta has length " + std::to_string(theta.size()) +
                                ", expected " + std::to_string(p.dims.r));
  }
  if (opts.line_search_shrink <= 0.0 || opts.line_search_shrink >= 1.0) {
    throw std::invalid_argument("solve_oc: line_search_shrink must be in (0, 1)");
  }

  std::vector<Vector> controls;
  if (warm_start != nullptr) {
    if (static_cast<int>(warm_start->size()) != p.dims.T) {
      throw std::invalid_argument("solve_oc: warm start must supply T controls");
    }
    controls = *warm_start;
  } else {
    controls.assign(p.dims.T, Vector::Zero(p.dims.m));
  }

  Trajectory traj = rollout(p, theta, controls);
  double objective = trajectory_cost(p, theta, traj);

  double mu = opts.regularization_init;
  SolveResult result;
  result.converged = false;
  result.iterations = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const Costates costates = compute_costates(p, theta, traj);
    const double residual = stationarity_residual(p, theta, traj, costates);
    if (residual <= opts.stationarity_tol) {
      result.converged = true;
      break;
    }
    result.iterations = iter + 1;

    // Backward pass, inflating mu until the control Hessians factor.
    std::optional<BackwardGains> gains;
    while (!(gains = backward_pass(p, theta, traj, mu))) {
      mu *= opts.regularization_growth;
      if (mu > kRegularizationMax) break;
    }
    if (!gains) break;

    // Backtracking line search on the closed-loop rollout.
    bool accepted = false;
    for (double alpha = 1.0; alpha >= kAlphaMin; alpha *= opts.line_search_shrink) {
      const std::optional<Candidate> cand = try_step(p, theta, traj, *gains, alpha);
      if (cand && cand->objective < objective) {
        traj = cand->traj;
        objective = cand->objective;
        accepted = true;
        break;
      }
    }

    if (accepted) {
      mu = std::max(mu / opts.regularization_growth, opts.regularization_init);
    } else {
      mu *= opts.regularization_growth;
      if (mu > kRegularizationMax) break;  // stalled; report non-convergence
    }
  }

  result.trajectory = traj;
  result.costates = compute_costates(p, theta, traj);
  result.objective = objective;
  result.stationarity = stationarity_residual(p, theta, traj, result.costates);
  if (!result.converged) {
    // The loop may have exhausted max_iterations with the last step landing
    // on a stationary point.
    result.converged = result.stationarity <= opts.stationarity_tol;
  }
  return result;
}

}  // namespace cotune
