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

#include "cotune/pdp.hpp"

#include <Eigen/LU>
#include <stdexcept>
#include <string>

namespace cotune {

namespace {

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Eigen::FullPivLU<Matrix> factor_huu(const Matrix& Huu, int t) {
  Eigen::FullPivLU<Matrix> lu(Huu);
  if (!lu.isInvertible()) {
    throw std::runtime_error(
        "backward_recursion: Huu at t=" + std::to_string(t) +
        " is singular; the second-order sufficient optimality condition does not hold, so "
        "the sensitivity recursion is not applicable");
  }
  return lu;
}

Eigen::FullPivLU<Matrix> factor_closure(const Matrix& S, int t) {
  Eigen::FullPivLU<Matrix> lu(S);
  if (!lu.isInvertible()) {
    throw std::runtime_error("backward_recursion: (I + P_{t+1} R_t) is singular at t=" +
                             std::to_string(t));
  }
  return lu;
}

}  // namespace

Matrix TrajectorySensitivity::packed() const {
  if (X.empty()) return Matrix();
  const int T = static_cast<int>(U.size());
  const int n = static_cast<int>(X[0].rows());
  const int m = T > 0 ? static_cast<int>(U[0].rows()) : 0;
  const int r = static_cast<int>(X[0].cols());
  Matrix out((T + 1) * n + T * m, r);
  int offset = 0;
  for (const Matrix& Xt : X) {
    out.middleRows(offset, n) = Xt;
    offset += n;
  }
  for (const Matrix& Ut : U) {
    out.middleRows(offset, m) = Ut;
    offset += m;
  }
  return out;
}

PdpCoefficients assemble_coefficients(const OcProblem& p, const Vector& theta,
                                      const Trajectory& traj, const Costates& costates) {
  const int T = p.dims.T;
  if (traj.horizon() != T || costates.horizon() != T) {
    throw std::invalid_argument("assemble_coefficients: trajectory/costates horizon mismatch");
  }

  PdpCoefficients coeffs;
  coeffs.F.resize(T);
  coeffs.G.resize(T);
  coeffs.E.resize(T);
  coeffs.Hxx.resize(T);
  coeffs.Hxu.resize(T);
  coeffs.Huu.resize(T);
  coeffs.Hxtheta.resize(T);
  coeffs.Hutheta.resize(T);

  for (int t = 0; t < T; ++t) {
    const Vector& x = traj.states[t];
    const Vector& u = traj.controls[t];
    const Vector& lam = costates.at(t + 1);

    coeffs.F[t] = p.f_x(x, u, theta);
    coeffs.G[t] = p.f_u(x, u, theta);
    coeffs.E[t] = p.f_theta(x, u, theta);

    // Hamiltonian Hessian blocks: cost curvature plus the dynamics
    // curvature contracted against lambda_{t+1}.
    coeffs.Hxx[t] = symmetrized(p.c_xx(t, x, u, theta) + p.fxx_lam(x, u, theta, lam));
    coeffs.Hxu[t] = p.c_xu(t, x, u, theta) + p.fxu_lam(x, u, theta, lam);
    coeffs.Huu[t] = symmetrized(p.c_uu(t, x, u, theta) + p.fuu_lam(x, u, theta, lam));
    coeffs.Hxtheta[t] = p.c_xtheta(t, x, u, theta) + p.fxtheta_lam(x, u, theta, lam);
    coeffs.Hutheta[t] = p.c_utheta(t, x, u, theta) + p.futheta_lam(x, u, theta, lam);
  }

  coeffs.terminal_Hxx = symmetrized(p.h_xx(traj.states[T], theta));
  coeffs.terminal_Hxtheta = p.h_xtheta(traj.states[T], theta);
  return coeffs;
}

RiccatiPass backward_recursion(const PdpCoefficients& coeffs) {
  const int T = coeffs.horizon();
  if (T < 1) throw std::invalid_argument("backward_recursion: empty coefficients");
  const int n = static_cast<int>(coeffs.terminal_Hxx.rows());

  RiccatiPass pass;
  pass.P.resize(T + 1);
  pass.W.resize(T + 1);
  pass.A.resize(T);
  pass.R.resize(T);
  pass.M.resize(T);
  pass.Q.resize(T);
  pass.N.resize(T);

  pass.P[T] = coeffs.terminal_Hxx;
  pass.W[T] = coeffs.terminal_Hxtheta;

  for (int t = T - 1; t >= 0; --t) {
    const Matrix& F = coeffs.F[t];
    const Matrix& G = coeffs.G[t];
    const Matrix Hux = coeffs.Hxu[t].transpose();

    const auto huu = factor_huu(coeffs.Huu[t], t);
    const Matrix Huu_inv_Hux = huu.solve(Hux);                    // m x n
    const Matrix Huu_inv_Gt = huu.solve(Matrix(G.transpose()));   // m x n
    const Matrix Huu_inv_Hut = huu.solve(coeffs.Hutheta[t]);      // m x r

    pass.A[t] = F - G * Huu_inv_Hux;
    pass.R[t] = G * Huu_inv_Gt;
    pass.M[t] = coeffs.E[t] - G * Huu_inv_Hut;
    pass.Q[t] = coeffs.Hxx[t] - coeffs.Hxu[t] * Huu_inv_Hux;
    pass.N[t] = coeffs.Hxtheta[t] - coeffs.Hxu[t] * Huu_inv_Hut;

    const Matrix S = Matrix::Identity(n, n) + pass.P[t + 1] * pass.R[t];
    const auto closure = factor_closure(S, t);
    pass.P[t] = pass.Q[t] + pass.A[t].transpose() * closure.solve(Matrix(pass.P[t + 1] * pass.A[t]));
    pass.W[t] = pass.A[t].transpose() *
                    closure.solve(Matrix(pass.W[t + 1] + pass.P[t + 1] * pass.M[t])) +
                pass.N[t];
  }
  return pass;
}

TrajectorySensitivity forward_sensitivity(const PdpCoefficients& coeffs,
                                          const RiccatiPass& pass) {
  const int T = coeffs.horizon();
  const int n = static_cast<int>(coeffs.terminal_Hxx.rows());
  const int r = static_cast<int>(coeffs.terminal_Hxtheta.cols());

  TrajectorySensitivity sens;
  sens.X.resize(T + 1);
  sens.U.resize(T);
  sens.X[0] = Matrix::Zero(n, r);

  for (int t = 0; t < T; ++t) {
    const Matrix& G = coeffs.G[t];
    const Matrix Hux = coeffs.Hxu[t].transpose();
    const Matrix S = Matrix::Identity(n, n) + pass.P[t + 1] * pass.R[t];

    const Matrix downstream = pass.P[t + 1] * pass.A[t] * sens.X[t] +
                              pass.P[t + 1] * pass.M[t] + pass.W[t + 1];
    const Matrix rhs = Hux * sens.X[t] + coeffs.Hutheta[t] +
                       G.transpose() * factor_closure(S, t).solve(downstream);
    sens.U[t] = -factor_huu(coeffs.Huu[t], t).solve(rhs);
    sens.X[t + 1] = coeffs.F[t] * sens.X[t] + G * sens.U[t] + coeffs.E[t];
  }
  return sens;
}

std::pair<SolveResult, TrajectorySensitivity> trajectory_gradient(
    const OcProblem& p, const Vector& theta, const SolverOptions& opts,
    const std::vector<Vector>* warm_start) {
  SolveResult result = solve_oc(p, theta, warm_start, opts);
  if (!result.converged) {
    throw std::runtime_error(
        "trajectory_gradient: solver did not converge (stationarity " +
        std::to_string(result.stationarity) +
        "); the sensitivity is undefined at a non-stationary trajectory");
  }
  const PdpCoefficients coeffs =
      assemble_coefficients(p, theta, result.trajectory, result.costates);
  const RiccatiPass pass = backward_recursion(coeffs);
  TrajectorySensitivity sens = forward_sensitivity(coeffs, pass);
  return {std::move(result), std::move(sens)};
}

}  // namespace cotune
