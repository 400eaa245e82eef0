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

#ifndef COTUNE_OCP_HPP_
#define COTUNE_OCP_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cotune {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Problem dimensions: state n, control m, tunable parameter r, horizon T.
struct Dims {
  int n = 0;
  int m = 0;
  int r = 0;
  int T = 0;

  bool valid() const { return n > 0 && m > 0 && r > 0 && T >= 1; }

  /// Length of the stacked trajectory vector, (T+1)*n + T*m.
  int trajectory_size() const { return (T + 1) * n + T * m; }
};

/// States x_{0:T} and controls u_{0:T-1} of one rollout.
struct Trajectory {
  std::vector<Vector> states;    // T+1 entries
  std::vector<Vector> controls;  // T entries

  int horizon() const { return static_cast<int>(controls.size()); }
};

/// Dynamics multipliers lambda_{1:T}; lambda_0 is never formed.
struct Costates {
  std::vector<Vector> lambdas;  // lambdas[t-1] holds lambda_t

  const Vector& at(int t) const;  // t in [1, T]
  int horizon() const { return static_cast<int>(lambdas.size()); }
};

/// A parameterized discrete-time optimal control problem
///
///   min  sum_t c(t, x_t, u_t, theta) + h(x_T, theta)
///   s.t. x_{t+1} = f(x_t, u_t, theta),  x_0 given,
///
/// together with the analytic derivatives the sensitivity recursions
/// consume. All three value functions must be twice differentiable in
/// (x, u, theta). Second derivatives of f are only ever needed contracted
/// against a costate vector, so they are supplied in that form:
/// fab_lam(x, u, theta, lam) = sum_k lam_k * d^2 f_k / (da db).
///
/// Functions must be deterministic and re-entrant; a constructed problem
/// is immutable by convention and safe to share across threads.
struct OcProblem {
  Dims dims;
  Vector x0;

  // Values.
  std::function<Vector(const Vector& x, const Vector& u, const Vector& th)> f;
  std::function<double(int t, const Vector& x, const Vector& u, const Vector& th)> c;
  std::function<double(const Vector& xT, const Vector& th)> h;

  // First derivatives of the dynamics: n x n, n x m, n x r.
  std::function<Matrix(const Vector&, const Vector&, const Vector&)> f_x;
  std::function<Matrix(const Vector&, const Vector&, const Vector&)> f_u;
  std::function<Matrix(const Vector&, const Vector&, const Vector&)> f_theta;

  // First derivatives of the costs (gradients as column vectors).
  std::function<Vector(int, const Vector&, const Vector&, const Vector&)> c_x;
  std::function<Vector(int, const Vector&, const Vector&, const Vector&)> c_u;
  std::function<Vector(int, const Vector&, const Vector&, const Vector&)> c_theta;
  std::function<Vector(const Vector&, const Vector&)> h_x;
  std::function<Vector(const Vector&, const Vector&)> h_theta;

  // Second derivatives of the running cost: xx n x n, xu n x m, uu m x m,
  // xtheta n x r, utheta m x r.
  std::function<Matrix(int, const Vector&, const Vector&, const Vector&)> c_xx;
  std::function<Matrix(int, const Vector&, const Vector&, const Vector&)> c_xu;
  std::function<Matrix(int, const Vector&, const Vector&, const Vector&)> c_uu;
  std::function<Matrix(int, const Vector&, const Vector&, const Vector&)> c_xtheta;
  std::function<Matrix(int, const Vector&, const Vector&, const Vector&)> c_utheta;

  // Second derivatives of the terminal cost.
  std::function<Matrix(const Vector&, const Vector&)> h_xx;
  std::function<Matrix(const Vector&, const Vector&)> h_xtheta;

  // Costate-contracted second derivatives of the dynamics.
  std::function<Matrix(const Vector&, const Vector&, const Vector&, const Vector& lam)> fxx_lam;
  std::function<Matrix(const Vector&, const Vector&, const Vector&, const Vector& lam)> fxu_lam;
  std::function<Matrix(const Vector&, const Vector&, const Vector&, const Vector& lam)> fuu_lam;
  std::function<Matrix(const Vector&, const Vector&, const Vector&, const Vector& lam)> fxtheta_lam;
  std::function<Matrix(const Vector&, const Vector&, const Vector&, const Vector& lam)> futheta_lam;
};

/// Stacks a trajectory as col{x_0, ..., x_T, u_0, ..., u_{T-1}}.
Vector pack_trajectory(const Trajectory& traj);

/// Inverse of pack_trajectory. Throws std::invalid_argument on a length
/// mismatch with dims.
Trajectory unpack_trajectory(const Vector& flat, const Dims& dims);

/// One derivative function compared against finite differences.
struct DerivativeCheck {
  std::string name;
  double max_rel_error = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<DerivativeCheck> checks;
  double tol = 0.0;
  bool pass = false;

  const DerivativeCheck& check(const std::string& name) const;
};

/// Compares every supplied derivative function against central finite
/// differences of the corresponding value (or first-derivative) function
/// at a batch of seeded pseudorandom evaluation points. Reports the max
/// relative error per derivative; passes when all errors are <= tol.
///
/// Throws std::invalid_argument when a function is missing or returns a
/// shape inconsistent with dims, naming the offending function.
ValidationReport validate_problem(const OcProblem& p, double tol, std::uint64_t seed,
                                  int num_points = 8);

/// Returns a copy of p where any missing second-derivative function is
/// synthesized by central finite differences of the corresponding
/// first-derivative function. Intended for prototyping; analytic second
/// derivatives remain the default path.
OcProblem with_fd_second_derivatives(OcProblem p);

}  // namespace cotune

#endif  // COTUNE_OCP_HPP_
