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

#include "cotune/ocp.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace cotune {

namespace {

// Central-difference step: h = cbrt(eps) * (1 + |value|).
double fd_step(double value) {
  static const double kBase = std::cbrt(std::numeric_limits<double>::epsilon());
  return kBase * (1.0 + std::abs(value));
}

// Jacobian of g: R^p -> R^q by central differences around v.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& g, const Vector& v) {
  const Vector g0 = g(v);
  Matrix jac(g0.size(), v.size());
  Vector vp = v;
  for (int j = 0; j < v.size(); ++j) {
    const double h = fd_step(v(j));
    vp(j) = v(j) + h;
    const Vector plus = g(vp);
    vp(j) = v(j) - h;
    const Vector minus = g(vp);
    vp(j) = v(j);
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

Vector fd_gradient(const std::function<double(const Vector&)>& g, const Vector& v) {
  Vector grad(v.size());
  Vector vp = v;
  for (int j = 0; j < v.size(); ++j) {
    const double h = fd_step(v(j));
    vp(j) = v(j) + h;
    const double plus = g(vp);
    vp(j) = v(j) - h;
    const double minus = g(vp);
    vp(j) = v(j);
    grad(j) = (plus - minus) / (2.0 * h);
  }
  return grad;
}

void check_shape(const std::string& name, const Matrix& value, int rows, int cols) {
  if (value.rows() != rows || value.cols() != cols) {
    throw std::invalid_argument(name + ": expected " + std::to_string(rows) + "x" +
                                std::to_string(cols) + ", got " + std::to_string(value.rows()) +
                                "x" + std::to_string(value.cols()));
  }
}

double max_rel_error(const Matrix& analytic, const Matrix& reference) {
  double worst = 0.0;
  for (int i = 0; i < analytic.rows(); ++i) {
    for (int j = 0; j < analytic.cols(); ++j) {
      const double denom = std::max(1.0, std::abs(reference(i, j)));
      worst = std::max(worst, std::abs(analytic(i, j) - reference(i, j)) / denom);
    }
  }
  return worst;
}

void require(const std::string& name, bool present) {
  if (!present) {
    throw std::invalid_argument("validate_problem: problem is missing function " + name);
  }
}

}  // namespace

const Vector& Costates::at(int t) const {
  if (t < 1 || t > horizon()) {
    throw std::out_of_range("Costates::at: t=" + std::to_string(t) + " outside [1, " +
                            std::to_string(horizon()) + "]");
  }
  return lambdas[static_cast<std::size_t>(t - 1)];
}

Vector pack_trajectory(const Trajectory& traj) {
  const int T = traj.horizon();
  if (static_cast<int>(traj.states.size()) != T + 1) {
    throw std::invalid_argument("pack_trajectory: expected " + std::to_string(T + 1) +
                                " states for " + std::to_string(T) + " controls");
  }
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  const int m = traj.controls.empty() ? 0 : static_cast<int>(traj.controls[0].size());
  Vector flat((T + 1) * n + T * m);
  int offset = 0;
  for (const Vector& x : traj.states) {
    if (x.size() != n) throw std::invalid_argument("pack_trajectory: ragged state sizes");
    flat.segment(offset, n) = x;
    offset += n;
  }
  for (const Vector& u : traj.controls) {
    if (u.size() != m) throw std::invalid_argument("pack_trajectory: ragged control sizes");
    flat.segment(offset, m) = u;
    offset += m;
  }
  return flat;
}

Trajectory unpack_trajectory(const Vector& flat, const Dims& dims) {
  if (!dims.valid()) {
    throw std::invalid_argument("unpack_trajectory: invalid dims");
  }
  if (flat.size() != dims.trajectory_size()) {
    throw std::invalid_argument("unpack_trajectory: flat vector has length " +
                                std::to_string(flat.size()) + ", expected " +
                                std::to_string(dims.trajectory_size()));
  }
  Trajectory traj;
  traj.states.reserve(dims.T + 1);
  traj.controls.reserve(dims.T);
  int offset = 0;
  for (int t = 0; t <= dims.T; ++t) {
    traj.states.push_back(flat.segment(offset, dims.n));
    offset += dims.n;
  }
  for (int t = 0; t < dims.T; ++t) {
    traj.controls.push_back(flat.segment(offset, dims.m));
    offset += dims.m;
  }
  return traj;
}

const DerivativeCheck& ValidationReport::check(const std::string& name) const {
  for (const DerivativeCheck& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("ValidationReport: no check named " + name);
}

ValidationReport validate_problem(const OcProblem& p, double tol, std::uint64_t seed,
                                  int num_points) {
  if (tol <= 0.0) throw std::invalid_argument("validate_problem: tol must be positive");
  if (!p.dims.valid()) throw std::invalid_argument("validate_problem: invalid dims");
  require("f", bool(p.f));
  require("c", bool(p.c));
  require("h", bool(p.h));
  require("f_x", bool(p.f_x));
  require("f_u", bool(p.f_u));
  require("f_theta", bool(p.f_theta));
  require("c_x", bool(p.c_x));
  require("c_u", bool(p.c_u));
  require("c_theta", bool(p.c_theta));
  require("h_x", bool(p.h_x));
  require("h_theta", bool(p.h_theta));
  require("c_xx", bool(p.c_xx));
  require("c_xu", bool(p.c_xu));
  require("c_uu", bool(p.c_uu));
  require("c_xtheta", bool(p.c_xtheta));
  require("c_utheta", bool(p.c_utheta));
  require("h_xx", bool(p.h_xx));
  require("h_xtheta", bool(p.h_xtheta));
  require("fxx_lam", bool(p.fxx_lam));
  require("fxu_lam", bool(p.fxu_lam));
  require("fuu_lam", bool(p.fuu_lam));
  require("fxtheta_lam", bool(p.fxtheta_lam));
  require("futheta_lam", bool(p.futheta_lam));

  const int n = p.dims.n;
  const int m = p.dims.m;
  const int r = p.dims.r;

  ValidationReport report;
  report.tol = tol;
  auto entry = [&report](const std::string& name) -> DerivativeCheck& {
    for (DerivativeCheck& c : report.checks) {
      if (c.name == name) return c;
    }
    report.checks.push_back({name, 0.0, false});
    return report.checks.back();
  };
  auto record = [&](const std::string& name, const Matrix& analytic, const Matrix& reference,
                    int rows, int cols) {
    check_shape(name, analytic, rows, cols);
    DerivativeCheck& c = entry(name);
    c.max_rel_error = std::max(c.max_rel_error, max_rel_error(analytic, reference));
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> time_index(0, p.dims.T - 1);
  auto random_vec = [&](int size) {
    Vector v(size);
    for (int i = 0; i < size; ++i) v(i) = unit(rng);
    return v;
  };

  for (int point = 0; point < num_points; ++point) {
    const Vector x = random_vec(n);
    const Vector u = random_vec(m);
    const Vector th = random_vec(r);
    const Vector lam = random_vec(n);
    const int t = time_index(rng);

    // First derivatives against differences of the values.
    record("f_x", p.f_x(x, u, th),
           fd_jacobian([&](const Vector& v) { return p.f(v, u, th); }, x), n, n);
    record("f_u", p.f_u(x, u, th),
           fd_jacobian([&](const Vector& v) { return p.f(x, v, th); }, u), n, m);
    record("f_theta", p.f_theta(x, u, th),
           fd_jacobian([&](const Vector& v) { return p.f(x, u, v); }, th), n, r);
    record("c_x", p.c_x(t, x, u, th),
           fd_gradient([&](const Vector& v) { return p.c(t, v, u, th); }, x), n, 1);
    record("c_u", p.c_u(t, x, u, th),
           fd_gradient([&](const Vector& v) { return p.c(t, x, v, th); }, u), m, 1);
    record("c_theta", p.c_theta(t, x, u, th),
           fd_gradient([&](const Vector& v) { return p.c(t, x, u, v); }, th), r, 1);
    record("h_x", p.h_x(x, th), fd_gradient([&](const Vector& v) { return p.h(v, th); }, x), n,
           1);
    record("h_theta", p.h_theta(x, th),
           fd_gradient([&](const Vector& v) { return p.h(x, v); }, th), r, 1);

    // Second derivatives against differences of the first derivatives.
    record("c_xx", p.c_xx(t, x, u, th),
           fd_jacobian([&](const Vector& v) { return p.c_x(t, v, u, th); }, x), n, n);
    record("c_xu", p.c_xu(t, x, u, th),
           fd_jacobian([&](const Vector& v) { return p.c_x(t, x, v, th); }, u), n, m);
    record("c_uu", p.c_uu(t, x, u, th),
           fd_jacobian([&](const Vector& v) { return p.c_u(t, x, v, th); }, u), m, m);
    record("c_xtheta", p.c_xtheta(t, x, u, th),
           fd_jacobian([&](const Vector& v) { return p.c_x(t, x, u, v); }, th), n, r);
    record("c_utheta", p.c_utheta(t, x, u, th),
           fd_jacobian([&](const Vector& v) { return p.c_u(t, x, u, v); }, th), m, r);
    record("h_xx", p.h_xx(x, th),
           fd_jacobian([&](const Vector& v) { return p.h_x(v, th); }, x), n, n);
    record("h_xtheta", p.h_xtheta(x, th),
           fd_jacobian([&](const Vector& v) { return p.h_x(x, v); }, th), n, r);

    // Costate-contracted second derivatives of f against differences of
    // the contracted first derivatives.
    record("fxx_lam", p.fxx_lam(x, u, th, lam),
           fd_jacobian([&](const Vector& v) { return Vector(p.f_x(v, u, th).transpose() * lam); },
                       x),
           n, n);
    record("fxu_lam", p.fxu_lam(x, u, th, lam),
           fd_jacobian([&](const Vector& v) { return Vector(p.f_x(x, v, th).transpose() * lam); },
                       u),
           n, m);
    record("fuu_lam", p.fuu_lam(x, u, th, lam),
           fd_jacobian([&](const Vector& v) { return Vector(p.f_u(x, v, th).transpose() * lam); },
                       u),
           m, m);
    record("fxtheta_lam", p.fxtheta_lam(x, u, th, lam),
           fd_jacobian([&](const Vector& v) { return Vector(p.f_x(x, u, v).transpose() * lam); },
                       th),
           n, r);
    record("futheta_lam", p.futheta_lam(x, u, th, lam),
           fd_jacobian([&](const Vector& v) { return Vector(p.f_u(x, u, v).transpose() * lam); },
                       th),
           m, r);
  }

  report.pass = true;
  for (DerivativeCheck& c : report.checks) {
    c.pass = c.max_rel_error <= tol;
    report.pass = report.pass && c.pass;
  }
  return report;
}

OcProblem with_fd_second_derivatives(OcProblem p) {
  if (!p.c_x || !p.c_u || !p.h_x || !p.f_x || !p.f_u) {
    throw std::invalid_argument(
        "with_fd_second_derivatives: first derivatives must be supplied");
  }
  const auto c_x = p.c_x;
  const auto c_u = p.c_u;
  const auto h_x = p.h_x;
  const auto f_x = p.f_x;
  const auto f_u = p.f_u;

  if (!p.c_xx) {
    p.c_xx = [c_x](int t, const Vector& x, const Vector& u, const Vector& th) {
      return fd_jacobian([&](const Vector& v) { return c_x(t, v, u, th); }, x);
    };
  }
  if (!p.c_xu) {
    p.c_xu = [c_x](int t, const Vector& x, const Vector& u, const Vector& th) {
      return fd_jacobian([&](const Vector& v) { return c_x(t, x, v, th); }, u);
    };
  }
  if (!p.c_uu) {
    p.c_uu = [c_u](int t, const Vector& x, const Vector& u, const Vector& th) {
      return fd_jacobian([&](const Vector& v) { return c_u(t, x, v, th); }, u);
    };
  }
  if (!p.c_xtheta) {
    p.c_xtheta = [c_x](int t, const Vector& x, const Vector& u, const Vector& th) {
      return fd_jacobian([&](const Vector& v) { return c_x(t, x, u, v); }, th);
    };
  }
  if (!p.c_utheta) {
    p.c_utheta = [c_u](int t, const Vector& x, const Vector& u, const Vector& th) {
      return fd_jacobian([&](const Vector& v) { return c_u(t, x, u, v); }, th);
    };
  }
  if (!p.h_xx) {
    p.h_xx = [h_x](const Vector& x, const Vector& th) {
      return fd_jacobian([&](const Vector& v) { return h_x(v, th); }, x);
    };
  }
  if (!p.h_xtheta) {
    p.h_xtheta = [h_x](const Vector& x, const Vector& th) {
      return fd_jacobian([&](const Vector& v) { return h_x(x, v); }, th);
    };
  }
  if (!p.fxx_lam) {
    p.fxx_lam = [f_x](const Vector& x, const Vector& u, const Vector& th, const Vector& lam) {
      return fd_jacobian(
          [&](const Vector& v) { return Vector(f_x(v, u, th).transpose() * lam); }, x);
    };
  }
  if (!p.fxu_lam) {
    p.fxu_lam = [f_x](const Vector& x, const Vector& u, const Vector& th, const Vector& lam) {
      return fd_jacobian(
          [&](const Vector& v) { return Vector(f_x(x, v, th).transpose() * lam); }, u);
    };
  }
  if (!p.fuu_lam) {
    p.fuu_lam = [f_u](const Vector& x, const Vector& u, const Vector& th, const Vector& lam) {
      return fd_jacobian(
          [&](const Vector& v) { return Vector(f_u(x, v, th).transpose() * lam); }, u);
    };
  }
  if (!p.fxtheta_lam) {
    p.fxtheta_lam = [f_x](const Vector& x, const Vector& u, const Vector& th, const Vector& lam) {
      return fd_jacobian(
          [&](const Vector& v) { return Vector(f_x(x, u, v).transpose() * lam); }, th);
    };
  }
  if (!p.futheta_lam) {
    p.futheta_lam = [f_u](const Vector& x, const Vector& u, const Vector& th, const Vector& lam) {
      return fd_jacobian(
          [&](const Vector& v) { return Vector(f_u(x, u, v).transpose() * lam); }, th);
    };
  }
  return p;
}

}  // namespace cotune
