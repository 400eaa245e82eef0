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

#include "cotune/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cotune {

namespace {

void check_positive(const char* name, double value) {
  if (!(value > 0.0)) {
    throw std::invalid_argument(std::string("rendezvous config: ") + name +
                                " must be positive");
  }
}

}  // namespace

Vector unicycle_dynamics(const Vector& x, const Vector& u) {
  Vector rate(3);
  rate << u(0) * std::cos(x(2)), u(0) * std::sin(x(2)), u(1);
  return rate;
}

Vector unicycle_euler_step(const Vector& x, const Vector& u, double delta) {
  return x + delta * unicycle_dynamics(x, u);
}

RendezvousConfig resolve_rendezvous_init(RendezvousConfig config) {
  if (config.num_agents < 2) {
    throw std::invalid_argument("rendezvous config: num_agents must be >= 2");
  }
  if (config.horizon < 1) {
    throw std::invalid_argument("rendezvous config: horizon must be >= 1");
  }
  check_positive("delta", config.delta);
  check_positive("weights.track", config.weights.track);
  check_positive("weights.control", config.weights.control);
  check_positive("weights.terminal", config.weights.terminal);
  check_positive("weights.loss", config.weights.loss);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);

  if (config.initial_states.empty()) {
    for (int i = 0; i < config.num_agents; ++i) {
      Vector x0(3);
      x0 << box(rng), box(rng), angle(rng);
      config.initial_states.push_back(std::move(x0));
    }
  }
  if (config.initial_params.empty()) {
    for (int i = 0; i < config.num_agents; ++i) {
      Vector th(2);
      th << box(rng), box(rng);
      config.initial_params.push_back(std::move(th));
    }
  }

  if (static_cast<int>(config.initial_states.size()) != config.num_agents ||
      static_cast<int>(config.initial_params.size()) != config.num_agents) {
    throw std::invalid_argument(
        "rendezvous config: initial_states/initial_params must have one entry per agent");
  }
  for (const Vector& x0 : config.initial_states) {
    if (x0.size() != 3) {
      throw std::invalid_argument("rendezvous config: initial states must be 3-vectors");
    }
  }
  for (const Vector& th : config.initial_params) {
    if (th.size() != 2) {
      throw std::invalid_argument("rendezvous config: initial parameters must be 2-vectors");
    }
  }
  return config;
}

Agent make_rendezvous_agent(const RendezvousConfig& raw_config, int agent_index) {
  const RendezvousConfig config = resolve_rendezvous_init(raw_config);
  if (agent_index < 0 || agent_index >= config.num_agents) {
    throw std::out_of_range("make_rendezvous_agent: agent index " +
                            std::to_string(agent_index) + " outside [0, " +
                            std::to_string(config.num_agents) + ")");
  }

  const double delta = config.delta;
  const double w_track = config.weights.track;
  const double w_ctrl = config.weights.control;
  const double w_term = config.weights.terminal;
  const double w_loss = config.weights.loss;

  OcProblem p;
  p.dims = Dims{3, 2, 2, config.horizon};
  p.x0 = config.initial_states[static_cast<std::size_t>(agent_index)];

  p.f = [delta](const Vector& x, const Vector& u, const Vector&) {
    return unicycle_euler_step(x, u, delta);
  };
  p.c = [w_track, w_ctrl](int, const Vector& x, const Vector& u, const Vector& th) {
    const Vector offset = x.head(2) - th;
    return w_track * offset.squaredNorm() + w_ctrl * u.squaredNorm();
  };
  p.h = [w_term](const Vector& x, const Vector& th) {
    return w_term * (x.head(2) - th).squaredNorm();
  };

  p.f_x = [delta](const Vector& x, const Vector& u, const Vector&) {
    Matrix J = Matrix::Identity(3, 3);
    J(0, 2) = -delta * u(0) * std::sin(x(2));
    J(1, 2) = delta * u(0) * std::cos(x(2));
    return J;
  };
  p.f_u = [delta](const Vector& x, const Vector&, const Vector&) {
    Matrix J = Matrix::Zero(3, 2);
    J(0, 0) = delta * std::cos(x(2));
    J(1, 0) = delta * std::sin(x(2));
    J(2, 1) = delta;
    return J;
  };
  p.f_theta = [](const Vector&, const Vector&, const Vector&) { return Matrix::Zero(3, 2); };

  p.c_x = [w_track](int, const Vector& x, const Vector&, const Vector& th) {
    Vector g = Vector::Zero(3);
    g.head(2) = 2.0 * w_track * (x.head(2) - th);
    return g;
  };
  p.c_u = [w_ctrl](int, const Vector&, const Vector& u, const Vector&) {
    return Vector(2.0 * w_ctrl * u);
  };
  p.c_theta = [w_track](int, const Vector& x, const Vector&, const Vector& th) {
    return Vector(-2.0 * w_track * (x.head(2) - th));
  };
  p.h_x = [w_term](const Vector& x, const Vector& th) {
    Vector g = Vector::Zero(3);
    g.head(2) = 2.0 * w_term * (x.head(2) - th);
    return g;
  };
  p.h_theta = [w_term](const Vector& x, const Vector& th) {
    return Vector(-2.0 * w_term * (x.head(2) - th));
  };

  p.c_xx = [w_track](int, const Vector&, const Vector&, const Vector&) {
    Matrix H = Matrix::Zero(3, 3);
    H(0, 0) = H(1, 1) = 2.0 * w_track;
    return H;
  };
  p.c_xu = [](int, const Vector&, const Vector&, const Vector&) { return Matrix::Zero(3, 2); };
  p.c_uu = [w_ctrl](int, const Vector&, const Vector&, const Vector&) {
    return Matrix(2.0 * w_ctrl * Matrix::Identity(2, 2));
  };
  p.c_xtheta = [w_track](int, const Vector&, const Vector&, const Vector&) {
    Matrix H = Matrix::Zero(3, 2);
    H(0, 0) = H(1, 1) = -2.0 * w_track;
    return H;
  };
  p.c_utheta = [](int, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(2, 2);
  };
  p.h_xx = [w_term](const Vector&, const Vector&) {
    Matrix H = Matrix::Zero(3, 3);
    H(0, 0) = H(1, 1) = 2.0 * w_term;
    return H;
  };
  p.h_xtheta = [w_term](const Vector&, const Vector&) {
    Matrix H = Matrix::Zero(3, 2);
    H(0, 0) = H(1, 1) = -2.0 * w_term;
    return H;
  };

  // The only curvature of the dynamics sits in the heading column: the
  // position rows depend on psi through cos/sin and on u_v bilinearly.
  p.fxx_lam = [delta](const Vector& x, const Vector& u, const Vector&, const Vector& lam) {
    Matrix H = Matrix::Zero(3, 3);
    H(2, 2) = -delta * u(0) * (lam(0) * std::cos(x(2)) + lam(1) * std::sin(x(2)));
    return H;
  };
  p.fxu_lam = [delta](const Vector& x, const Vector&, const Vector&, const Vector& lam) {
    Matrix H = Matrix::Zero(3, 2);
    H(2, 0) = delta * (-lam(0) * std::sin(x(2)) + lam(1) * std::cos(x(2)));
    return H;
  };
  p.fuu_lam = [](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(2, 2);
  };
  p.fxtheta_lam = [](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(3, 2);
  };
  p.futheta_lam = [](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(2, 2);
  };

  Agent agent;
  agent.problem = std::move(p);
  agent.theta = config.initial_params[static_cast<std::size_t>(agent_index)];

  const int T = config.horizon;
  const int a = agent.problem.dims.trajectory_size();
  agent.loss = [w_loss, T](const Vector& xi, const Vector& th) {
    const Vector pT = xi.segment(3 * T, 2);
    return w_loss * (pT - th).squaredNorm();
  };
  agent.loss_xi = [w_loss, T, a](const Vector& xi, const Vector& th) {
    Vector g = Vector::Zero(a);
    g.segment(3 * T, 2) = 2.0 * w_loss * (xi.segment(3 * T, 2) - th);
    return g;
  };
  agent.loss_theta = [w_loss, T](const Vector& xi, const Vector& th) {
    return Vector(-2.0 * w_loss * (xi.segment(3 * T, 2) - th));
  };
  return agent;
}

std::vector<Agent> make_rendezvous_agents(const RendezvousConfig& raw_config) {
  const RendezvousConfig config = resolve_rendezvous_init(raw_config);
  std::vector<Agent> agents;
  agents.reserve(config.num_agents);
  for (int i = 0; i < config.num_agents; ++i) {
    agents.push_back(make_rendezvous_agent(config, i));
  }
  return agents;
}

GraphSchedule canonical_rendezvous_schedule(int num_agents) {
  if (num_agents < 2) {
    throw std::invalid_argument("canonical_rendezvous_schedule: need at least two agents");
  }
  std::vector<Digraph> rounds(3, Digraph(num_agents));
  for (int j = 0; j < num_agents; ++j) {
    const int a = j;
    const int b = (j + 1) % num_agents;
    // The two-node ring repeats its single edge; place each edge once.
    bool already = a == b;
    for (const Digraph& g : rounds) already = already || g.has_edge(a, b);
    if (!already) rounds[static_cast<std::size_t>(j % 3)].add_undirected(a, b);
  }
  return GraphSchedule(std::move(rounds), 0);
}

OcProblem make_lqr_problem(const LqrSpec& spec) {
  const int n = static_cast<int>(spec.A.rows());
  const int m = static_cast<int>(spec.B.cols());
  const int r = static_cast<int>(spec.running_target.cols());
  if (spec.A.cols() != n || spec.B.rows() != n || spec.Q.rows() != n || spec.Q.cols() != n ||
      spec.R.rows() != m || spec.R.cols() != m || spec.Qf.rows() != n || spec.Qf.cols() != n ||
      spec.running_target.rows() != n || spec.terminal_target.rows() != n ||
      spec.terminal_target.cols() != r || spec.x0.size() != n || spec.T < 1) {
    throw std::invalid_argument("make_lqr_problem: inconsistent spec shapes");
  }

  const Matrix A = spec.A, B = spec.B, Q = spec.Q, R = spec.R, Qf = spec.Qf;
  const Matrix Cr = spec.running_target, Ct = spec.terminal_target;

  OcProblem p;
  p.dims = Dims{n, m, r, spec.T};
  p.x0 = spec.x0;

  p.f = [A, B](const Vector& x, const Vector& u, const Vector&) { return Vector(A * x + B * u); };
  p.c = [Q, R, Cr](int, const Vector& x, const Vector& u, const Vector& th) {
    const Vector e = x - Cr * th;
    return 0.5 * e.dot(Q * e) + 0.5 * u.dot(R * u);
  };
  p.h = [Qf, Ct](const Vector& x, const Vector& th) {
    const Vector e = x - Ct * th;
    return 0.5 * e.dot(Qf * e);
  };

  p.f_x = [A](const Vector&, const Vector&, const Vector&) { return A; };
  p.f_u = [B](const Vector&, const Vector&, const Vector&) { return B; };
  p.f_theta = [n, r](const Vector&, const Vector&, const Vector&) { return Matrix::Zero(n, r); };

  p.c_x = [Q, Cr](int, const Vector& x, const Vector&, const Vector& th) {
    return Vector(Q * (x - Cr * th));
  };
  p.c_u = [R](int, const Vector&, const Vector& u, const Vector&) { return Vector(R * u); };
  p.c_theta = [Q, Cr](int, const Vector& x, const Vector&, const Vector& th) {
    return Vector(-Cr.transpose() * Q * (x - Cr * th));
  };
  p.h_x = [Qf, Ct](const Vector& x, const Vector& th) { return Vector(Qf * (x - Ct * th)); };
  p.h_theta = [Qf, Ct](const Vector& x, const Vector& th) {
    return Vector(-Ct.transpose() * Qf * (x - Ct * th));
  };

  p.c_xx = [Q](int, const Vector&, const Vector&, const Vector&) { return Q; };
  p.c_xu = [n, m](int, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(n, m);
  };
  p.c_uu = [R](int, const Vector&, const Vector&, const Vector&) { return R; };
  p.c_xtheta = [Q, Cr](int, const Vector&, const Vector&, const Vector&) {
    return Matrix(-Q * Cr);
  };
  p.c_utheta = [m, r](int, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(m, r);
  };
  p.h_xx = [Qf](const Vector&, const Vector&) { return Qf; };
  p.h_xtheta = [Qf, Ct](const Vector&, const Vector&) { return Matrix(-Qf * Ct); };

  p.fxx_lam = [n](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(n, n);
  };
  p.fxu_lam = [n, m](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(n, m);
  };
  p.fuu_lam = [m](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(m, m);
  };
  p.fxtheta_lam = [n, r](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(n, r);
  };
  p.futheta_lam = [m, r](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(m, r);
  };
  return p;
}

LqrSpec scalar_tracking_lqr() {
  LqrSpec spec;
  spec.A = Matrix::Identity(1, 1);
  spec.B = Matrix::Identity(1, 1);
  spec.Q = Matrix::Zero(1, 1);
  spec.R = Matrix::Identity(1, 1);
  spec.Qf = Matrix::Identity(1, 1);
  spec.running_target = Matrix::Zero(1, 1);
  spec.terminal_target = Matrix::Identity(1, 1);
  spec.x0 = Vector::Zero(1);
  spec.T = 1;
  return spec;
}

}  // namespace cotune
