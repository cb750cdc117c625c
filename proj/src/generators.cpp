#include "kqp/bench/generators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace kqp::bench {
namespace {

using Triplets = std::vector<Eigen::Triplet<double, Index>>;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double normal() { return normal_(engine_); }
  double uniform(double lo = 0, double hi = 1) {
    return lo + (hi - lo) * uniform_(engine_);
  }
  Index index(Index bound) {
    return std::uniform_int_distribution<Index>(0, bound - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

// Every row gets at least one entry so no constraint is vacuous.
Triplets random_sparse(Index rows, Index cols, double density, Rng& rng, Index row0 = 0,
                       Index col0 = 0) {
  Triplets t;
  for (Index i = 0; i < rows; ++i) {
    bool any = false;
    for (Index j = 0; j < cols; ++j) {
      if (rng.uniform() < density) {
        t.emplace_back(row0 + i, col0 + j, rng.normal());
        any = true;
      }
    }
    if (!any) t.emplace_back(row0 + i, col0 + rng.index(cols), rng.normal());
  }
  return t;
}

VectorXd random_normal(Index n, Rng& rng) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// Upper triangle of BᵀB + reg·I for a random sparse B with max(1, n/2) rows.
CscMatrixd random_psd_upper(Index n, double density, double reg, Rng& rng) {
  const Index rows = std::max<Index>(1, n / 2);
  const CscMatrixd b = CscMatrixd::from_triplets(rows, n, random_sparse(rows, n, density, rng));
  using Sparse = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
  const Sparse be = b.as_eigen();
  Sparse p = Sparse(be.transpose()) * be;
  if (reg > 0) {
    Sparse id(n, n);
    id.setIdentity();
    p += reg * id;
  }
  return CscMatrixd::from_eigen(Sparse(p.triangularView<Eigen::Upper>()));
}

QpProblemd random_qp(const GeneratorParams& g, Rng& rng) {
  if (g.n < 1 || g.m < 1) throw std::invalid_argument("random_qp: sizes must be >= 1");
  QpProblemd prob;
  prob.P = random_psd_upper(g.n, g.density, g.p_reg, rng);
  prob.c = random_normal(g.n, rng);
  prob.A = CscMatrixd::from_triplets(g.m, g.n, random_sparse(g.m, g.n, g.density, rng));
  const VectorXd x0 = random_normal(g.n, rng);
  VectorXd slack(g.m);
  for (Index i = 0; i < g.m; ++i) slack(i) = rng.uniform(0.1, 1.0);
  prob.b = spmv(prob.A, x0) + slack;
  prob.m1 = g.m;
  prob.m2 = 0;
  return prob;
}

QpProblemd equality_qp(const GeneratorParams& g, Rng& rng) {
  if (g.n < 1 || g.m < 1) throw std::invalid_argument("equality_qp: sizes must be >= 1");
  if (g.m > g.n) throw std::invalid_argument("equality_qp: need m <= n for full row rank");
  QpProblemd prob;
  prob.P = random_psd_upper(g.n, g.density, g.p_reg, rng);
  prob.c = random_normal(g.n, rng);
  Triplets t = random_sparse(g.m, g.n, g.density, rng);
  for (Index i = 0; i < g.m; ++i) t.emplace_back(i, i, 4.0);
  prob.A = CscMatrixd::from_triplets(g.m, g.n, t);
  prob.b = spmv(prob.A, random_normal(g.n, rng));
  prob.m1 = 0;
  prob.m2 = g.m;
  return prob;
}

QpProblemd mpc_toy(const GeneratorParams& g, Rng& rng) {
  const Index horizon = g.horizon;
  if (horizon < 1) throw std::invalid_argument("mpc_toy: horizon must be >= 1");
  constexpr double dt = 0.1, q_pos = 10.0, q_vel = 1.0, r_in = 0.1;
  constexpr double u_max = 1.0, v_max = 2.0;
  // u = 0 keeps |p_t| <= 3 + 0.1 t, strictly inside p_max.
  const double p_max = 4.0 + dt * double(horizon);

  Eigen::Matrix2d ad;
  ad << 1, dt, 0, 1;
  const Eigen::Vector2d bd(dt * dt / 2, dt);
  const Eigen::Vector2d x0(rng.uniform(-3, 3), rng.uniform(-1, 1));

  // Stacked states x_1..x_N = Φ x0 + Γ u.
  Matrix<double> gamma = Matrix<double>::Zero(2 * horizon, horizon);
  VectorXd free(2 * horizon);
  Eigen::Vector2d xt = x0;
  for (Index t = 0; t < horizon; ++t) {
    xt = ad * xt;
    free.segment<2>(2 * t) = xt;
    Eigen::Vector2d col = bd;
    for (Index s = t; s >= 0; --s) {
      gamma.block<2, 1>(2 * t, s) = col;
      col = ad * col;
    }
  }
  VectorXd qdiag(2 * horizon);
  for (Index t = 0; t < horizon; ++t) qdiag.segment<2>(2 * t) << q_pos, q_vel;

  const Matrix<double> p =
      2.0 * (gamma.transpose() * qdiag.asDiagonal() * gamma +
             r_in * Matrix<double>::Identity(horizon, horizon));
  QpProblemd prob;
  prob.P = CscMatrixd::from_dense(p.triangularView<Eigen::Upper>().toDenseMatrix());
  prob.c = 2.0 * gamma.transpose() * qdiag.asDiagonal() * free;

  const Index m = 6 * horizon;
  Matrix<double> a = Matrix<double>::Zero(m, horizon);
  VectorXd b(m);
  for (Index t = 0; t < horizon; ++t) {
    a(2 * t, t) = 1;
    a(2 * t + 1, t) = -1;
    b(2 * t) = b(2 * t + 1) = u_max;
  }
  for (Index t = 0; t < horizon; ++t) {
    for (Index s = 0; s < 2; ++s) {
      const Index row = 2 * horizon + 4 * t + 2 * s;
      const double bound = s == 0 ? p_max : v_max;
      a.row(row) = gamma.row(2 * t + s);
      a.row(row + 1) = -gamma.row(2 * t + s);
      b(row) = bound - free(2 * t + s);
      b(row + 1) = bound + free(2 * t + s);
    }
  }
  prob.A = CscMatrixd::from_dense(a);
  prob.b = b;
  prob.m1 = m;
  prob.m2 = 0;
  return prob;
}

struct RegressionData {
  CscMatrixd a;
  VectorXd b;
};

RegressionData regression_data(const GeneratorParams& g, Rng& rng, bool outliers) {
  if (g.features < 1 || g.samples < 1)
    throw std::invalid_argument("regression: features and samples must be >= 1");
  Triplets t = random_sparse(g.samples, g.features, g.density, rng);
  // Touch every column so the design has no empty feature.
  for (Index j = 0; j < g.features; ++j) t.emplace_back(rng.index(g.samples), j, rng.normal());
  RegressionData d{CscMatrixd::from_triplets(g.samples, g.features, t), {}};
  VectorXd x_true(g.features);
  for (Index j = 0; j < g.features; ++j) x_true(j) = rng.uniform() < 0.5 ? 0.0 : rng.normal();
  d.b = spmv(d.a, x_true);
  for (Index i = 0; i < g.samples; ++i) {
    d.b(i) += 0.1 * rng.normal();
    if (outliers && rng.uniform() < 0.1) d.b(i) += 10.0 * rng.normal();
  }
  return d;
}

QpProblemd lasso(const GeneratorParams& g, Rng& rng) {
  const auto [data, target] = regression_data(g, rng, false);
  const Index f = g.features, s = g.samples;
  const double lambda = g.lambda * spmv_transpose(data, target).lpNorm<Eigen::Infinity>();

  // Variables (x, y, t); rows: x − t ≤ 0, −x − t ≤ 0, Ax − y = b.
  QpProblemd prob;
  const Index n = 2 * f + s;
  Triplets pt;
  for (Index i = 0; i < s; ++i) pt.emplace_back(f + i, f + i, 1.0);
  prob.P = CscMatrixd::from_triplets(n, n, pt);
  prob.c = VectorXd::Zero(n);
  prob.c.tail(f).setConstant(lambda);

  Triplets at;
  for (Index j = 0; j < f; ++j) {
    at.emplace_back(j, j, 1.0);
    at.emplace_back(j, f + s + j, -1.0);
    at.emplace_back(f + j, j, -1.0);
    at.emplace_back(f + j, f + s + j, -1.0);
  }
  for (Index j = 0; j < f; ++j)
    for (Index p = data.colptr()[j]; p < data.colptr()[j + 1]; ++p)
      at.emplace_back(2 * f + data.rowind()[p], j, data.nzval()[p]);
  for (Index i = 0; i < s; ++i) at.emplace_back(2 * f + i, f + i, -1.0);
  prob.A = CscMatrixd::from_triplets(2 * f + s, n, at);
  prob.b = VectorXd::Zero(2 * f + s);
  prob.b.tail(s) = target;
  prob.m1 = 2 * f;
  prob.m2 = s;
  return prob;
}

QpProblemd huber(const GeneratorParams& g, Rng& rng) {
  const auto [data, target] = regression_data(g, rng, true);
  const Index f = g.features, s = g.samples;

  // Variables (x, u, r, t); rows: −r ≤ 0, −t ≤ 0, Ax − u − r + t = b.
  QpProblemd prob;
  const Index n = f + 3 * s;
  Triplets pt;
  for (Index i = 0; i < s; ++i) pt.emplace_back(f + i, f + i, 2.0);
  prob.P = CscMatrixd::from_triplets(n, n, pt);
  prob.c = VectorXd::Zero(n);
  prob.c.tail(2 * s).setConstant(2.0 * g.huber_m);

  Triplets at;
  for (Index i = 0; i < s; ++i) {
    at.emplace_back(i, f + s + i, -1.0);
    at.emplace_back(s + i, f + 2 * s + i, -1.0);
  }
  for (Index j = 0; j < f; ++j)
    for (Index p = data.colptr()[j]; p < data.colptr()[j + 1]; ++p)
      at.emplace_back(2 * s + data.rowind()[p], j, data.nzval()[p]);
  for (Index i = 0; i < s; ++i) {
    at.emplace_back(2 * s + i, f + i, -1.0);
    at.emplace_back(2 * s + i, f + s + i, -1.0);
    at.emplace_back(2 * s + i, f + 2 * s + i, 1.0);
  }
  prob.A = CscMatrixd::from_triplets(3 * s, n, at);
  prob.b = VectorXd::Zero(3 * s);
  prob.b.tail(s) = target;
  prob.m1 = 2 * s;
  prob.m2 = s;
  return prob;
}

}  // namespace

ProblemKind parse_kind(std::string_view name) {
  if (name == "random_qp") return ProblemKind::RandomQp;
  if (name == "equality_qp") return ProblemKind::EqualityQp;
  if (name == "mpc_toy") return ProblemKind::MpcToy;
  if (name == "lasso") return ProblemKind::Lasso;
  if (name == "huber") return ProblemKind::Huber;
  throw std::invalid_argument("unknown problem kind: " + std::string(name));
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::RandomQp: return "random_qp";
    case ProblemKind::EqualityQp: return "equality_qp";
    case ProblemKind::MpcToy: return "mpc_toy";
    case ProblemKind::Lasso: return "lasso";
    case ProblemKind::Huber: return "huber";
  }
  return "unknown";
}

QpProblemd generate(ProblemKind kind, const GeneratorParams& params, std::uint64_t seed) {
  Rng rng(seed);
  QpProblemd prob;
  switch (kind) {
    case ProblemKind::RandomQp: prob = random_qp(params, rng); break;
    case ProblemKind::EqualityQp: prob = equality_qp(params, rng); break;
    case ProblemKind::MpcToy: prob = mpc_toy(params, rng); break;
    case ProblemKind::Lasso: prob = lasso(params, rng); break;
    case ProblemKind::Huber: prob = huber(params, rng); break;
  }
  prob.validate();
  return prob;
}

}  // namespace kqp::bench
