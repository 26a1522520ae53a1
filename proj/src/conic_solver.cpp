#include "rsma/conic.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

// Homogeneous self-dual interior-point method for nonsymmetric conic programs
// in the style of Skajaa and Ye: every cone is scaled with the Hessian of its
// primal barrier, each iteration takes one affine predictor step inside a wide
// neighbourhood of the central path followed by a few centering correctors.

namespace rsma::conic {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Sparse = Eigen::SparseMatrix<double>;

// Interior point of K_exp with s = -grad F(s), so (s, s) is perfectly centred.
constexpr double kExpCentre[3] = {-1.0513828033943, 0.5564090036598, 1.2589670317262};

struct Block {
  ConeKind kind;
  int offset;
  int size;
};

struct Cones {
  std::vector<Block> blocks;
  int rows = 0;
  double nu = 0.0;

  explicit Cones(const std::vector<ConeBlock>& spec) {
    for (const auto& b : spec) {
      blocks.push_back({b.kind, rows, b.size});
      rows += b.size;
      nu += b.kind == ConeKind::nonnegative ? b.size : b.kind == ConeKind::second_order ? 2.0 : 3.0;
    }
  }
};

// ---- exponential cone ------------------------------------------------------

bool exp_primal_interior(double u, double v, double w) {
  return v > 0.0 && w > 0.0 && v * std::log(w / v) - u > 0.0;
}

bool exp_dual_interior(double u, double v, double w) {
  return u < 0.0 && w > 0.0 && std::log(-u) + v / u < 1.0 + std::log(w);
}

void exp_barrier(const double* s, double* g, Eigen::Matrix3d* h) {
  const double u = s[0], v = s[1], w = s[2];
  const double lwv = std::log(w / v);
  const double psi = v * lwv - u;
  const Eigen::Vector3d dpsi(-1.0, lwv - 1.0, v / w);
  if (g) {
    g[0] = -dpsi(0) / psi;
    g[1] = -dpsi(1) / psi - 1.0 / v;
    g[2] = -dpsi(2) / psi - 1.0 / w;
  }
  if (h) {
    Eigen::Matrix3d d2;
    d2 << 0.0, 0.0, 0.0, 0.0, -1.0 / v, 1.0 / w, 0.0, 1.0 / w, -v / (w * w);
    *h = dpsi * dpsi.transpose() / (psi * psi) - d2 / psi;
    (*h)(1, 1) += 1.0 / (v * v);
    (*h)(2, 2) += 1.0 / (w * w);
  }
}

// ---- second-order cone -----------------------------------------------------

double soc_det(const double* s, int k) {
  double t = s[0] * s[0];
  for (int i = 1; i < k; ++i) t -= s[i] * s[i];
  return t;
}

bool soc_interior(const double* s, int k) {
  if (!(s[0] > 0.0)) return false;
  double n2 = 0.0;
  for (int i = 1; i < k; ++i) n2 += s[i] * s[i];
  return s[0] > std::sqrt(n2) && soc_det(s, k) > 0.0;
}

// ---- cone-wise helpers -----------------------------------------------------

bool primal_interior(const Cones& cones, const VectorXd& s) {
  for (const auto& b : cones.blocks) {
    const double* p = s.data() + b.offset;
    switch (b.kind) {
      case ConeKind::nonnegative:
        for (int i = 0; i < b.size; ++i) {
          if (!(p[i] > 0.0)) return false;
        }
        break;
      case ConeKind::second_order:
        if (!soc_interior(p, b.size)) return false;
        break;
      case ConeKind::exponential:
        if (!exp_primal_interior(p[0], p[1], p[2])) return false;
        break;
    }
  }
  return true;
}

bool dual_interior(const Cones& cones, const VectorXd& z) {
  for (const auto& b : cones.blocks) {
    const double* p = z.data() + b.offset;
    switch (b.kind) {
      case ConeKind::nonnegative:
        for (int i = 0; i < b.size; ++i) {
          if (!(p[i] > 0.0)) return false;
        }
        break;
      case ConeKind::second_order:
        if (!soc_interior(p, b.size)) return false;
        break;
      case ConeKind::exponential:
        if (!exp_dual_interior(p[0], p[1], p[2])) return false;
        break;
    }
  }
  return true;
}

VectorXd barrier_gradient(const Cones& cones, const VectorXd& s) {
  VectorXd g(s.size());
  for (const auto& b : cones.blocks) {
    const double* p = s.data() + b.offset;
    double* q = g.data() + b.offset;
    switch (b.kind) {
      case ConeKind::nonnegative:
        for (int i = 0; i < b.size; ++i) q[i] = -1.0 / p[i];
        break;
      case ConeKind::second_order: {
        const double d = soc_det(p, b.size);
        q[0] = -2.0 * p[0] / d;
        for (int i = 1; i < b.size; ++i) q[i] = 2.0 * p[i] / d;
        break;
      }
      case ConeKind::exponential:
        exp_barrier(p, q, nullptr);
        break;
    }
  }
  return g;
}

// Barrier Hessian, stored block-diagonally (LP blocks keep only the diagonal).
struct Hessian {
  std::vector<MatrixXd> dense;  // one per block; LP blocks hold a column vector
};

Hessian barrier_hessian(const Cones& cones, const VectorXd& s) {
  Hessian h;
  h.dense.reserve(cones.blocks.size());
  for (const auto& b : cones.blocks) {
    const double* p = s.data() + b.offset;
    switch (b.kind) {
      case ConeKind::nonnegative: {
        MatrixXd d(b.size, 1);
        for (int i = 0; i < b.size; ++i) d(i, 0) = 1.0 / (p[i] * p[i]);
        h.dense.push_back(std::move(d));
        break;
      }
      case ConeKind::second_order: {
        const double det = soc_det(p, b.size);
        VectorXd js(b.size);
        js(0) = p[0];
        for (int i = 1; i < b.size; ++i) js(i) = -p[i];
        MatrixXd m = 4.0 / (det * det) * js * js.transpose();
        m(0, 0) -= 2.0 / det;
        for (int i = 1; i < b.size; ++i) m(i, i) += 2.0 / det;
        h.dense.push_back(std::move(m));
        break;
      }
      case ConeKind::exponential: {
        Eigen::Matrix3d m;
        exp_barrier(p, nullptr, &m);
        h.dense.push_back(MatrixXd(m));
        break;
      }
    }
  }
  return h;
}

// v' H(s)^{-1} v summed over blocks.
double inverse_hessian_norm2(const Cones& cones, const VectorXd& s, const VectorXd& v) {
  double acc = 0.0;
  for (const auto& b : cones.blocks) {
    const double* p = s.data() + b.offset;
    const double* q = v.data() + b.offset;
    switch (b.kind) {
      case ConeKind::nonnegative:
        for (int i = 0; i < b.size; ++i) acc += q[i] * q[i] * p[i] * p[i];
        break;
      case ConeKind::second_order: {
        // H^{-1} = s s' - (det/2) J
        const double det = soc_det(p, b.size);
        double sv = 0.0, jvv = q[0] * q[0];
        for (int i = 0; i < b.size; ++i) sv += p[i] * q[i];
        for (int i = 1; i < b.size; ++i) jvv -= q[i] * q[i];
        acc += sv * sv - 0.5 * det * jvv;
        break;
      }
      case ConeKind::exponential: {
        Eigen::Matrix3d m;
        exp_barrier(p, nullptr, &m);
        const Eigen::Vector3d vv(q[0], q[1], q[2]);
        acc += vv.dot(m.ldlt().solve(vv));
        break;
      }
    }
  }
  return acc;
}

// ---- problem data ----------------------------------------------------------

struct Data {
  MatrixXd a, g;
  VectorXd b, c, h;
  int n = 0, p = 0, m = 0;
};

Data densify(const ConicProgram& prog) {
  Data d;
  d.n = prog.num_variables();
  d.p = static_cast<int>(prog.equality_rows().size());
  d.m = prog.num_cone_rows();
  d.a = MatrixXd::Zero(d.p, d.n);
  d.g = MatrixXd::Zero(d.m, d.n);
  d.b = VectorXd::Zero(d.p);
  d.h = VectorXd::Zero(d.m);
  d.c = Eigen::Map<const VectorXd>(prog.objective().data(), d.n);
  for (int r = 0; r < d.p; ++r) {
    for (const auto& [j, v] : prog.equality_rows()[r].entries) d.a(r, j) += v;
    d.b(r) = prog.equality_rows()[r].rhs;
  }
  for (int r = 0; r < d.m; ++r) {
    for (const auto& [j, v] : prog.cone_rows()[r].entries) d.g(r, j) += v;
    d.h(r) = prog.cone_rows()[r].rhs;
  }
  return d;
}

struct Scaling {
  VectorXd col;     // E
  VectorXd eq_row;  // D_A
  VectorXd cone_row;  // D_G, constant on every SOC / exp block
};

// Ruiz equilibration of [A; G] with block-uniform factors on non-LP cones.
Scaling equilibrate(Data& d, const Cones& cones, bool enabled) {
  Scaling sc{VectorXd::Ones(d.n), VectorXd::Ones(d.p), VectorXd::Ones(d.m)};
  if (!enabled || d.n == 0) return sc;
  auto safe = [](double v) { return v > 1e-12 ? 1.0 / std::sqrt(v) : 1.0; };
  for (int pass = 0; pass < 15; ++pass) {
    VectorXd col_norm = VectorXd::Zero(d.n);
    for (int j = 0; j < d.n; ++j) {
      double m = 0.0;
      if (d.p > 0) m = d.a.col(j).cwiseAbs().maxCoeff();
      if (d.m > 0) m = std::max(m, d.g.col(j).cwiseAbs().maxCoeff());
      col_norm(j) = m;
    }
    VectorXd ecol(d.n);
    for (int j = 0; j < d.n; ++j) ecol(j) = safe(col_norm(j));
    VectorXd drow_a(d.p);
    for (int r = 0; r < d.p; ++r) drow_a(r) = safe(d.a.row(r).cwiseAbs().maxCoeff());
    VectorXd drow_g(d.m);
    for (const auto& b : cones.blocks) {
      if (b.kind == ConeKind::nonnegative) {
        for (int r = b.offset; r < b.offset + b.size; ++r) {
          drow_g(r) = safe(d.g.row(r).cwiseAbs().maxCoeff());
        }
      } else {
        const double m = d.g.middleRows(b.offset, b.size).cwiseAbs().maxCoeff();
        drow_g.segment(b.offset, b.size).setConstant(safe(m));
      }
    }
    d.a = drow_a.asDiagonal() * d.a * ecol.asDiagonal();
    d.g = drow_g.asDiagonal() * d.g * ecol.asDiagonal();
    sc.col = sc.col.cwiseProduct(ecol);
    sc.eq_row = sc.eq_row.cwiseProduct(drow_a);
    sc.cone_row = sc.cone_row.cwiseProduct(drow_g);
  }
  d.b = sc.eq_row.cwiseProduct(d.b);
  d.h = sc.cone_row.cwiseProduct(d.h);
  d.c = sc.col.cwiseProduct(d.c);
  return sc;
}

struct Iterate {
  VectorXd x, y, z, s;
  double tau = 1.0, kappa = 1.0;
};

struct Direction {
  VectorXd x, y, z, s;
  double tau = 0.0, kappa = 0.0;
};

Iterate step(const Iterate& it, const Direction& d, double alpha) {
  Iterate n;
  n.x = it.x + alpha * d.x;
  n.y = it.y + alpha * d.y;
  n.z = it.z + alpha * d.z;
  n.s = it.s + alpha * d.s;
  n.tau = it.tau + alpha * d.tau;
  n.kappa = it.kappa + alpha * d.kappa;
  return n;
}

class Engine {
 public:
  Engine(const Data& d, const Cones& cones)
      : d_(d), cones_(cones), ga_(d.a.sparseView()), gg_(d.g.sparseView()) {}

  double mu(const Iterate& it) const {
    return (it.s.dot(it.z) + it.tau * it.kappa) / (cones_.nu + 1.0);
  }

  bool interior(const Iterate& it) const {
    return it.tau > 0.0 && it.kappa > 0.0 && primal_interior(cones_, it.s) &&
           dual_interior(cones_, it.z);
  }

  // Distance to the central path in the local dual norm, relative to mu.
  double centrality(const Iterate& it) const {
    const double m = mu(it);
    if (!(m > 0.0)) return std::numeric_limits<double>::infinity();
    const VectorXd psi = it.z + m * barrier_gradient(cones_, it.s);
    const double tk = it.tau * it.kappa - m;
    const double n2 = inverse_hessian_norm2(cones_, it.s, psi) + tk * tk;
    return std::sqrt(std::max(0.0, n2)) / m;
  }

  void residuals(const Iterate& it, VectorXd& r1, VectorXd& r2, VectorXd& r3, double& r4) const {
    r1 = d_.c * it.tau;
    if (d_.p > 0) r1.noalias() += d_.a.transpose() * it.y;
    if (d_.m > 0) r1.noalias() += d_.g.transpose() * it.z;
    r2 = d_.b * it.tau;
    if (d_.p > 0) r2.noalias() -= d_.a * it.x;
    r3 = d_.h * it.tau - it.s;
    if (d_.m > 0) r3.noalias() -= d_.g * it.x;
    r4 = -d_.c.dot(it.x) - d_.b.dot(it.y) - d_.h.dot(it.z) - it.kappa;
  }

  // Factorizes the Newton system of the embedding at the current point with
  // ds and dkappa eliminated:
  //
  //   [  0   A'   G'   c  ] [dx]
  //   [ -A   0    0    b  ] [dy]
  //   [ -G   0    W    h  ] [dz]   W = (mu H(s))^{-1}
  //   [ -c' -b'  -h' k/t  ] [dt]
  bool factor(const Iterate& it) {
    m_ = mu(it);
    hess_ = barrier_hessian(cones_, it.s);
    const int n = d_.n, p = d_.p, m = d_.m;
    const int dim = n + p + m + 1;
    const int zc = n + p, tc = dim - 1;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * (ga_.nonZeros() + gg_.nonZeros()) + 16 * m + 4 * dim);
    for (int j = 0; j < n; ++j) {
      for (Sparse::InnerIterator e(ga_, j); e; ++e) {
        trip.emplace_back(j, n + e.row(), e.value());
        trip.emplace_back(n + e.row(), j, -e.value());
      }
      for (Sparse::InnerIterator e(gg_, j); e; ++e) {
        trip.emplace_back(j, zc + e.row(), e.value());
        trip.emplace_back(zc + e.row(), j, -e.value());
      }
      trip.emplace_back(j, tc, d_.c(j));
      trip.emplace_back(tc, j, -d_.c(j));
    }
    for (int r = 0; r < p; ++r) {
      trip.emplace_back(n + r, tc, d_.b(r));
      trip.emplace_back(tc, n + r, -d_.b(r));
    }
    for (int r = 0; r < m; ++r) {
      trip.emplace_back(zc + r, tc, d_.h(r));
      trip.emplace_back(tc, zc + r, -d_.h(r));
    }
    trip.emplace_back(tc, tc, it.kappa / it.tau);

    winv_.assign(cones_.blocks.size(), MatrixXd());
    for (std::size_t k = 0; k < cones_.blocks.size(); ++k) {
      const auto& b = cones_.blocks[k];
      const double* sp = it.s.data() + b.offset;
      MatrixXd w;
      switch (b.kind) {
        case ConeKind::nonnegative:
          w.resize(b.size, 1);
          for (int i = 0; i < b.size; ++i) w(i, 0) = sp[i] * sp[i] / m_;
          for (int i = 0; i < b.size; ++i) trip.emplace_back(zc + b.offset + i, zc + b.offset + i, w(i, 0));
          break;
        case ConeKind::second_order: {
          const double det = soc_det(sp, b.size);
          const Eigen::Map<const VectorXd> sv(sp, b.size);
          w = sv * sv.transpose();
          w(0, 0) -= 0.5 * det;
          for (int i = 1; i < b.size; ++i) w(i, i) += 0.5 * det;
          w /= m_;
          break;
        }
        case ConeKind::exponential:
          w = hess_.dense[k].inverse() / m_;
          break;
      }
      if (b.kind != ConeKind::nonnegative) {
        for (int i = 0; i < b.size; ++i) {
          for (int j = 0; j < b.size; ++j) trip.emplace_back(zc + b.offset + i, zc + b.offset + j, w(i, j));
        }
      }
      winv_[k] = std::move(w);
    }
    kkt_.resize(dim, dim);
    kkt_.setFromTriplets(trip.begin(), trip.end());
    kkt_.makeCompressed();
    lu_.compute(kkt_);
    return lu_.info() == Eigen::Success;
  }

  VectorXd solve_kkt(const VectorXd& rhs) const {
    VectorXd sol = lu_.solve(rhs);
    for (int k = 0; k < 3; ++k) {
      const VectorXd res = rhs - kkt_ * sol;
      if (res.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + rhs.cwiseAbs().maxCoeff())) break;
      sol += lu_.solve(res);
    }
    return sol;
  }

  VectorXd apply_winv(const VectorXd& v) const {
    VectorXd out(v.size());
    for (std::size_t k = 0; k < cones_.blocks.size(); ++k) {
      const auto& b = cones_.blocks[k];
      if (b.kind == ConeKind::nonnegative) {
        out.segment(b.offset, b.size) = winv_[k].col(0).cwiseProduct(v.segment(b.offset, b.size));
      } else {
        out.segment(b.offset, b.size) = winv_[k] * v.segment(b.offset, b.size);
      }
    }
    return out;
  }

  // Newton direction for the homogeneous model. eta scales the linear
  // residuals that are driven to zero; ds / dk are the complementarity targets.
  Direction direction(const Iterate& it, double eta, const VectorXd& ds, double dk) const {
    VectorXd r1, r2, r3;
    double r4;
    residuals(it, r1, r2, r3, r4);
    const int n = d_.n, p = d_.p, m = d_.m;
    VectorXd rhs(n + p + m + 1);
    rhs.head(n) = -eta * r1;
    rhs.segment(n, p) = -eta * r2;
    rhs.segment(n + p, m) = -eta * r3 + apply_winv(ds);
    rhs(n + p + m) = -eta * r4 + dk / it.tau;
    const VectorXd sol = solve_kkt(rhs);

    Direction dir;
    dir.x = sol.head(n);
    dir.y = sol.segment(n, p);
    dir.z = sol.segment(n + p, m);
    dir.tau = sol(n + p + m);
    // Taking ds from the linear row keeps the residual reduction exact; the
    // complementarity row only steers centrality.
    dir.s = d_.h * dir.tau + eta * r3;
    if (m > 0) dir.s.noalias() -= d_.g * dir.x;
    dir.kappa = (dk - it.kappa * dir.tau) / it.tau;
    return dir;
  }

  const Cones& cones() const { return cones_; }

 private:
  const Data& d_;
  const Cones& cones_;
  Sparse ga_, gg_;
  double m_ = 1.0;
  Hessian hess_;
  std::vector<MatrixXd> winv_;
  Sparse kkt_;
  Eigen::SparseLU<Sparse, Eigen::COLAMDOrdering<int>> lu_;
};

Iterate initial_point(const Data& d, const Cones& cones) {
  Iterate it;
  it.x = VectorXd::Zero(d.n);
  it.y = VectorXd::Zero(d.p);
  it.s = VectorXd::Zero(d.m);
  for (const auto& b : cones.blocks) {
    switch (b.kind) {
      case ConeKind::nonnegative:
        it.s.segment(b.offset, b.size).setOnes();
        break;
      case ConeKind::second_order:
        it.s(b.offset) = std::sqrt(2.0);
        break;
      case ConeKind::exponential:
        for (int i = 0; i < 3; ++i) it.s(b.offset + i) = kExpCentre[i];
        break;
    }
  }
  it.z = it.s;
  it.tau = 1.0;
  it.kappa = 1.0;
  return it;
}

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Quality of an iterate measured on the original (unscaled) data.
struct Assessment {
  Residuals res;
  double pobj = 0.0, dobj = 0.0;
  bool optimal = false, infeasible = false, unbounded = false;
  VectorXd x, y, z, s;  // unscaled, divided by tau
};

Assessment assess(const Data& orig, const Scaling& sc, const Iterate& it, double tol) {
  Assessment a;
  // Unscale: x = E x^, s = s^ / D_G, y = D_A y^, z = D_G z^.
  const VectorXd x = sc.col.cwiseProduct(it.x);
  const VectorXd s = it.s.cwiseQuotient(sc.cone_row);
  const VectorXd y = sc.eq_row.cwiseProduct(it.y);
  const VectorXd z = sc.cone_row.cwiseProduct(it.z);

  const double nb = inf_norm(orig.b), nh = inf_norm(orig.h), nc = inf_norm(orig.c);
  a.x = x / it.tau;
  a.s = s / it.tau;
  a.y = y / it.tau;
  a.z = z / it.tau;

  VectorXd rp_eq = orig.p ? VectorXd(orig.a * a.x - orig.b) : VectorXd();
  VectorXd rp_cone = orig.m ? VectorXd(orig.g * a.x + a.s - orig.h) : VectorXd();
  VectorXd rd = orig.c;
  if (orig.p) rd.noalias() += orig.a.transpose() * a.y;
  if (orig.m) rd.noalias() += orig.g.transpose() * a.z;
  a.res.primal = std::max(inf_norm(rp_eq) / (1.0 + nb), inf_norm(rp_cone) / (1.0 + nh));
  a.res.dual = inf_norm(rd) / (1.0 + nc);
  a.pobj = orig.c.dot(a.x);
  a.dobj = -orig.b.dot(a.y) - orig.h.dot(a.z);
  a.res.gap = std::abs(a.pobj - a.dobj) / (1.0 + std::min(std::abs(a.pobj), std::abs(a.dobj)));
  a.optimal = a.res.primal <= tol && a.res.dual <= tol && a.res.gap <= tol;

  // Infeasibility certificate: b'y + h'z < 0 with A'y + G'z ~ 0, z in K*.
  const double byhz = orig.b.dot(y) + orig.h.dot(z);
  if (byhz < 0.0) {
    VectorXd r = VectorXd::Zero(orig.n);
    if (orig.p) r.noalias() += orig.a.transpose() * y;
    if (orig.m) r.noalias() += orig.g.transpose() * z;
    if (inf_norm(r) / (-byhz) <= tol) a.infeasible = true;
  }
  // Unboundedness certificate: c'x < 0 with Ax = 0, Gx + s = 0, s in K.
  const double cx = orig.c.dot(x);
  if (cx < 0.0) {
    double r = 0.0;
    if (orig.p) r = std::max(r, inf_norm(orig.a * x));
    if (orig.m) r = std::max(r, inf_norm(orig.g * x + s));
    if (r / (-cx) <= tol) a.unbounded = true;
  }
  return a;
}

}  // namespace

ConicSolution solve(const ConicProgram& program, const SolverSettings& settings) {
  program.validate();
  ConicSolution out;
  const Cones cones(program.cone_blocks());
  const Data orig = densify(program);
  Data d = orig;
  const Scaling sc = equilibrate(d, cones, settings.equilibrate);

  Engine engine(d, cones);
  Iterate it = initial_point(d, cones);

  auto finish = [&](SolveStatus status, const Assessment& a, const Iterate& at) {
    out.status = status;
    out.residuals = a.res;
    if (status == SolveStatus::infeasible) {
      // Normalized Farkas certificate.
      const VectorXd y = sc.eq_row.cwiseProduct(at.y);
      const VectorXd z = sc.cone_row.cwiseProduct(at.z);
      const double scale = -(orig.b.dot(y) + orig.h.dot(z));
      out.dual_eq = y / scale;
      out.dual_cone = z / scale;
      out.primal = VectorXd::Constant(orig.n, std::numeric_limits<double>::quiet_NaN());
      out.slack = VectorXd::Constant(orig.m, std::numeric_limits<double>::quiet_NaN());
      out.objective_value = std::numeric_limits<double>::infinity();
      out.dual_objective_value = std::numeric_limits<double>::infinity();
    } else if (status == SolveStatus::unbounded) {
      const VectorXd x = sc.col.cwiseProduct(at.x);
      const VectorXd s = at.s.cwiseQuotient(sc.cone_row);
      const double scale = -orig.c.dot(x);
      out.primal = x / scale;
      out.slack = s / scale;
      out.dual_eq = VectorXd::Constant(orig.p, std::numeric_limits<double>::quiet_NaN());
      out.dual_cone = VectorXd::Constant(orig.m, std::numeric_limits<double>::quiet_NaN());
      out.objective_value = -std::numeric_limits<double>::infinity();
      out.dual_objective_value = -std::numeric_limits<double>::infinity();
    } else {
      out.primal = a.x;
      out.slack = a.s;
      out.dual_eq = a.y;
      out.dual_cone = a.z;
      out.objective_value = a.pobj + program.objective_constant();
      out.dual_objective_value = a.dobj + program.objective_constant();
    }
    return out;
  };

  Assessment best;
  Iterate best_it = it;
  double best_score = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= settings.max_iters; ++iter) {
    out.iterations = iter;
    const Assessment a = assess(orig, sc, it, settings.tol);
    const double score = std::max({a.res.primal, a.res.dual, a.res.gap});
    if (score < best_score) {
      best_score = score;
      best = a;
      best_it = it;
    }
    if (settings.verbose) {
      std::cerr << "ipm " << iter << " pobj=" << a.pobj << " dobj=" << a.dobj
                << " pres=" << a.res.primal << " dres=" << a.res.dual << " gap=" << a.res.gap
                << " tau=" << it.tau << " kappa=" << it.kappa << " mu=" << engine.mu(it) << "\n";
    }
    if (a.optimal) return finish(SolveStatus::optimal, a, it);
    if (a.infeasible) return finish(SolveStatus::infeasible, a, it);
    if (a.unbounded) return finish(SolveStatus::unbounded, a, it);
    if (iter == settings.max_iters) break;

    // Predictor.
    if (!engine.factor(it)) break;
    const double mu0 = engine.mu(it);
    Direction dir = engine.direction(it, 1.0, -it.z, -it.tau * it.kappa);
    double alpha = 1.0;
    Iterate trial;
    bool moved = false;
    for (int ls = 0; ls < 80; ++ls, alpha *= 0.8) {
      trial = step(it, dir, alpha);
      if (engine.interior(trial) && engine.centrality(trial) <= settings.predictor_neighbourhood) {
        moved = true;
        break;
      }
    }
    if (moved) it = trial;

    // Centering correctors.
    for (int c = 0; c < settings.max_correctors; ++c) {
      const double cen = engine.centrality(it);
      if (cen <= settings.corrector_neighbourhood) break;
      if (!engine.factor(it)) break;
      const double m = engine.mu(it);
      const VectorXd g = barrier_gradient(cones, it.s);
      Direction cd = engine.direction(it, 0.0, -it.z - m * g, -it.tau * it.kappa + m);
      double beta = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 40; ++ls, beta *= 0.7) {
        Iterate t = step(it, cd, beta);
        if (engine.interior(t) && engine.centrality(t) < cen) {
          it = std::move(t);
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (!moved && engine.mu(it) >= mu0 * (1.0 - 1e-12)) {
      // Neither step made progress.
      out.message = "stalled";
      break;
    }
  }

  // Accept a slightly looser solution rather than discarding a usable point.
  const double loose = std::max(settings.tol * 1e2, 1e-6);
  if (best.res.primal <= loose && best.res.dual <= loose && best.res.gap <= loose) {
    out.message = out.message.empty() ? "reduced accuracy" : out.message + ", reduced accuracy";
    finish(SolveStatus::numerical_failure, best, best_it);
    return out;
  }
  if (out.message.empty()) out.message = "iteration limit";
  return finish(SolveStatus::numerical_failure, best, best_it);
}

}  // namespace rsma::conic
