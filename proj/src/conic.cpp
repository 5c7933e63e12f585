#include "pbgopt/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pbgopt/error.hpp"

namespace pbg::conic {

std::string_view to_string(Status status) {
  switch (status) {
    case Status::optimal: return "optimal";
    case Status::near_optimal: return "near-optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Out of place on purpose: a = 0.5 * (a + a.transpose()) aliases in Eigen.
Eigen::MatrixXd symmetric_part(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

// SDPA dual form: maximize b.y subject to C_k - sum_i y_i A_ki = Z_k >= 0 and
// c - A_lp y = z >= 0.
struct Sdpa {
  Eigen::VectorXd b;
  std::vector<Eigen::MatrixXd> C;
  std::vector<Eigen::MatrixXd> Avec;  // per block: m x s^2, row i = vec(A_ki)
  Eigen::VectorXd c_lp;
  Eigen::MatrixXd A_lp;  // L x m

  Eigen::Index m() const { return b.size(); }
};

struct Reduction {
  Sdpa sdpa;
  Eigen::VectorXd y0;
  Eigen::MatrixXd N;
  double offset = 0.0;
  bool inconsistent = false;
};

void validate(const Problem& p) {
  const Eigen::Index m = p.num_vars();
  for (const auto& blk : p.psd) {
    if (blk.constant.rows() != blk.constant.cols()) {
      throw InvalidArgument("conic: PSD block constant must be square");
    }
    if (static_cast<Eigen::Index>(blk.coeffs.size()) != m) {
      throw InvalidArgument("conic: PSD block needs one coefficient matrix per variable");
    }
    for (const auto& c : blk.coeffs) {
      if (c.rows() != blk.constant.rows() || c.cols() != blk.constant.cols()) {
        throw InvalidArgument("conic: PSD coefficient shape mismatch");
      }
    }
  }
  if (p.lp_coeffs.rows() != p.lp_constant.size() ||
      (p.lp_constant.size() > 0 && p.lp_coeffs.cols() != m)) {
    throw InvalidArgument("conic: LP block shape mismatch");
  }
  if (p.eq_matrix.rows() != p.eq_rhs.size() ||
      (p.eq_rhs.size() > 0 && p.eq_matrix.cols() != m)) {
    throw InvalidArgument("conic: equality block shape mismatch");
  }
}

// Gauss-Jordan with complete pivoting: y = y0 + N t parametrizes {E y = f}.
Reduction eliminate(const Problem& p) {
  const Eigen::Index m = p.num_vars();
  const Eigen::Index rows = p.eq_rhs.size();
  Eigen::MatrixXd E = p.eq_matrix;
  Eigen::VectorXd f = p.eq_rhs;
  std::vector<Eigen::Index> pivot_col;
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  const double scale = rows > 0 ? std::max(1.0, E.cwiseAbs().maxCoeff()) : 1.0;

  Reduction red;
  Eigen::Index rank = 0;
  for (; rank < rows; ++rank) {
    Eigen::Index best_r = -1;
    Eigen::Index best_c = -1;
    double best = 0.0;
    for (Eigen::Index r = rank; r < rows; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) {
        if (!used[c] && std::abs(E(r, c)) > best) {
          best = std::abs(E(r, c));
          best_r = r;
          best_c = c;
        }
      }
    }
    if (best <= 1e-12 * scale) break;
    E.row(rank).swap(E.row(best_r));
    std::swap(f[rank], f[best_r]);
    const double piv = E(rank, best_c);
    E.row(rank) /= piv;
    f[rank] /= piv;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (r == rank || E(r, best_c) == 0.0) continue;
      const double factor = E(r, best_c);
      E.row(r) -= factor * E.row(rank);
      f[r] -= factor * f[rank];
    }
    used[best_c] = true;
    pivot_col.push_back(best_c);
  }
  for (Eigen::Index r = rank; r < rows; ++r) {
    if (std::abs(f[r]) > 1e-10 * std::max(1.0, p.eq_rhs.cwiseAbs().maxCoeff())) {
      red.inconsistent = true;
    }
  }

  std::vector<Eigen::Index> free_vars;
  for (Eigen::Index c = 0; c < m; ++c) {
    if (!used[c]) free_vars.push_back(c);
  }
  const auto mf = static_cast<Eigen::Index>(free_vars.size());
  red.y0 = Eigen::VectorXd::Zero(m);
  red.N = Eigen::MatrixXd::Zero(m, mf);
  for (Eigen::Index r = 0; r < rank; ++r) red.y0[pivot_col[r]] = f[r];
  for (Eigen::Index j = 0; j < mf; ++j) {
    red.N(free_vars[j], j) = 1.0;
    for (Eigen::Index r = 0; r < rank; ++r) red.N(pivot_col[r], j) = -E(r, free_vars[j]);
  }

  Sdpa& s = red.sdpa;
  s.b = red.N.transpose() * p.objective;
  red.offset = p.objective.dot(red.y0);
  for (const auto& blk : p.psd) {
    const Eigen::Index n = blk.constant.rows();
    Eigen::MatrixXd C = blk.constant;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (red.y0[i] != 0.0) C += red.y0[i] * blk.coeffs[i];
    }
    s.C.push_back(0.5 * (C + C.transpose()));
    Eigen::MatrixXd avec = Eigen::MatrixXd::Zero(mf, n * n);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::MatrixXd sym = 0.5 * (blk.coeffs[i] + blk.coeffs[i].transpose());
      const Eigen::Map<const Eigen::RowVectorXd> flat(sym.data(), n * n);
      for (Eigen::Index j = 0; j < mf; ++j) {
        if (red.N(i, j) != 0.0) avec.row(j) -= red.N(i, j) * flat;
      }
    }
    s.Avec.push_back(std::move(avec));
  }
  if (p.lp_constant.size() > 0) {
    s.c_lp = p.lp_constant + p.lp_coeffs * red.y0;
    s.A_lp = -p.lp_coeffs * red.N;
  } else {
    s.c_lp.resize(0);
    s.A_lp.resize(0, mf);
  }
  return red;
}

Eigen::MatrixXd block_matrix(const Eigen::MatrixXd& avec, Eigen::Index i, Eigen::Index n) {
  return Eigen::Map<const Eigen::MatrixXd>(avec.row(i).eval().data(), n, n);
}

// A^T y for one block.
Eigen::MatrixXd adjoint_block(const Eigen::MatrixXd& avec, const Eigen::VectorXd& y,
                              Eigen::Index n) {
  const Eigen::RowVectorXd flat = y.transpose() * avec;
  return Eigen::Map<const Eigen::MatrixXd>(flat.data(), n, n);
}

// A(X) contribution of one block.
Eigen::VectorXd apply_block(const Eigen::MatrixXd& avec, const Eigen::MatrixXd& X) {
  const Eigen::Map<const Eigen::VectorXd> flat(X.data(), X.size());
  return avec * flat;
}

double max_step(const Eigen::MatrixXd& X, const Eigen::MatrixXd& dX) {
  Eigen::LLT<Eigen::MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd S = llt.matrixL().solve(dX);
  S = llt.matrixL().solve(Eigen::MatrixXd(S.transpose())).transpose().eval();
  S = symmetric_part(S);
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

double max_step_lp(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
  double a = kInf;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
  }
  return a;
}

struct Iterate {
  std::vector<Eigen::MatrixXd> X, Z;
  Eigen::VectorXd x, z, y;
};

struct Direction {
  std::vector<Eigen::MatrixXd> dX, dZ;
  Eigen::VectorXd dx, dz, dy;
};

Solution interior_point(const Sdpa& s, const Options& opt) {
  const Eigen::Index m = s.m();
  const std::size_t nb = s.C.size();
  const Eigen::Index L = s.c_lp.size();

  Eigen::Index total_dim = L;
  for (const auto& C : s.C) total_dim += C.rows();

  const double norm_b = s.b.norm();
  double norm_c = s.c_lp.norm();
  for (const auto& C : s.C) norm_c = std::hypot(norm_c, C.norm());

  // Starting point in the spirit of SDPT3's default scaling.
  Iterate it;
  it.y = Eigen::VectorXd::Zero(m);
  for (std::size_t k = 0; k < nb; ++k) {
    const Eigen::Index n = s.C[k].rows();
    const double rn = std::sqrt(static_cast<double>(n));
    double xi = std::max(10.0, rn);
    double eta = std::max({10.0, rn, s.C[k].norm()});
    for (Eigen::Index i = 0; i < m; ++i) {
      const double an = s.Avec[k].row(i).norm();
      xi = std::max(xi, n * (1.0 + std::abs(s.b[i])) / (1.0 + an));
      eta = std::max(eta, an);
    }
    it.X.push_back(xi * Eigen::MatrixXd::Identity(n, n));
    it.Z.push_back(eta * Eigen::MatrixXd::Identity(n, n));
  }
  {
    double xi = 10.0;
    double eta = std::max(10.0, s.c_lp.size() > 0 ? s.c_lp.cwiseAbs().maxCoeff() : 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double an = L > 0 ? s.A_lp.col(i).norm() : 0.0;
      xi = std::max(xi, (1.0 + std::abs(s.b[i])) / (1.0 + an));
      eta = std::max(eta, an);
    }
    it.x = Eigen::VectorXd::Constant(L, xi);
    it.z = Eigen::VectorXd::Constant(L, eta);
  }

  Solution sol;
  double best_merit = kInf;
  Eigen::VectorXd best_y = it.y;
  double best_p = kInf, best_d = kInf, best_g = kInf;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    // Residuals.
    Eigen::VectorXd rp = s.b;
    std::vector<Eigen::MatrixXd> Rd(nb);
    double pobj = 0.0;
    double comp = 0.0;
    double rd_norm = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      const Eigen::Index n = s.C[k].rows();
      rp -= apply_block(s.Avec[k], it.X[k]);
      Rd[k] = s.C[k] - it.Z[k] - adjoint_block(s.Avec[k], it.y, n);
      pobj += (s.C[k].cwiseProduct(it.X[k])).sum();
      comp += (it.X[k].cwiseProduct(it.Z[k])).sum();
      rd_norm = std::hypot(rd_norm, Rd[k].norm());
    }
    Eigen::VectorXd rd_lp(L);
    if (L > 0) {
      rp -= s.A_lp.transpose() * it.x;
      rd_lp = s.c_lp - it.z - s.A_lp * it.y;
      pobj += s.c_lp.dot(it.x);
      comp += it.x.dot(it.z);
      rd_norm = std::hypot(rd_norm, rd_lp.norm());
    }
    const double dobj = s.b.dot(it.y);
    const double mu = comp / static_cast<double>(total_dim);
    const double pinf = rp.norm() / (1.0 + norm_b);
    const double dinf = rd_norm / (1.0 + norm_c);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.iterations = iter;

    const double merit = std::max({pinf, dinf, gap});
    if (merit < best_merit) {
      best_merit = merit;
      best_y = it.y;
      best_p = dinf;
      best_d = pinf;
      best_g = gap;
    }
    if (pinf <= opt.feasibility_tol && dinf <= opt.feasibility_tol && gap <= opt.gap_tol) {
      sol.status = Status::optimal;
      break;
    }
    // Divergence signals: multipliers exploding means the LMI side is infeasible,
    // y exploding with small constraint residual means the objective is unbounded.
    double xnorm = it.x.size() > 0 ? it.x.cwiseAbs().maxCoeff() : 0.0;
    for (const auto& X : it.X) xnorm = std::max(xnorm, X.cwiseAbs().maxCoeff());
    if (xnorm > 1e12 * (1.0 + norm_b) && pinf < 1e-6 && pobj < -1e8 * (1.0 + std::abs(dobj))) {
      sol.status = Status::infeasible;
      return sol;
    }
    if (it.y.cwiseAbs().maxCoeff() > 1e12 && dinf < 1e-6 && dobj > 1e8) {
      sol.status = Status::unbounded;
      return sol;
    }

    // Schur complement M_ij = sum_k <A_ki, X_k A_kj Z_k^{-1}> + lp part.
    std::vector<Eigen::MatrixXd> Zinv(nb);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    bool broken = false;
    for (std::size_t k = 0; k < nb; ++k) {
      const Eigen::Index n = s.C[k].rows();
      Eigen::LLT<Eigen::MatrixXd> llt(it.Z[k]);
      if (llt.info() != Eigen::Success) {
        broken = true;
        break;
      }
      Zinv[k] = llt.solve(Eigen::MatrixXd::Identity(n, n));
      Zinv[k] = symmetric_part(Zinv[k]);
      Eigen::MatrixXd G(n * n, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::MatrixXd Aj = block_matrix(s.Avec[k], j, n);
        const Eigen::MatrixXd g = it.X[k] * Aj * Zinv[k];
        G.col(j) = Eigen::Map<const Eigen::VectorXd>(g.data(), n * n);
      }
      M.noalias() += s.Avec[k] * G;
    }
    if (broken) break;
    Eigen::VectorXd lp_ratio(L);
    if (L > 0) {
      lp_ratio = it.x.cwiseQuotient(it.z);
      M.noalias() += s.A_lp.transpose() * lp_ratio.asDiagonal() * s.A_lp;
    }
    M = symmetric_part(M);
    Eigen::LDLT<Eigen::MatrixXd> schur(M);
    if (schur.info() != Eigen::Success) break;

    // Solve for a direction with complementarity targets R_k (ΔX = R - X ΔZ Z^{-1}).
    auto direction = [&](const std::vector<Eigen::MatrixXd>& R, const Eigen::VectorXd& r_lp) {
      Direction d;
      Eigen::VectorXd rhs = rp;
      for (std::size_t k = 0; k < nb; ++k) {
        const Eigen::MatrixXd t = R[k] - it.X[k] * Rd[k] * Zinv[k];
        rhs -= apply_block(s.Avec[k], 0.5 * (t + t.transpose()));
      }
      if (L > 0) {
        const Eigen::VectorXd t = r_lp - lp_ratio.cwiseProduct(rd_lp);
        rhs -= s.A_lp.transpose() * t;
      }
      d.dy = schur.solve(rhs);
      d.dX.resize(nb);
      d.dZ.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        const Eigen::Index n = s.C[k].rows();
        d.dZ[k] = Rd[k] - adjoint_block(s.Avec[k], d.dy, n);
        const Eigen::MatrixXd t = R[k] - it.X[k] * d.dZ[k] * Zinv[k];
        d.dX[k] = 0.5 * (t + t.transpose());
      }
      if (L > 0) {
        d.dz = rd_lp - s.A_lp * d.dy;
        d.dx = r_lp - lp_ratio.cwiseProduct(d.dz);
      } else {
        d.dz.resize(0);
        d.dx.resize(0);
      }
      return d;
    };
    auto steps = [&](const Direction& d) {
      double ap = kInf, ad = kInf;
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(it.X[k], d.dX[k]));
        ad = std::min(ad, max_step(it.Z[k], d.dZ[k]));
      }
      if (L > 0) {
        ap = std::min(ap, max_step_lp(it.x, d.dx));
        ad = std::min(ad, max_step_lp(it.z, d.dz));
      }
      return std::pair{ap, ad};
    };

    // Predictor.
    std::vector<Eigen::MatrixXd> R(nb);
    for (std::size_t k = 0; k < nb; ++k) R[k] = -it.X[k];
    Eigen::VectorXd r_lp = -it.x;
    const Direction aff = direction(R, r_lp);
    auto [ap_aff, ad_aff] = steps(aff);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double comp_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      comp_aff += ((it.X[k] + ap_aff * aff.dX[k]).cwiseProduct(it.Z[k] + ad_aff * aff.dZ[k]))
                      .sum();
    }
    if (L > 0) comp_aff += (it.x + ap_aff * aff.dx).dot(it.z + ad_aff * aff.dz);
    const double mu_aff = std::max(comp_aff, 0.0) / static_cast<double>(total_dim);
    double sigma = std::pow(mu_aff / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    for (std::size_t k = 0; k < nb; ++k) {
      R[k] = sigma * mu * Zinv[k] - it.X[k] - aff.dX[k] * aff.dZ[k] * Zinv[k];
      R[k] = symmetric_part(R[k]);
    }
    if (L > 0) {
      r_lp = (sigma * mu - aff.dx.cwiseProduct(aff.dz).array()).matrix().cwiseQuotient(it.z) -
             it.x;
    }
    const Direction dir = direction(R, r_lp);
    auto [ap, ad] = steps(dir);
    const double gamma = 0.9 + 0.09 * std::min({ap, ad, 1.0});
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    if (ap < 1e-12 && ad < 1e-12) break;

    for (std::size_t k = 0; k < nb; ++k) {
      it.X[k] += ap * dir.dX[k];
      it.Z[k] += ad * dir.dZ[k];
      it.X[k] = symmetric_part(it.X[k]);
      it.Z[k] = symmetric_part(it.Z[k]);
    }
    if (L > 0) {
      it.x += ap * dir.dx;
      it.z += ad * dir.dz;
    }
    it.y += ad * dir.dy;
  }

  if (sol.status != Status::optimal) {
    const double near = opt.near_optimal_factor;
    it.y = best_y;
    sol.status = (best_p <= near * opt.feasibility_tol && best_d <= near * opt.feasibility_tol &&
                  best_g <= near * opt.gap_tol)
                     ? Status::near_optimal
                     : Status::numerical_failure;
  }
  sol.y = it.y;
  sol.objective = s.b.dot(it.y);
  // In the LMI form the "primal" residual is the constraint (Z) side.
  if (sol.status == Status::optimal) {
    double rd = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      rd = std::hypot(rd,
                      (s.C[k] - it.Z[k] - adjoint_block(s.Avec[k], it.y, s.C[k].rows())).norm());
    }
    if (L > 0) rd = std::hypot(rd, (s.c_lp - it.z - s.A_lp * it.y).norm());
    Eigen::VectorXd rp = s.b;
    for (std::size_t k = 0; k < nb; ++k) rp -= apply_block(s.Avec[k], it.X[k]);
    if (L > 0) rp -= s.A_lp.transpose() * it.x;
    sol.primal_residual = rd / (1.0 + norm_c);
    sol.dual_residual = rp.norm() / (1.0 + norm_b);
  } else {
    sol.primal_residual = best_p;
    sol.dual_residual = best_d;
  }
  sol.gap = sol.status == Status::optimal ? 0.0 : best_g;
  return sol;
}

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  validate(problem);
  Reduction red = eliminate(problem);
  Solution sol;
  if (red.inconsistent) {
    sol.status = Status::infeasible;
    sol.y = red.y0;
    return sol;
  }
  if (red.sdpa.m() == 0) {
    const Violation v = constraint_violation(problem, red.y0);
    sol.status = v.min_eigenvalue >= -options.feasibility_tol ? Status::optimal
                                                               : Status::infeasible;
    sol.y = red.y0;
    sol.objective = problem.objective.dot(red.y0);
    return sol;
  }
  Solution inner = interior_point(red.sdpa, options);
  sol = inner;
  sol.y = red.y0 + red.N * inner.y;
  sol.objective = problem.objective.dot(sol.y);
  return sol;
}

Violation constraint_violation(const Problem& problem, const Eigen::VectorXd& y) {
  validate(problem);
  if (y.size() != problem.num_vars()) throw InvalidArgument("conic: wrong variable count");
  Violation v;
  v.min_eigenvalue = kInf;
  for (const auto& blk : problem.psd) {
    Eigen::MatrixXd G = blk.constant;
    for (Eigen::Index i = 0; i < y.size(); ++i) G += y[i] * blk.coeffs[i];
    G = symmetric_part(G);
    if (G.rows() == 0) continue;
    v.min_eigenvalue = std::min(
        v.min_eigenvalue,
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .minCoeff());
  }
  if (problem.lp_constant.size() > 0) {
    v.min_eigenvalue =
        std::min(v.min_eigenvalue, (problem.lp_constant + problem.lp_coeffs * y).minCoeff());
  }
  if (!std::isfinite(v.min_eigenvalue)) v.min_eigenvalue = 0.0;
  if (problem.eq_rhs.size() > 0) {
    v.equality = (problem.eq_matrix * y - problem.eq_rhs).cwiseAbs().maxCoeff();
  }
  return v;
}

}  // namespace pbg::conic
