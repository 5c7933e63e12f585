#include "pbgopt/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "pbgopt/bands.hpp"
#include "pbgopt/error.hpp"

namespace pbg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double FractionalSdp::value(const Eigen::VectorXd& x) const {
  return numerator.dot(x) / denominator.dot(x);
}

FractionalSdp build_fractional(const ReducedBlocks& blocks, const MaterialBounds& bounds,
                               double floor) {
  if (!(bounds.eps_min > 0.0) || !(bounds.eps_max > bounds.eps_min)) {
    throw InvalidArgument("build_fractional: need 0 < eps_min < eps_max");
  }
  if (!(floor > 0.0)) throw InvalidArgument("build_fractional: floor must be positive");
  if (blocks.per_k.empty()) throw InvalidArgument("build_fractional: no k-point blocks");

  const Polarization pol = blocks.polarization;
  const Eigen::Index n_eps = blocks.term_count();
  const Eigen::Index n = n_eps + 2;
  const Eigen::Index il = n - 2;  // lambda_l (TE) or 1/lambda_l (TM)
  const Eigen::Index iu = n - 1;  // lambda_u (TE) or 1/lambda_u (TM)

  FractionalSdp f;
  f.numerator = Eigen::VectorXd::Zero(n);
  f.denominator = Eigen::VectorXd::Zero(n);
  if (pol == Polarization::TE) {
    f.numerator[iu] = 1.0;
    f.numerator[il] = -1.0;
  } else {
    f.numerator[il] = 1.0;
    f.numerator[iu] = -1.0;
  }
  f.denominator[il] = 1.0;
  f.denominator[iu] = 1.0;

  f.lower = Eigen::VectorXd::Constant(n, floor);
  f.upper = Eigen::VectorXd::Constant(n, kInf);
  if (pol == Polarization::TE) {
    f.lower.head(n_eps).setConstant(1.0 / bounds.eps_max);
    f.upper.head(n_eps).setConstant(1.0 / bounds.eps_min);
  } else {
    f.lower.head(n_eps).setConstant(bounds.eps_min);
    f.upper.head(n_eps).setConstant(bounds.eps_max);
  }

  // Every LMI is stated as "... >= 0"; lower blocks are negated.
  for (const auto& kb : blocks.per_k) {
    for (int side = 0; side < 2; ++side) {
      const ProjectedBlock& pb = side == 0 ? kb.lower : kb.upper;
      const Eigen::Index s = pb.fixed_real.rows();
      const double sign_terms = (pol == Polarization::TE) == (side == 1) ? 1.0 : -1.0;
      AffineLmi lmi;
      lmi.constant = Eigen::MatrixXd::Zero(s, s);
      lmi.coeffs.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(s, s));
      for (Eigen::Index i = 0; i < n_eps; ++i) {
        lmi.coeffs[static_cast<std::size_t>(i)] = sign_terms * pb.terms_real[i];
      }
      lmi.coeffs[static_cast<std::size_t>(side == 0 ? il : iu)] = -sign_terms * pb.fixed_real;
      f.lmis.push_back(std::move(lmi));
    }
  }
  return f;
}

Eigen::VectorXd fractional_point(Polarization pol, const Eigen::VectorXd& eps,
                                 double lambda_lower, double lambda_upper) {
  const Eigen::Index n_eps = eps.size();
  Eigen::VectorXd x(n_eps + 2);
  if (pol == Polarization::TE) {
    x.head(n_eps) = eps.cwiseInverse();
    x[n_eps] = lambda_lower;
    x[n_eps + 1] = lambda_upper;
  } else {
    x.head(n_eps) = eps;
    x[n_eps] = 1.0 / lambda_lower;
    x[n_eps + 1] = 1.0 / lambda_upper;
  }
  return x;
}

LinearSdp charnes_cooper(const FractionalSdp& f) {
  const Eigen::Index n = f.size();
  const Eigen::Index theta = n;
  LinearSdp out;
  out.n_x = n;
  conic::Problem& p = out.problem;
  p.objective = Eigen::VectorXd::Zero(n + 1);
  p.objective.head(n) = f.numerator;

  for (const auto& lmi : f.lmis) {
    conic::PsdBlock blk;
    blk.constant = Eigen::MatrixXd::Zero(lmi.constant.rows(), lmi.constant.cols());
    blk.coeffs = lmi.coeffs;
    blk.coeffs.push_back(lmi.constant);
    p.psd.push_back(std::move(blk));
  }

  std::vector<std::pair<Eigen::Index, double>> rows;  // (variable, sign): sign*(w_i - b theta)
  std::vector<double> row_bound;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(f.lower[i])) {
      rows.emplace_back(i, 1.0);
      row_bound.push_back(f.lower[i]);
    }
    if (std::isfinite(f.upper[i])) {
      rows.emplace_back(i, -1.0);
      row_bound.push_back(f.upper[i]);
    }
  }
  const auto L = static_cast<Eigen::Index>(rows.size()) + 1;
  p.lp_constant = Eigen::VectorXd::Zero(L);
  p.lp_coeffs = Eigen::MatrixXd::Zero(L, n + 1);
  for (Eigen::Index r = 0; r + 1 < L; ++r) {
    const auto [var, sign] = rows[static_cast<std::size_t>(r)];
    p.lp_coeffs(r, var) = sign;
    p.lp_coeffs(r, theta) = -sign * row_bound[static_cast<std::size_t>(r)];
  }
  p.lp_coeffs(L - 1, theta) = 1.0;  // theta >= 0

  p.eq_matrix = Eigen::MatrixXd::Zero(1, n + 1);
  p.eq_matrix.row(0).head(n) = f.denominator.transpose();
  p.eq_rhs = Eigen::VectorXd::Ones(1);
  return out;
}

Eigen::VectorXd transport(const FractionalSdp& f, const Eigen::VectorXd& x) {
  const double dx = f.denominator.dot(x);
  if (!(dx > 0.0)) throw InvalidArgument("transport: denominator must be positive");
  Eigen::VectorXd out(x.size() + 1);
  out.head(x.size()) = x / dx;
  out[x.size()] = 1.0 / dx;
  return out;
}

SdpSolution solve_sdp(const LinearSdp& lsdp, const conic::Options& options) {
  const conic::Solution s = conic::solve(lsdp.problem, options);
  SdpSolution out;
  out.status = s.status;
  out.iterations = s.iterations;
  out.primal_residual = s.primal_residual;
  out.dual_residual = s.dual_residual;
  if (s.y.size() == lsdp.n_x + 1) {
    out.w = s.y.head(lsdp.n_x);
    out.theta = s.y[lsdp.n_x];
    out.objective = lsdp.problem.objective.dot(s.y);
  }
  return out;
}

Recovered recover(const SdpSolution& sol, Polarization pol, const MaterialBounds& bounds,
                  double theta_floor) {
  if (sol.status != conic::Status::optimal && sol.status != conic::Status::near_optimal) {
    throw InvalidArgument(std::string("recover: solver status is ") +
                          std::string(conic::to_string(sol.status)));
  }
  if (!(sol.theta > theta_floor)) {
    throw DegenerateSolution("recover: theta = " + std::to_string(sol.theta) +
                             " at or below the floor");
  }
  const Eigen::Index n = sol.w.size();
  if (n < 3) throw InvalidArgument("recover: solution too short");
  const Eigen::Index n_eps = n - 2;

  Recovered r;
  r.x = sol.w / sol.theta;
  r.design.bounds = bounds;
  r.design.eps.resize(n_eps);
  const double lo = pol == Polarization::TE ? 1.0 / bounds.eps_max : bounds.eps_min;
  const double hi = pol == Polarization::TE ? 1.0 / bounds.eps_min : bounds.eps_max;
  for (Eigen::Index i = 0; i < n_eps; ++i) {
    const double xi = r.x[i];
    r.bound_violation = std::max({r.bound_violation, lo - xi, xi - hi});
    const double raw = pol == Polarization::TE ? 1.0 / xi : xi;
    const double clamped = std::clamp(raw, bounds.eps_min, bounds.eps_max);
    r.clamp = std::max(r.clamp, std::abs(clamped - raw));
    r.design.eps[i] = clamped;
  }
  if (pol == Polarization::TE) {
    r.lambda_lower = r.x[n_eps];
    r.lambda_upper = r.x[n_eps + 1];
  } else {
    r.lambda_lower = 1.0 / r.x[n_eps];
    r.lambda_upper = 1.0 / r.x[n_eps + 1];
  }
  r.gap_midgap = gap_midgap(r.lambda_lower, r.lambda_upper);
  return r;
}

void write_sdp_dump(std::ostream& out, const LinearSdp& lsdp) {
  const conic::Problem& p = lsdp.problem;
  const Eigen::Index m = p.num_vars();
  const Eigen::Index eq = p.eq_rhs.size();
  const Eigen::Index lp_rows = p.lp_constant.size() + 2 * eq;

  const auto old_precision = out.precision(17);
  out << "\"pbgopt homogenized band-gap SDP, SDPA sparse format\n";
  out << "* variables 1.." << lsdp.n_x << " are w, variable " << m << " is theta\n";
  out << "* minimize -objective . y  s.t.  sum_i y_i F_i - F_0 >= 0\n";
  out << "* psd blocks: " << p.psd.size() << " (2 per k-point, lower then upper)\n";
  out << "* last block: " << p.lp_constant.size() << " inequality rows then " << 2 * eq
      << " rows encoding the equality constraints\n";
  out << m << '\n';
  out << p.psd.size() + (lp_rows > 0 ? 1 : 0) << '\n';
  for (const auto& blk : p.psd) out << blk.constant.rows() << ' ';
  if (lp_rows > 0) out << -lp_rows;
  out << '\n';
  for (Eigen::Index i = 0; i < m; ++i) out << -p.objective[i] << (i + 1 < m ? ' ' : '\n');

  auto emit_matrix = [&](Eigen::Index matno, std::size_t block, const Eigen::MatrixXd& a,
                         double sign) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      for (Eigen::Index r = 0; r <= c; ++r) {
        const double v = sign * 0.5 * (a(r, c) + a(c, r));
        if (v != 0.0) {
          out << matno << ' ' << block << ' ' << r + 1 << ' ' << c + 1 << ' ' << v << '\n';
        }
      }
    }
  };
  for (std::size_t b = 0; b < p.psd.size(); ++b) {
    emit_matrix(0, b + 1, p.psd[b].constant, -1.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      emit_matrix(i + 1, b + 1, p.psd[b].coeffs[static_cast<std::size_t>(i)], 1.0);
    }
  }
  if (lp_rows > 0) {
    const std::size_t lp_block = p.psd.size() + 1;
    auto emit_row = [&](Eigen::Index row, double constant, const Eigen::RowVectorXd& coeffs) {
      if (constant != 0.0) out << 0 << ' ' << lp_block << ' ' << row << ' ' << row << ' ' << -constant << '\n';
      for (Eigen::Index i = 0; i < m; ++i) {
        if (coeffs[i] != 0.0) {
          out << i + 1 << ' ' << lp_block << ' ' << row << ' ' << row << ' ' << coeffs[i] << '\n';
        }
      }
    };
    Eigen::Index row = 1;
    for (Eigen::Index r = 0; r < p.lp_constant.size(); ++r) {
      emit_row(row++, p.lp_constant[r], p.lp_coeffs.row(r));
    }
    for (Eigen::Index r = 0; r < eq; ++r) {
      emit_row(row++, -p.eq_rhs[r], p.eq_matrix.row(r));
      emit_row(row++, p.eq_rhs[r], -p.eq_matrix.row(r));
    }
  }
  out.precision(old_precision);
}

}  // namespace pbg
